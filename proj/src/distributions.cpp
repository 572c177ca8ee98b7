#include "marginal_lab/distributions.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "marginal_lab/errors.hpp"
#include "marginal_lab/io.hpp"

namespace marginal_lab {

namespace {

void require_dim(int d, const char* who) {
    if (d < 1) throw invalid_dimension_error(std::string(who) + ": need d >= 1");
}

// Deterministic estimate of A = E| |X|^2/sigma2 - d | for sources without a
// closed form. The stream is fixed by (d, salt), never by caller state.
MomentValue estimate_A_fixed(const VectorSource::Sampler& sampler, int d, double sigma2,
                             std::uint64_t salt, int n = 20000) {
    Rng rng = derive_stream(0x6D6F6D656E744131ULL, {salt, static_cast<std::uint64_t>(d)});
    Vec x(d);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        sampler(rng, x);
        const double v = std::abs(norm2_sq(x) / sigma2 - d);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return MomentValue{mean, false, std::sqrt(var / n)};
}

} // namespace

VectorSource make_cross_polytope(int d) {
    require_dim(d, "make_cross_polytope");
    const double root_d = std::sqrt(static_cast<double>(d));
    auto sampler = [d, root_d](Rng& rng, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        const std::uint64_t i = rng.below(static_cast<std::uint64_t>(d));
        out[i] = (rng.uniform() < 0.5) ? root_d : -root_d;
    };
    return VectorSource(d, "cross-polytope", 1.0, MomentValue{0.0, true, 0.0}, MomentValue{1.0, true, 0.0},
                        sampler);
}

VectorSource make_gaussian(int d) {
    require_dim(d, "make_gaussian");
    auto sampler = [](Rng& rng, std::span<double> out) { rng.fill_normal(out); };
    const MomentValue A = estimate_A_fixed(sampler, d, 1.0, 0x67617573ULL);
    return VectorSource(d, "gaussian", 1.0, A, MomentValue{1.0, true, 0.0}, sampler);
}

VectorSource make_sphere(int d) {
    require_dim(d, "make_sphere");
    const double root_d = std::sqrt(static_cast<double>(d));
    auto sampler = [root_d](Rng& rng, std::span<double> out) {
        double n = 0.0;
        do {
            rng.fill_normal(out);
            n = norm2(out);
        } while (n == 0.0);
        for (double& v : out) v *= root_d / n;
    };
    return VectorSource(d, "sphere", 1.0, MomentValue{0.0, true, 0.0}, MomentValue{1.0, true, 0.0}, sampler);
}

double l1_ball_radius(int d) {
    // per-coordinate variance of uniform measure on r B_1^d is
    // r^2 * 2 / ((d+1)(d+2)); unit variance fixes r
    return std::sqrt(0.5 * (d + 1.0) * (d + 2.0));
}

VectorSource make_l1_ball(int d) {
    require_dim(d, "make_l1_ball");
    const double r = l1_ball_radius(d);
    auto sampler = [d, r](Rng& rng, std::span<double> out) {
        // exponential spacings give a uniform point of the simplex, the
        // radial factor u^{1/d} fills the ball, signs symmetrize
        double total = 0.0;
        for (double& v : out) {
            v = rng.exponential();
            total += v;
        }
        const double t = r * std::pow(rng.uniform(), 1.0 / d) / total;
        for (double& v : out) {
            v *= t;
            if (rng.uniform() < 0.5) v = -v;
        }
    };
    auto A = estimate_A_fixed(sampler, d, 1.0, 0x6C31ULL);
    return VectorSource(d, "l1-ball", 1.0, A, MomentValue{1.0, true, 0.0}, sampler);
}

VectorSource make_cube(int d) {
    require_dim(d, "make_cube");
    auto sampler = [](Rng& rng, std::span<double> out) {
        for (double& v : out) v = (rng.uniform() < 0.5) ? 1.0 : -1.0;
    };
    return VectorSource(d, "cube", 1.0, MomentValue{0.0, true, 0.0}, MomentValue{1.0, true, 0.0}, sampler);
}

VectorSource make_source(const std::string& name, int d) {
    if (name == "cross-polytope") return make_cross_polytope(d);
    if (name == "gaussian") return make_gaussian(d);
    if (name == "sphere") return make_sphere(d);
    if (name == "l1-ball") return make_l1_ball(d);
    if (name == "cube") return make_cube(d);
    throw std::invalid_argument("unknown source '" + name +
                                "' (expected cross-polytope|gaussian|sphere|l1-ball|cube)");
}

MomentEstimate estimate_moments(const VectorSource& source, int n, Rng& rng) {
    if (n < 2) throw insufficient_sample_error("estimate_moments: need n >= 2");
    const int d = source.d();
    std::vector<double> samples(static_cast<std::size_t>(n) * d);
    std::vector<double> norm_sq(n);
    for (int i = 0; i < n; ++i) {
        std::span<double> row(samples.data() + static_cast<std::size_t>(i) * d, d);
        source.sample_into(rng, row);
        norm_sq[i] = norm2_sq(row);
    }

    MomentEstimate est;
    {
        double sum = 0.0, sum_sq = 0.0;
        for (double v : norm_sq) {
            sum += v / d;
            sum_sq += (v / d) * (v / d);
        }
        est.sigma2 = sum / n;
        const double var = std::max(0.0, sum_sq / n - est.sigma2 * est.sigma2);
        est.sigma2_std_error = std::sqrt(var / n);
    }
    {
        double sum = 0.0, sum_sq = 0.0;
        for (double v : norm_sq) {
            const double a = std::abs(v / est.sigma2 - d);
            sum += a;
            sum_sq += a * a;
        }
        est.A = sum / n;
        const double var = std::max(0.0, sum_sq / n - est.A * est.A);
        est.A_std_error = std::sqrt(var / n);
    }

    // power iteration on (1/n) sum x x^T, accumulated through the samples
    {
        Vec v(d, 0.0);
        std::span<double> first(samples.data(), d);
        const double fn = norm2(first);
        if (fn > 0) {
            for (int r = 0; r < d; ++r) v[r] = first[r] / fn;
        } else {
            v[0] = 1.0;
        }
        double lambda = 0.0;
        for (int iter = 0; iter < 2000; ++iter) {
            Vec w(d, 0.0);
            for (int i = 0; i < n; ++i) {
                std::span<const double> row(samples.data() + static_cast<std::size_t>(i) * d, d);
                const double c = dot(row, v);
                for (int r = 0; r < d; ++r) w[r] += c * row[r];
            }
            for (double& x : w) x /= n;
            const double new_lambda = dot(w, v);
            const double wn = norm2(w);
            if (wn == 0.0) break;
            for (int r = 0; r < d; ++r) v[r] = w[r] / wn;
            if (iter > 0 && std::abs(new_lambda - lambda) <= 1e-8 * std::max(1.0, std::abs(new_lambda))) {
                lambda = new_lambda;
                break;
            }
            lambda = new_lambda;
        }
        est.B = lambda;
    }
    return est;
}

void export_samples_csv(const VectorSource& source, int n, Rng& rng, std::ostream& os) {
    Vec x(source.d());
    for (int i = 0; i < n; ++i) {
        source.sample_into(rng, x);
        for (int j = 0; j < source.d(); ++j) {
            if (j) os << ',';
            os << format_double(x[j]);
        }
        os << '\n';
    }
}

} // namespace marginal_lab
