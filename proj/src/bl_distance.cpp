#include "marginal_lab/bl_distance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "marginal_lab/errors.hpp"
#include "marginal_lab/io.hpp"
#include "marginal_lab/mincost_flow.hpp"
#include "marginal_lab/parallel.hpp"

namespace marginal_lab {

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

struct PointKey {
    std::size_t hash;
    const double* coords;
    int k;
};

std::size_t hash_point(std::span<const double> p) {
    std::size_t h = 0x9E3779B97F4A7C15ULL;
    for (double x : p) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x); // fold -0.0 into 0.0
        h ^= bits + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

} // namespace

EmpiricalMeasure::EmpiricalMeasure(int k, std::vector<double> points_flat, Vec weights)
    : k_(k), points_(std::move(points_flat)), weights_(std::move(weights)) {
    if (k_ < 1) throw invalid_dimension_error("EmpiricalMeasure: need k >= 1");
    if (weights_.empty()) throw invalid_dimension_error("EmpiricalMeasure: need at least one point");
    if (points_.size() != weights_.size() * static_cast<std::size_t>(k_))
        throw invalid_dimension_error("EmpiricalMeasure: points/weights size mismatch");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("EmpiricalMeasure: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("EmpiricalMeasure: weights sum to " + format_double(total));
    for (double x : points_)
        if (!std::isfinite(x)) throw std::invalid_argument("EmpiricalMeasure: non-finite coordinate");
}

EmpiricalMeasure EmpiricalMeasure::uniform(int k, std::vector<double> points_flat) {
    const std::size_t n = points_flat.size() / static_cast<std::size_t>(k);
    // (1/n summed n times is exactly 1 only for nice n; normalize the tail)
    Vec w(n, 1.0 / static_cast<double>(n));
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) total += w[i];
    if (n > 0) w[n - 1] = 1.0 - total;
    return EmpiricalMeasure(k, std::move(points_flat), std::move(w));
}

void EmpiricalMeasure::write_csv(std::ostream& os) const {
    os << k_ << '\n';
    for (int i = 0; i < n(); ++i) {
        for (int a = 0; a < k_; ++a) os << format_double(point(i)[a]) << ',';
        os << format_double(weights_[i]) << '\n';
    }
}

EmpiricalMeasure EmpiricalMeasure::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("measure csv: missing header");
    const int k = std::stoi(line);
    std::vector<double> pts;
    Vec weights;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != static_cast<std::size_t>(k) + 1)
            throw std::invalid_argument("measure csv: row with wrong arity");
        for (int a = 0; a < k; ++a) pts.push_back(vals[a]);
        weights.push_back(vals.back());
    }
    return EmpiricalMeasure(k, std::move(pts), std::move(weights));
}

double bl_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const BlOptions& options) {
    if (mu.k() != nu.k()) throw invalid_dimension_error("bl_lp: dimension mismatch");
    const int k = mu.k();

    // merge the supports; identical points cancel in the signed weights
    std::unordered_map<std::size_t, std::vector<int>> buckets;
    std::vector<const double*> support;
    std::vector<double> signed_weight;
    auto absorb = [&](const EmpiricalMeasure& m, double sign) {
        for (int i = 0; i < m.n(); ++i) {
            const auto p = m.point(i);
            const std::size_t h = hash_point(p);
            auto& bucket = buckets[h];
            int found = -1;
            for (int idx : bucket) {
                if (std::equal(p.begin(), p.end(), support[idx])) {
                    found = idx;
                    break;
                }
            }
            if (found < 0) {
                found = static_cast<int>(support.size());
                support.push_back(p.data());
                signed_weight.push_back(0.0);
                bucket.push_back(found);
            }
            signed_weight[found] += sign * m.weights()[i];
        }
    };
    absorb(mu, +1.0);
    absorb(nu, -1.0);

    const int n_support = static_cast<int>(support.size());
    if (n_support > options.support_cap)
        throw capacity_error("bl_lp: combined support " + std::to_string(n_support) + " exceeds cap " +
                             std::to_string(options.support_cap) + "; subsample the measures");

    std::vector<int> pos, neg;
    for (int i = 0; i < n_support; ++i) {
        if (signed_weight[i] > 0.0) pos.push_back(i);
        else if (signed_weight[i] < 0.0) neg.push_back(i);
    }
    if (pos.empty() && neg.empty()) return 0.0;

    const int np = static_cast<int>(pos.size());
    const int nn = static_cast<int>(neg.size());
    const int hub = np + nn;
    std::vector<double> supply(hub + 1, 0.0);
    double total = 0.0;
    for (int i = 0; i < np; ++i) {
        supply[i] = signed_weight[pos[i]];
        total += supply[i];
    }
    for (int j = 0; j < nn; ++j) {
        supply[np + j] = signed_weight[neg[j]];
        total += supply[np + j];
    }
    supply[hub] = -total;

    std::vector<FlowArc> arcs;
    arcs.reserve(static_cast<std::size_t>(np) * nn + 2 * static_cast<std::size_t>(hub));
    for (int i = 0; i < np; ++i) {
        std::span<const double> pi(support[pos[i]], static_cast<std::size_t>(k));
        for (int j = 0; j < nn; ++j) {
            std::span<const double> pj(support[neg[j]], static_cast<std::size_t>(k));
            arcs.push_back({i, np + j, dist(pi, pj)});
        }
    }
    for (int v = 0; v < hub; ++v) {
        arcs.push_back({v, hub, 1.0});
        arcs.push_back({hub, v, 1.0});
    }

    return min_cost_flow(hub + 1, supply, arcs, hub).cost;
}

namespace {

EmpiricalMeasure gaussian_cloud(int k, int n, double sigma, Rng& rng) {
    std::vector<double> pts(static_cast<std::size_t>(n) * k);
    rng.fill_normal(pts);
    for (double& x : pts) x *= sigma;
    return EmpiricalMeasure::uniform(k, std::move(pts));
}

} // namespace

BlEstimate bl_empirical_gaussian(const EmpiricalMeasure& sample, double sigma, int m, Rng& rng,
                                 int support_cap) {
    if (m < 1) throw std::invalid_argument("bl_empirical_gaussian: need m >= 1");
    const int k = sample.k();
    const int n = sample.n();
    BlOptions opts;
    opts.support_cap = (support_cap > 0) ? support_cap : n + m;

    const EmpiricalMeasure comparator = gaussian_cloud(k, m, sigma, rng);
    const EmpiricalMeasure base_a = gaussian_cloud(k, n, sigma, rng);
    const EmpiricalMeasure base_b = gaussian_cloud(k, m, sigma, rng);

    BlEstimate out;
    out.estimate = bl_lp(sample, comparator, opts);
    out.baseline = bl_lp(base_a, base_b, opts);
    return out;
}

std::pair<double, double> gaussian_integral_pl(const PLFunction& f, double sigma, int n_mc, Rng& rng) {
    if (n_mc < 1000) throw insufficient_sample_error("gaussian_integral_pl: need n_mc >= 1000");
    const int k = f.lattice().k();
    Vec z(k);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_mc; ++i) {
        for (int a = 0; a < k; ++a) z[a] = sigma * rng.normal();
        const double v = f(z);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n_mc;
    const double var = std::max(0.0, sum_sq / n_mc - mean * mean);
    return {mean, 4.0 * std::sqrt(var / n_mc)};
}

double gaussian_tail_mass(int k, double R, double sigma) {
    const double r = R / sigma;
    switch (k) {
        case 1: return 2.0 * std_normal_cdf(-r);
        case 2: return std::exp(-0.5 * r * r);
        case 3: return 2.0 * std_normal_cdf(-r) + std::sqrt(2.0 / M_PI) * r * std::exp(-0.5 * r * r);
        default: throw dimension_limit_error("gaussian_tail_mass: k <= 3 only");
    }
}

std::string BLCertificate::to_json() const {
    nlohmann::json j{{"value", value},
                     {"lower", lower},
                     {"upper", upper},
                     {"truncation_error", truncation_error},
                     {"pl_error", pl_error},
                     {"quadrature_error", quadrature_error}};
    return j.dump(2);
}

namespace {

// exact integral of the k=1 hat basis against the sigma-Gaussian:
// per-segment integral of the linear pieces
double segment_linear_gauss(double l, double u, double a, double h, double sigma) {
    // integral over [l, u] of ((z - a) / h) phi_sigma(z) dz
    const double Fl = std_normal_cdf(l / sigma), Fu = std_normal_cdf(u / sigma);
    const double fl = std_normal_pdf(l / sigma), fu = std_normal_pdf(u / sigma);
    return (sigma * (fl - fu) - a * (Fu - Fl)) / h;
}

} // namespace

BLCertificate bl_certified(const EmpiricalMeasure& mu, double sigma, double R, double eps_lattice,
                           double B_mu, int n_mc, Rng& rng) {
    const int k = mu.k();
    if (k > 3) throw dimension_limit_error("bl_certified: k <= 3 (lattice size guard)");
    if (B_mu < 0.0) throw std::invalid_argument("bl_certified: negative B_mu");
    if (sigma <= 0.0 || R <= 0.0 || eps_lattice <= 0.0)
        throw std::invalid_argument("bl_certified: need sigma, R, eps > 0");

    // the Chebyshev side of the truncation uses B_mu; verify it against mu
    double second_moment = 0.0;
    for (int i = 0; i < mu.n(); ++i) second_moment += mu.weights()[i] * norm2_sq(mu.point(i));
    if (second_moment / k > B_mu * (1.0 + 1e-9))
        throw std::invalid_argument("bl_certified: B_mu below mu's mean second moment per direction");

    auto lattice = std::make_shared<const SupplementedLattice>(build_lattice(k, eps_lattice, R));
    const int n_sites = lattice->n_sites();

    std::vector<int> node_of(n_sites, -1);
    std::vector<int> site_of;
    for (int s = 0; s < n_sites; ++s) {
        if (!lattice->pinned(s)) {
            node_of[s] = static_cast<int>(site_of.size());
            site_of.push_back(s);
        }
    }
    const int n_free = static_cast<int>(site_of.size());
    const int hub = n_free;

    // objective: c_s = mu-mass of the hat at s minus its Gaussian integral
    std::vector<double> c(n_free, 0.0);
    std::vector<std::pair<int, double>> bary;
    for (int i = 0; i < mu.n(); ++i) {
        if (!lattice->barycentric(mu.point(i), bary)) continue;
        for (const auto& [site, w] : bary)
            if (node_of[site] >= 0) c[node_of[site]] += mu.weights()[i] * w;
    }

    std::vector<double> gauss_draws; // k >= 2 only
    if (k == 1) {
        // exact hat integrals on the half-step grid
        for (int f = 0; f < n_free; ++f) {
            const int s = site_of[f];
            const double x = lattice->site(s)[0];
            const double h = eps_lattice / 2.0;
            c[f] -= segment_linear_gauss(x - h, x, x - h, h, sigma) +
                    segment_linear_gauss(x, x + h, x + h, -h, sigma);
        }
    } else {
        if (n_mc < 1000) throw insufficient_sample_error("bl_certified: need n_mc >= 1000");
        gauss_draws.resize(static_cast<std::size_t>(n_mc) * k);
        rng.fill_normal(gauss_draws);
        for (double& z : gauss_draws) z *= sigma;
        const double w_draw = 1.0 / n_mc;
        for (int i = 0; i < n_mc; ++i) {
            std::span<const double> z(gauss_draws.data() + static_cast<std::size_t>(i) * k,
                                      static_cast<std::size_t>(k));
            if (!lattice->barycentric(z, bary)) continue;
            for (const auto& [site, w] : bary)
                if (node_of[site] >= 0) c[node_of[site]] -= w_draw * w;
        }
    }

    // flow network for the norm-2 class
    const double beta = 2.0;
    std::vector<double> supply(n_free + 1, 0.0);
    double total = 0.0;
    for (int f = 0; f < n_free; ++f) {
        supply[f] = c[f];
        total += c[f];
    }
    supply[hub] = -total;

    std::vector<FlowArc> arcs;
    for (int f = 0; f < n_free; ++f) {
        const int s = site_of[f];
        for (int t : lattice->adjacency()[s]) {
            const double w = beta * dist(lattice->site(s), lattice->site(t));
            if (node_of[t] >= 0) {
                if (t > s) {
                    arcs.push_back({f, node_of[t], w});
                    arcs.push_back({node_of[t], f, w});
                }
            } else {
                arcs.push_back({f, hub, w});
                arcs.push_back({hub, f, w});
            }
        }
        arcs.push_back({f, hub, beta});
        arcs.push_back({hub, f, beta});
    }

    const FlowResult flow = min_cost_flow(n_free + 1, supply, arcs, hub);
    const double v2 = flow.cost;
    const double v1 = 0.5 * v2; // the feasible set scales linearly in the bound

    // scaled optimizer as a norm-1 candidate; its true Lipschitz constant
    // controls how much of v1 is an achievable lower bound
    Vec f1_values(n_sites, 0.0);
    for (int f = 0; f < n_free; ++f) {
        const double v = 0.5 * (flow.potentials[f] - flow.potentials[hub]);
        f1_values[site_of[f]] = std::clamp(v, -1.0, 1.0);
    }
    const PLFunction f1(lattice, std::move(f1_values), 1.0 + 1e-7);
    const double scale = std::max({1.0, f1.lipschitz_constant(), f1.sup_value()});

    double quad = 0.0;
    if (k >= 2) {
        // error bound for the Monte-Carlo integral of the norm-2 optimizer
        double sum = 0.0, sum_sq = 0.0;
        Vec z(k);
        for (int i = 0; i < n_mc; ++i) {
            std::copy_n(gauss_draws.data() + static_cast<std::size_t>(i) * k, k, z.begin());
            const double v = 2.0 * f1(z);
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / n_mc;
        quad = 4.0 * std::sqrt(std::max(0.0, sum_sq / n_mc - mean * mean) / n_mc);
    }

    // truncation: exact tail masses, capped by the Chebyshev form
    double mu_tail = 0.0;
    for (int i = 0; i < mu.n(); ++i)
        if (norm2(mu.point(i)) > R) mu_tail += mu.weights()[i];
    const double trunc =
        std::min(mu_tail + gaussian_tail_mass(k, R, sigma), 2.0 * k * std::max(B_mu, sigma * sigma) / (R * R));

    const double pl_err = 2.0 * beta * lattice->interp_radius();

    BLCertificate cert;
    cert.value = v2;
    cert.truncation_error = trunc;
    cert.pl_error = pl_err;
    cert.quadrature_error = quad;
    cert.upper = std::min(2.0, v2 + trunc + pl_err + 2.0 * quad);
    cert.lower = std::max(0.0, (v1 - 0.5 * quad) / scale);
    return cert;
}

WitnessBound witness_lower_bound(std::span<const double> points_flat, int k, double sigma, int n_mc,
                                 Rng& rng) {
    if (k < 1) throw invalid_dimension_error("witness_lower_bound: need k >= 1");
    if (points_flat.empty() || points_flat.size() % static_cast<std::size_t>(k) != 0)
        throw invalid_dimension_error("witness_lower_bound: bad point array");
    if (n_mc < 1000) throw insufficient_sample_error("witness_lower_bound: need n_mc >= 1000");

    const std::size_t n_pts = points_flat.size() / static_cast<std::size_t>(k);
    const int n_chunks = 64; // fixed so results do not depend on the thread count
    const std::uint64_t base = rng.raw();

    std::vector<double> sums(n_chunks, 0.0), sums_sq(n_chunks, 0.0);
    std::vector<int> counts(n_chunks, 0);
    parallel_for(n_chunks, [&](int chunk) {
        Rng r = derive_stream(base, {static_cast<std::uint64_t>(chunk)});
        const int lo = static_cast<int>(static_cast<long>(n_mc) * chunk / n_chunks);
        const int hi = static_cast<int>(static_cast<long>(n_mc) * (chunk + 1) / n_chunks);
        Vec z(k);
        double s = 0.0, s2 = 0.0;
        for (int i = lo; i < hi; ++i) {
            for (int a = 0; a < k; ++a) z[a] = sigma * r.normal();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < n_pts; ++p) {
                std::span<const double> q(points_flat.data() + p * k, static_cast<std::size_t>(k));
                best = std::min(best, dist_sq(z, q));
            }
            const double f = (best >= 1.0) ? 0.0 : 1.0 - std::sqrt(best);
            s += f;
            s2 += f * f;
        }
        sums[chunk] = s;
        sums_sq[chunk] = s2;
        counts[chunk] = hi - lo;
    });

    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    for (int i = 0; i < n_chunks; ++i) {
        sum += sums[i];
        sum_sq += sums_sq[i];
        n += counts[i];
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    const double err = 4.0 * std::sqrt(var / n);
    return {1.0 - mean - err, err};
}

} // namespace marginal_lab
