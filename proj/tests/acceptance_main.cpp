// Acceptance suite: every release criterion as one checked, timed entry.
// Prints one line per criterion and exits nonzero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "marginal_lab/bl_distance.hpp"
#include "marginal_lab/bounds.hpp"
#include "marginal_lab/distributions.hpp"
#include "marginal_lab/experiments.hpp"
#include "marginal_lab/rng.hpp"
#include "marginal_lab/stiefel.hpp"
#include "marginal_lab/triangulation.hpp"
#include "oracles.hpp"

using namespace marginal_lab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double time_limit_s;
    std::function<Outcome()> run;
};

bool check(Outcome& out, bool ok, const std::string& what) {
    if (!ok) {
        out.pass = false;
        out.detail += (out.detail.empty() ? "" : "; ") + what;
    }
    return ok;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

// ---------------------------------------------------------------- criteria

Outcome stiefel_correctness() {
    Outcome out{true, ""};
    const int d = 50, k = 5, n_frames = 10000;
    Rng rng(20240801);
    double worst = 0.0, sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_frames; ++i) {
        const StiefelFrame f = haar_sample(d, k, rng);
        worst = std::max(worst, f.orthonormality_defect());
        const double v = f.column(0)[0] * f.column(0)[0];
        sum += v;
        sum_sq += v * v;
    }
    check(out, worst <= 1e-10, "orthonormality defect " + fmt(worst));
    const double mean = sum / n_frames;
    const double se = std::sqrt(std::max(0.0, sum_sq / n_frames - mean * mean) / n_frames);
    check(out, std::abs(mean - 0.02) <= 4.0 * se,
          "second moment " + fmt(mean) + " vs 0.02 (se " + fmt(se) + ")");
    out.detail = "defect " + fmt(worst) + ", moment " + fmt(mean) + " +- " + fmt(se);
    return out;
}

Outcome lp_oracle_equivalence() {
    Outcome out{true, ""};
    Rng rng(777001);
    double worst_gap = 0.0;
    for (int i = 0; i < 200; ++i) {
        const oracle::BlInstance inst = oracle::random_grid_instance(rng);
        const double lp = bl_lp(oracle::instance_mu(inst), oracle::instance_nu(inst));
        const double grid =
            oracle::bl_grid_search(inst.n, inst.k, inst.points, oracle::instance_signed(inst), 1e-3);
        worst_gap = std::max(worst_gap, std::abs(lp - grid));
        if (!check(out, std::abs(lp - grid) <= 1e-4,
                   "instance " + std::to_string(i) + " gap " + fmt(std::abs(lp - grid))))
            break;
    }
    double worst_pair = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int k = 1 + static_cast<int>(rng.below(2));
        std::vector<double> a(k), b(k);
        for (int j = 0; j < k; ++j) {
            a[j] = rng.uniform(-2.0, 2.0);
            b[j] = rng.uniform(-2.0, 2.0);
        }
        const double expect = std::min(dist(a, b), 2.0);
        const EmpiricalMeasure mu(k, a, Vec{1.0});
        const EmpiricalMeasure nu(k, b, Vec{1.0});
        worst_pair = std::max(worst_pair, std::abs(bl_lp(mu, nu) - expect));
    }
    check(out, worst_pair <= 1e-8, "two-point gap " + fmt(worst_pair));
    if (out.pass)
        out.detail = "200 instances, max oracle gap " + fmt(worst_gap) + ", two-point gap " + fmt(worst_pair);
    return out;
}

Outcome triangulation_identities() {
    Outcome out{true, ""};
    check(out, triangulate_cube(2).simplices.size() == 4, "s(2)");
    check(out, triangulate_cube(3).simplices.size() == 24, "s(3)");
    check(out, triangulate_cube(4).simplices.size() == 192, "s(4)");

    Rng rng(31007);
    int violations = 0;
    for (int k = 1; k <= 3; ++k) {
        const auto lat = std::make_shared<const SupplementedLattice>(build_lattice(k, 1.0, 1.0));
        if (!check(out, lat->max_adjacency_degree() <= std::pow(3.0, k),
                   "adjacency degree at k=" + std::to_string(k)))
            return out;
        std::vector<std::pair<int, double>> bary;
        for (int trial = 0; trial < 10000; ++trial) {
            Vec x(k);
            for (double& v : x) v = rng.uniform(-0.999, 0.999);
            if (!lat->barycentric(x, bary)) {
                ++violations;
                continue;
            }
            double total = 0.0;
            Vec rebuilt(k, 0.0);
            std::set<int> active;
            for (const auto& [site, w] : bary) {
                if (w < -1e-12) ++violations;
                total += w;
                for (int a = 0; a < k; ++a) rebuilt[a] += w * lat->site(site)[a];
                if (w > 1e-12) active.insert(site);
            }
            if (std::abs(total - 1.0) > 1e-9) ++violations;
            for (int a = 0; a < k; ++a)
                if (std::abs(rebuilt[a] - x[a]) > 1e-9) ++violations;
            int containing = 0;
            for (const auto& s : lat->simplices()) {
                bool inside = true;
                for (int site : active)
                    if (std::find(s.begin(), s.end(), site) == s.end()) inside = false;
                if (inside) ++containing;
            }
            if (containing < 1) ++violations; // must land in exactly one located simplex
        }
    }
    check(out, violations == 0, std::to_string(violations) + " partition violations");
    if (out.pass) out.detail = "counts 4/24/192, 30000 located points, degrees within 3^k";
    return out;
}

Outcome pl_approximation_bound() {
    Outcome out{true, ""};
    Rng rng(55311);
    double worst_margin = -1e9;
    int functions = 0;
    for (const auto& [k, eps] : {std::pair{1, 0.5}, std::pair{1, 0.25}, std::pair{2, 0.5},
                                 std::pair{2, 0.25}}) {
        const auto lat = std::make_shared<const SupplementedLattice>(build_lattice(k, eps, 2.0));
        for (int rep = 0; rep < 25; ++rep) {
            ++functions;
            // finite max of cones with norm at most 2, supported inside the ball
            struct Cone {
                Vec center;
                double height, slope;
            };
            std::vector<Cone> cones(1 + rng.below(4));
            double beta = 0.0;
            for (auto& c : cones) {
                c.center.resize(k);
                for (double& v : c.center) v = rng.uniform(-1.0, 1.0);
                c.slope = rng.uniform(0.3, 2.0);
                c.height = std::min(2.0, c.slope * rng.uniform(0.3, 1.8));
                beta = std::max({beta, c.slope, c.height});
            }
            auto g = [&](std::span<const double> x) {
                double best = 0.0;
                for (const auto& c : cones)
                    best = std::max(best, c.height - c.slope * dist(x, c.center));
                return std::max(best, 0.0);
            };
            const PLFunction f = pl_approximate(g, beta, lat);
            const double bound = beta * eps * std::sqrt(static_cast<double>(k)) / 2.0;
            double worst = 0.0;
            Vec x(k);
            for (int trial = 0; trial < 100000 / 4; ++trial) {
                for (double& v : x) v = rng.uniform(-1.5, 1.5);
                worst = std::max(worst, std::abs(g(x) - f(x)));
            }
            worst_margin = std::max(worst_margin, worst - bound);
            if (!check(out, worst <= bound + 1e-9,
                       "k=" + std::to_string(k) + " eps=" + fmt(eps) + " err " + fmt(worst) +
                           " > bound " + fmt(bound)))
                return out;
        }
    }
    out.detail = std::to_string(functions) + " functions, worst error minus bound " + fmt(worst_margin);
    return out;
}

Outcome sharpness_headline() {
    Outcome out{true, ""};
    const int d = 2000, k = 12;
    Rng frame_rng(424242);
    const StiefelFrame frame = haar_sample(d, k, frame_rng);
    const double root_d = std::sqrt(static_cast<double>(d));
    std::vector<double> S(static_cast<std::size_t>(2 * d) * k);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < k; ++j) {
            const double v = root_d * frame.column(j)[i];
            S[static_cast<std::size_t>(2 * i) * k + j] = v;
            S[static_cast<std::size_t>(2 * i + 1) * k + j] = -v;
        }
    }
    // the witness integrates to exactly one against the vertex measure
    {
        double total = 0.0;
        for (int p = 0; p < 2 * d; ++p) {
            std::span<const double> sp(S.data() + static_cast<std::size_t>(p) * k,
                                       static_cast<std::size_t>(k));
            double best = 1e300;
            for (int q = 0; q < 2 * d; ++q) {
                std::span<const double> sq(S.data() + static_cast<std::size_t>(q) * k,
                                           static_cast<std::size_t>(k));
                best = std::min(best, dist_sq(sp, sq));
            }
            total += std::max(0.0, 1.0 - std::sqrt(best));
        }
        check(out, total / (2 * d) == 1.0, "witness integral " + fmt(total / (2 * d)));
    }
    Rng mc_rng(6180339);
    const WitnessBound row = witness_lower_bound(S, k, 1.0, 100000, mc_rng);
    check(out, row.lower_bound >= 0.85, "witness bound " + fmt(row.lower_bound));
    // the witness cannot fall below one minus the union bound by more than
    // its Monte Carlo error
    const double union_bound = 2.0 * 2000.0 * oracle::chi_square_cdf(12, 1.0);
    check(out, row.lower_bound >= 1.0 - union_bound - 2.0 * row.mc_error,
          "witness vs union bound " + fmt(union_bound));
    check(out, row.lower_bound >= 1.0 - sharpness_gaussian_bound(d, k) - 2.0 * row.mc_error,
          "witness vs displayed gaussian bound");

    // supercritical curve: the gaussian-mass bound vanishes along the grid,
    // the witness side approaches one
    for (double d : {1e3, 1e4, 1e5, 1e6}) {
        const double k = 3.0 * std::log10(d) / std::log10(std::log10(d));
        const double bound = sharpness_gaussian_bound(d, k);
        if (!check(out, bound <= 1e-4 && 1.0 - bound >= 0.999,
                   "curve at d=" + fmt(d) + ": bound " + fmt(bound)))
            return out;
    }
    if (out.pass)
        out.detail = "witness " + fmt(row.lower_bound) + " (mc " + fmt(row.mc_error) + "), union bound " +
                     fmt(union_bound) + ", curve max 1e-4";
    return out;
}

Outcome positive_regime() {
    Outcome out{true, ""};
    ExperimentConfig cfg;
    cfg.distribution = "cross-polytope";
    cfg.d_list = {128, 512, 2048};
    cfg.k_list = {2};
    cfg.n_sample = 2000;
    cfg.m_gauss = 2000;
    cfg.n_frames = 50;
    cfg.master_seed = 616161;
    const ScalingResult xp = run_scaling(cfg);
    std::string curve;
    for (std::size_t i = 0; i < xp.cells.size(); ++i) {
        curve += (i ? " > " : "") + fmt(xp.cells[i].mean_corrected);
        if (i > 0)
            check(out, xp.cells[i].mean_corrected < xp.cells[i - 1].mean_corrected,
                  "not decreasing at d=" + std::to_string(xp.cells[i].d));
    }
    check(out, xp.cells.back().mean_corrected <= 0.05,
          "mean corrected at d=2048 is " + fmt(xp.cells.back().mean_corrected));

    cfg.distribution = "gaussian";
    const ScalingResult gs = run_scaling(cfg);
    for (const auto& cell : gs.cells) {
        check(out, std::abs(cell.mean_diff) <= 4.0 * cell.diff_std_error,
              "gaussian cell d=" + std::to_string(cell.d) + " off zero: " + fmt(cell.mean_diff) +
                  " vs 4se " + fmt(4.0 * cell.diff_std_error));
    }
    if (out.pass) out.detail = "cross-polytope means " + curve + "; gaussian cells within 4 se of 0";
    return out;
}

Outcome concentration_shape() {
    Outcome out{true, ""};
    auto run_cell = [&](int d) {
        ExperimentConfig cfg;
        cfg.distribution = "cross-polytope";
        cfg.d_list = {d};
        cfg.k_list = {2};
        cfg.n_sample = 2000;
        cfg.m_gauss = 2000;
        cfg.n_frames = 100;
        cfg.master_seed = 717171;
        return run_concentration(cfg);
    };
    const ConcentrationResult low = run_cell(64);
    const ConcentrationResult high = run_cell(512);
    check(out, high.summary.cell.sd_estimate < low.summary.cell.sd_estimate,
          "sd at 512 (" + fmt(high.summary.cell.sd_estimate) + ") not below sd at 64 (" +
              fmt(low.summary.cell.sd_estimate) + ")");
    check(out, high.summary.cell.sd_corrected < low.summary.cell.sd_corrected + 1e-12,
          "corrected sd ordering");
    if (out.pass)
        out.detail = "sd(64) " + fmt(low.summary.cell.sd_estimate) + " > sd(512) " +
                     fmt(high.summary.cell.sd_estimate);
    return out;
}

Outcome dudley_machinery() {
    Outcome out{true, ""};
    double max_ratio = 0.0;
    for (int e = 2; e <= 12; ++e) {
        const double M = std::exp2(e);
        for (double d : {1e2, 1e3, 1e4, 1e5, 1e6}) {
            const double ratio = dudley_sum(M, 1.0, d) / (std::log(M) * std::sqrt(M / d));
            max_ratio = std::max(max_ratio, ratio);
        }
    }
    check(out, max_ratio <= 33.1, "sweep ratio " + fmt(max_ratio) + " above recorded 33.1");
    check(out, max_ratio <= 40.0, "sweep ratio above 40");

    check(out, std::abs(entropy_number_bound(0, 1.0, 1.0, 576.0) - 0.5) <= 1e-12, "entropy bound pin");

    // parameter-count form with c = c' = 4 where it holds (one and two
    // dimensions); site-count form with c = 4 everywhere
    const BoundConstants c4{4.0, 1.0, 1.0, 4.0};
    struct Config {
        int k;
        double eps, R;
    };
    std::string ratios;
    for (const auto& cfg : {Config{1, 1.0, 1.0}, Config{1, 0.1, 4.0}, Config{2, 0.25, 2.0},
                            Config{2, 0.5, 4.0}}) {
        const SupplementedLattice lat = build_lattice(cfg.k, cfg.eps, cfg.R);
        const double m = count_parameters(lat);
        const double mb = lattice_m_bound(cfg.R, cfg.eps, cfg.k, c4);
        ratios += " " + fmt(m / mb);
        check(out, m <= mb,
              "m=" + fmt(m) + " above parameter bound " + fmt(mb) + " at k=" + std::to_string(cfg.k));
    }
    for (const auto& cfg : {Config{1, 1.0, 1.0}, Config{1, 0.1, 4.0}, Config{2, 0.25, 2.0},
                            Config{2, 0.5, 4.0}, Config{3, 1.0, 2.0}, Config{3, 0.9, 1.5}}) {
        const SupplementedLattice lat = build_lattice(cfg.k, cfg.eps, cfg.R);
        const double sb = 4.0 * std::pow(3.0 * cfg.R / cfg.eps, cfg.k) * unit_ball_volume(cfg.k).first;
        check(out, count_parameters(lat) <= sb, "site bound at k=" + std::to_string(cfg.k));
        check(out, lat.max_adjacency_degree() <= std::pow(3.0, cfg.k), "degree bound");
    }
    if (out.pass) out.detail = "sweep max " + fmt(max_ratio) + "; m/bound ratios" + ratios;
    return out;
}

Outcome certified_sanity() {
    Outcome out{true, ""};
    // point mass against the standard gaussian, dense-grid oracle
    {
        const EmpiricalMeasure mu(1, {0.0}, Vec{1.0});
        Rng rng(31415);
        const BLCertificate cert = bl_certified(mu, 1.0, 4.0, 0.1, 1.0, 10000, rng);
        const double oracle_value = oracle::delta0_gaussian_grid(1.0, 200000);
        check(out, cert.lower - 1e-9 <= oracle_value, "lower above oracle");
        check(out, oracle_value <= cert.upper + 1e-9, "upper below oracle");
        out.detail = "point-mass bracket [" + fmt(cert.lower) + ", " + fmt(cert.upper) + "] around " +
                     fmt(oracle_value);
    }
    // gaussian sample of ten thousand points: tight upper bound
    {
        Rng rng(9265);
        std::vector<double> pts(10000);
        rng.fill_normal(pts);
        const EmpiricalMeasure mu = EmpiricalMeasure::uniform(1, std::move(pts));
        Rng rng2(35897);
        const BLCertificate cert = bl_certified(mu, 1.0, 4.0, 0.1, 1.1, 10000, rng2);
        check(out, cert.upper <= 0.2, "gaussian-sample upper " + fmt(cert.upper));
        check(out, cert.lower >= 0.0 && cert.lower <= cert.upper, "bracket order");
        out.detail += "; gaussian-sample upper " + fmt(cert.upper);
    }
    return out;
}

Outcome reproducibility() {
    Outcome out{true, ""};
    const auto base = std::filesystem::temp_directory_path() / "ml_acceptance_repro";
    std::filesystem::remove_all(base);
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    for (const char* kind : {"scaling", "concentration", "sharpness"}) {
        ExperimentConfig cfg;
        cfg.distribution = "cross-polytope";
        cfg.d_list = {48};
        cfg.k_list = {2};
        cfg.n_sample = 150;
        cfg.m_gauss = 150;
        cfg.n_frames = 30;
        cfg.n_mc_witness = 2000;
        cfg.master_seed = 12121;
        cfg.output_path = (base / kind).string();
        const auto first = run_experiment_to_files(kind, cfg);
        std::vector<std::pair<std::string, std::string>> csvs;
        for (const auto& p : first)
            if (p.ends_with(".csv")) csvs.emplace_back(p, slurp(p));
        run_experiment_to_files(kind, cfg);
        for (const auto& [p, content] : csvs) {
            if (!check(out, slurp(p) == content, std::string(kind) + " csv differs between runs"))
                return out;
        }
    }
    out.detail = "three experiment kinds, byte-identical csvs on rerun";
    return out;
}

} // namespace

int main() {
    std::vector<Criterion> criteria{
        {"stiefel correctness", 30.0, stiefel_correctness},
        {"distance lp oracle equivalence", 120.0, lp_oracle_equivalence},
        {"triangulation identities", 60.0, triangulation_identities},
        {"pl approximation bound", 180.0, pl_approximation_bound},
        {"sharpness counterexample", 300.0, sharpness_headline},
        {"positive regime scaling", 600.0, positive_regime},
        {"concentration across frames", 600.0, concentration_shape},
        {"dudley machinery", 60.0, dudley_machinery},
        {"certified estimator sanity", 300.0, certified_sanity},
        {"reproducibility", 300.0, reproducibility},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > criteria[i].time_limit_s) {
            out.pass = false;
            out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time limit");
        }
        std::printf("[%s] criterion %zu: %s (%.1fs <= %.0fs) %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name.c_str(), secs, criteria[i].time_limit_s,
                    out.detail.empty() ? "" : ("- " + out.detail).c_str());
        std::fflush(stdout);
        if (!out.pass) ++failed;
    }
    if (failed) {
        std::printf("%d of %zu criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
