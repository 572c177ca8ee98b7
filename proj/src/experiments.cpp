#include "marginal_lab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "marginal_lab/bl_distance.hpp"
#include "marginal_lab/distributions.hpp"
#include "marginal_lab/errors.hpp"
#include "marginal_lab/io.hpp"
#include "marginal_lab/parallel.hpp"
#include "marginal_lab/stiefel.hpp"
#include "marginal_lab/version.hpp"

namespace marginal_lab {

namespace {

// stream tags: one namespace per random purpose
constexpr std::uint64_t kTagFrame = 1;
constexpr std::uint64_t kTagSample = 2;
constexpr std::uint64_t kTagGauss = 3;
constexpr std::uint64_t kTagSharpFrame = 4;
constexpr std::uint64_t kTagWitness = 5;

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TrialRecord run_trial(const VectorSource& source, int d, int k, int frame_index,
                      const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.d = d;
    rec.k = k;
    rec.frame_index = frame_index;

    Rng frame_rng = derive_stream(cfg.master_seed, {kTagFrame, static_cast<std::uint64_t>(d),
                                                    static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(frame_index)});
    const StiefelFrame frame = haar_sample(d, k, frame_rng);

    Rng x_rng = derive_stream(cfg.master_seed, {kTagSample, static_cast<std::uint64_t>(d),
                                                static_cast<std::uint64_t>(k),
                                                static_cast<std::uint64_t>(frame_index)});
    std::vector<double> projected(static_cast<std::size_t>(cfg.n_sample) * k);
    Vec x(d);
    for (int i = 0; i < cfg.n_sample; ++i) {
        source.sample_into(x_rng, x);
        const Vec p = project(frame, x);
        std::copy(p.begin(), p.end(), projected.begin() + static_cast<std::size_t>(i) * k);
    }
    const EmpiricalMeasure sample = EmpiricalMeasure::uniform(k, std::move(projected));

    Rng g_rng = derive_stream(cfg.master_seed, {kTagGauss, static_cast<std::uint64_t>(d),
                                                static_cast<std::uint64_t>(k),
                                                static_cast<std::uint64_t>(frame_index)});
    const BlEstimate est = bl_empirical_gaussian(sample, source.sigma(), cfg.m_gauss, g_rng);
    rec.estimate = est.estimate;
    rec.baseline = est.baseline;
    rec.corrected = est.corrected();
    rec.annealed_bound = annealed_bound(source.sigma(), d, k, source.A().value);
    rec.conditional_bound =
        conditional_bound(d, k, source.A().value, source.B().value, source.sigma(), cfg.constants).first;
    rec.wall_time = elapsed_seconds(start);
    return rec;
}

CellSummary summarize_cell(std::span<TrialRecord> records) {
    CellSummary s;
    const int n = static_cast<int>(records.size());
    s.d = records[0].d;
    s.k = records[0].k;
    double se = 0.0, sb = 0.0, sc = 0.0, sdiff = 0.0, sdiff2 = 0.0, sest2 = 0.0, scorr2 = 0.0;
    for (const auto& r : records) {
        se += r.estimate;
        sb += r.baseline;
        sc += r.corrected;
        const double diff = r.estimate - r.baseline;
        sdiff += diff;
        sdiff2 += diff * diff;
        sest2 += r.estimate * r.estimate;
        scorr2 += r.corrected * r.corrected;
    }
    s.mean_estimate = se / n;
    s.mean_baseline = sb / n;
    s.mean_corrected = sc / n;
    s.mean_diff = sdiff / n;
    const double var_diff = std::max(0.0, sdiff2 / n - s.mean_diff * s.mean_diff);
    s.sd_diff = std::sqrt(var_diff * n / std::max(1, n - 1));
    s.diff_std_error = s.sd_diff / std::sqrt(static_cast<double>(n));
    const double var_est = std::max(0.0, sest2 / n - s.mean_estimate * s.mean_estimate);
    s.sd_estimate = std::sqrt(var_est * n / std::max(1, n - 1));
    const double var_corr = std::max(0.0, scorr2 / n - s.mean_corrected * s.mean_corrected);
    s.sd_corrected = std::sqrt(var_corr * n / std::max(1, n - 1));
    for (auto& r : records) r.std_error = s.diff_std_error;
    return s;
}

void sort_records(std::vector<TrialRecord>& records) {
    std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.k != b.k) return a.k < b.k;
        return a.frame_index < b.frame_index;
    });
}

} // namespace

void ExperimentConfig::validate() const {
    if (d_list.empty() || k_list.empty()) throw std::invalid_argument("config: empty d_list or k_list");
    for (int d : d_list) {
        if (d < 2) throw std::invalid_argument("config: d must be >= 2");
        for (int k : k_list)
            if (k < 1 || k > d)
                throw std::invalid_argument("config: need 1 <= k <= d for every grid pair");
    }
    if (n_sample < 1 || m_gauss < 1 || n_frames < 1 || n_mc_witness < 1)
        throw std::invalid_argument("config: all counts must be >= 1");
    if (constants.c <= 0 || constants.C <= 0 || constants.L <= 0 || constants.c_prime <= 0)
        throw std::invalid_argument("config: constants must be positive");
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["distribution"] = distribution;
    j["d_list"] = d_list;
    j["k_list"] = k_list;
    j["n_sample"] = n_sample;
    j["m_gauss"] = m_gauss;
    j["n_frames"] = n_frames;
    j["n_mc_witness"] = n_mc_witness;
    j["master_seed"] = master_seed;
    j["constants"] = {{"c", constants.c}, {"C", constants.C}, {"L", constants.L}, {"c_prime", constants.c_prime}};
    j["output_path"] = output_path;
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    const std::vector<std::string> known{"distribution", "d_list",       "k_list",      "n_sample",
                                         "m_gauss",      "n_frames",     "n_mc_witness", "master_seed",
                                         "constants",    "output_path"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw std::invalid_argument("config: unknown field '" + it.key() + "'");
    }
    if (j.contains("distribution")) cfg.distribution = j.at("distribution").get<std::string>();
    if (j.contains("d_list")) cfg.d_list = j.at("d_list").get<std::vector<int>>();
    if (j.contains("k_list")) cfg.k_list = j.at("k_list").get<std::vector<int>>();
    if (j.contains("n_sample")) cfg.n_sample = j.at("n_sample").get<int>();
    if (j.contains("m_gauss")) cfg.m_gauss = j.at("m_gauss").get<int>();
    if (j.contains("n_frames")) cfg.n_frames = j.at("n_frames").get<int>();
    if (j.contains("n_mc_witness")) cfg.n_mc_witness = j.at("n_mc_witness").get<int>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("constants")) {
        const auto& c = j.at("constants");
        if (c.contains("c")) cfg.constants.c = c.at("c").get<double>();
        if (c.contains("C")) cfg.constants.C = c.at("C").get<double>();
        if (c.contains("L")) cfg.constants.L = c.at("L").get<double>();
        if (c.contains("c_prime")) cfg.constants.c_prime = c.at("c_prime").get<double>();
    }
    if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

ScalingResult run_scaling(const ExperimentConfig& cfg) {
    cfg.validate();
    ScalingResult result;
    for (int d : cfg.d_list) {
        const VectorSource source = make_source(cfg.distribution, d);
        for (int k : cfg.k_list) {
            std::vector<TrialRecord> cell(cfg.n_frames);
            parallel_for(cfg.n_frames, [&](int i) { cell[i] = run_trial(source, d, k, i, cfg); });
            result.cells.push_back(summarize_cell(cell));
            result.records.insert(result.records.end(), cell.begin(), cell.end());
        }
    }
    sort_records(result.records);
    return result;
}

ConcentrationResult run_concentration(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.d_list.size() != 1 || cfg.k_list.size() != 1)
        throw std::invalid_argument("run_concentration: single (d, k) cell required");
    if (cfg.n_frames < 30) throw std::invalid_argument("run_concentration: need n_frames >= 30");

    const int d = cfg.d_list[0], k = cfg.k_list[0];
    const VectorSource source = make_source(cfg.distribution, d);
    ConcentrationResult result;
    result.records.resize(cfg.n_frames);
    parallel_for(cfg.n_frames, [&](int i) { result.records[i] = run_trial(source, d, k, i, cfg); });
    result.summary.cell = summarize_cell(result.records);

    result.summary.eps_grid = {0.01, 0.02, 0.05, 0.1, 0.15, 0.2};
    const double mean = result.summary.cell.mean_estimate;
    for (double eps : result.summary.eps_grid) {
        int exceed = 0;
        for (const auto& r : result.records)
            if (std::abs(r.estimate - mean) > eps) ++exceed;
        result.summary.fraction_exceeding.push_back(static_cast<double>(exceed) / cfg.n_frames);
        result.summary.tail_bound.push_back(concentration_tail(d, source.B().value, eps, cfg.constants));
    }
    sort_records(result.records);
    return result;
}

SharpnessResult run_sharpness(const ExperimentConfig& cfg, std::span<const double> c_grid) {
    cfg.validate();
    if (cfg.distribution != "cross-polytope")
        throw std::invalid_argument("run_sharpness: distribution must be cross-polytope");
    static constexpr double kDefaultC[] = {1.0, 3.0};
    std::span<const double> cs = c_grid.empty() ? std::span<const double>(kDefaultC) : c_grid;

    SharpnessResult result;
    for (int d : cfg.d_list) {
        for (std::size_t ci = 0; ci < cs.size(); ++ci) {
            const double c = cs[ci];
            SharpnessRow row;
            row.d = d;
            row.c = c;
            row.k = std::max(1, static_cast<int>(std::lround(critical_k(d, c))));
            row.k = std::min(row.k, d);

            Rng frame_rng = derive_stream(cfg.master_seed, {kTagSharpFrame, static_cast<std::uint64_t>(d),
                                                            static_cast<std::uint64_t>(ci)});
            const StiefelFrame frame = haar_sample(d, row.k, frame_rng);

            // projected vertex set {+- sqrt(d) row_i}; rows of the frame matrix
            const double root_d = std::sqrt(static_cast<double>(d));
            std::vector<double> S(static_cast<std::size_t>(2 * d) * row.k);
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < row.k; ++j) {
                    const double v = root_d * frame.column(j)[i];
                    S[static_cast<std::size_t>(2 * i) * row.k + j] = v;
                    S[static_cast<std::size_t>(2 * i + 1) * row.k + j] = -v;
                }
            }

            // the witness integrates to one against the vertex measure
            {
                double total = 0.0;
                const std::size_t n_pts = static_cast<std::size_t>(2 * d);
                for (std::size_t p = 0; p < n_pts; ++p) {
                    std::span<const double> sp(S.data() + p * row.k, static_cast<std::size_t>(row.k));
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t q = 0; q < n_pts; ++q) {
                        std::span<const double> sq(S.data() + q * row.k, static_cast<std::size_t>(row.k));
                        best = std::min(best, dist_sq(sp, sq));
                    }
                    total += std::max(0.0, 1.0 - std::sqrt(best));
                }
                row.mu_integral = total / static_cast<double>(n_pts);
            }

            Rng w_rng = derive_stream(cfg.master_seed, {kTagWitness, static_cast<std::uint64_t>(d),
                                                        static_cast<std::uint64_t>(ci)});
            const WitnessBound wb = witness_lower_bound(S, row.k, 1.0, cfg.n_mc_witness, w_rng);
            row.witness_lb = wb.lower_bound;
            row.mc_error = wb.mc_error;
            row.gaussian_bound = sharpness_gaussian_bound(d, row.k);
            result.rows.push_back(row);
        }
    }
    return result;
}

void emit_records_csv(std::span<const TrialRecord> records, std::ostream& os) {
    os << "d,k,frame_index,estimate,baseline,corrected,std_error,annealed_bound,conditional_bound\n";
    for (const auto& r : records) {
        os << r.d << ',' << r.k << ',' << r.frame_index << ',' << format_double(r.estimate) << ','
           << format_double(r.baseline) << ',' << format_double(r.corrected) << ','
           << format_double(r.std_error) << ',' << format_double(r.annealed_bound) << ','
           << format_double(r.conditional_bound) << '\n';
    }
}

void emit_concentration_summary_csv(const ConcentrationSummary& summary, std::ostream& os) {
    os << "eps,fraction_exceeding,tail_bound\n";
    for (std::size_t i = 0; i < summary.eps_grid.size(); ++i) {
        os << format_double(summary.eps_grid[i]) << ',' << format_double(summary.fraction_exceeding[i])
           << ',' << format_double(summary.tail_bound[i]) << '\n';
    }
}

void emit_sharpness_csv(std::span<const SharpnessRow> rows, std::ostream& os) {
    os << "d,c,k,witness_lower_bound,mc_error,mu_integral,gaussian_bound\n";
    for (const auto& r : rows) {
        os << r.d << ',' << format_double(r.c) << ',' << r.k << ',' << format_double(r.witness_lb) << ','
           << format_double(r.mc_error) << ',' << format_double(r.mu_integral) << ','
           << format_double(r.gaussian_bound) << '\n';
    }
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace

std::vector<std::string> run_experiment_to_files(const std::string& kind, const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.output_path);
    const std::filesystem::path dir(cfg.output_path);
    std::vector<std::string> written;

    auto emit = [&](const std::string& name, auto writer) {
        const std::string path = (dir / name).string();
        std::ostringstream buf;
        writer(buf);
        write_file(path, buf.str());
        written.push_back(path);
    };

    if (kind == "scaling") {
        const ScalingResult r = run_scaling(cfg);
        emit("scaling.csv", [&](std::ostream& os) { emit_records_csv(r.records, os); });
    } else if (kind == "concentration") {
        const ConcentrationResult r = run_concentration(cfg);
        emit("concentration.csv", [&](std::ostream& os) { emit_records_csv(r.records, os); });
        emit("concentration_tails.csv",
             [&](std::ostream& os) { emit_concentration_summary_csv(r.summary, os); });
    } else if (kind == "sharpness") {
        const SharpnessResult r = run_sharpness(cfg);
        emit("sharpness.csv", [&](std::ostream& os) { emit_sharpness_csv(r.rows, os); });
    } else {
        throw std::invalid_argument("unknown experiment kind: " + kind);
    }

    nlohmann::json manifest;
    manifest["kind"] = kind;
    manifest["config"] = nlohmann::json::parse(cfg.to_json());
    manifest["version"] = kVersion;
    manifest["total_wall_seconds"] = elapsed_seconds(start);
    manifest["files"] = written;
    const std::string manifest_path = (dir / (kind + "_manifest.json")).string();
    write_file(manifest_path, manifest.dump(2) + "\n");
    written.push_back(manifest_path);
    return written;
}

} // namespace marginal_lab
