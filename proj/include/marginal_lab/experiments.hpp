#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "marginal_lab/bounds.hpp"

namespace marginal_lab {

struct ExperimentConfig {
    std::string distribution = "cross-polytope";
    std::vector<int> d_list;
    std::vector<int> k_list;
    int n_sample = 2000;
    int m_gauss = 2000;
    int n_frames = 100;
    int n_mc_witness = 100000;
    std::uint64_t master_seed = 0;
    BoundConstants constants;
    std::string output_path = ".";

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
};

struct TrialRecord {
    int d = 0;
    int k = 0;
    int frame_index = 0;
    double estimate = 0.0;
    double baseline = 0.0;
    double corrected = 0.0;
    double std_error = 0.0;        // standard error of the cell's mean signed gap
    double annealed_bound = 0.0;
    double conditional_bound = 0.0;
    double wall_time = 0.0;        // seconds; reported in the manifest, not the CSV
};

struct CellSummary {
    int d = 0;
    int k = 0;
    double mean_estimate = 0.0;
    double mean_baseline = 0.0;
    double mean_corrected = 0.0;
    double mean_diff = 0.0; // mean (estimate - baseline), sign kept
    double sd_diff = 0.0;
    double diff_std_error = 0.0;
    double sd_estimate = 0.0;
    double sd_corrected = 0.0;
};

struct ScalingResult {
    std::vector<TrialRecord> records;
    std::vector<CellSummary> cells;
};

struct ConcentrationSummary {
    CellSummary cell;
    std::vector<double> eps_grid;
    std::vector<double> fraction_exceeding; // |estimate - mean| > eps over frames
    std::vector<double> tail_bound;
};

struct ConcentrationResult {
    std::vector<TrialRecord> records;
    ConcentrationSummary summary;
};

struct SharpnessRow {
    int d = 0;
    double c = 0.0;
    int k = 0;
    double witness_lb = 0.0;
    double mc_error = 0.0;
    double mu_integral = 0.0;     // witness integral against the projected vertices
    double gaussian_bound = 0.0;
};

struct SharpnessResult {
    std::vector<SharpnessRow> rows;
};

// Per-(d, k) cell: n_frames Haar frames, one projected sample and Gaussian
// comparison per frame, baseline-corrected distances. Trials run in
// parallel; per-trial streams derive from (master_seed, d, k, frame).
ScalingResult run_scaling(const ExperimentConfig& config);

// Single-cell version reporting the distance fluctuation across frames
// against the concentration tail values.
ConcentrationResult run_concentration(const ExperimentConfig& config);

// Witness lower bounds for projected cross-polytope vertices at
// k = round(critical_k(d, c)), one Haar frame per (d, c).
SharpnessResult run_sharpness(const ExperimentConfig& config, std::span<const double> c_grid = {});

void emit_records_csv(std::span<const TrialRecord> records, std::ostream& os);
void emit_concentration_summary_csv(const ConcentrationSummary& summary, std::ostream& os);
void emit_sharpness_csv(std::span<const SharpnessRow> rows, std::ostream& os);

// Runs one experiment and writes its CSVs plus a run manifest into
// config.output_path. Returns the paths written.
std::vector<std::string> run_experiment_to_files(const std::string& kind, const ExperimentConfig& config);

} // namespace marginal_lab
