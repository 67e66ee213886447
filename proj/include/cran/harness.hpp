#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cran/model.hpp"

namespace cran::harness {

// One Monte-Carlo campaign: a base configuration, one swept parameter, the
// algorithms to run on each trial, and deterministic seeding.
struct ExperimentSpec {
    SystemParams base;
    std::string sweep_param;            // gamma_db | K | N | L | gamma_ch | pt_watt
    std::vector<double> sweep_values;
    std::vector<std::string> algorithms;  // scfa ilr es mm sca gsb full
    int trials = 1;
    std::uint64_t master_seed = 1;
    std::string output_path = "results.csv";

    void validate() const;  // throws std::invalid_argument
};

// Parses the JSON config object; unknown keys are rejected.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::string& path);

struct TrialRecord {
    int sweep_index = 0;
    double sweep_value = 0.0;
    int trial = 0;
    std::string algorithm;
    bool feasible = false;
    double p_total = 0.0;
    double p_cp = 0.0;
    double p_rrh = 0.0;
    double p_lower = 0.0;
    double p_upper = 0.0;
    double sinr_min_ratio = 0.0;
    int convex_solves = 0;
    int gradient_iters = 0;
    double wall_time_s = 0.0;
    std::uint64_t problem_hash = 0;
};

struct RunOptions {
    int jobs = 0;             // 0: hardware concurrency
    bool trace = false;       // dump gradient-descent traces alongside the CSV
    bool debug_hash = false;  // append a problem-hash column
    int feasibility_attempts = 2000;
};

// Applies one sweep value to the base parameters.
SystemParams apply_sweep(const SystemParams& base, const std::string& param, double value);

// Runs the full campaign and returns the records in deterministic order
// (sweep index, trial, algorithm name).
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const RunOptions& opts = {});

void write_csv(const std::vector<TrialRecord>& records, const std::string& sweep_param,
               std::ostream& out, bool debug_hash = false);

// Convenience: run and write to spec.output_path.
void run_experiment_to_file(const ExperimentSpec& spec, const RunOptions& opts = {});

struct SummaryRow {
    double sweep_value = 0.0;
    std::string algorithm;
    int trials = 0;
    int feasible = 0;
    double mean_p_total = 0.0;
    double median_p_total = 0.0;
    double mean_p_cp = 0.0;
    double mean_p_rrh = 0.0;
    double mean_p_lower = 0.0;
    double mean_p_upper = 0.0;
    double mean_wall_time_s = 0.0;
    double norm_wall_time = 0.0;  // mean wall time / max mean over algorithms
};

// Aggregates a results CSV per (sweep value, algorithm). Wall times are
// normalized per sweep point so the slowest algorithm reads 1.
std::vector<SummaryRow> summarize(std::istream& csv);
std::vector<SummaryRow> summarize_file(const std::string& path);
void write_summary(const std::vector<SummaryRow>& rows, std::ostream& out);

}  // namespace cran::harness
