// Command-line front end: `run` executes a Monte-Carlo experiment from a
// JSON config, `summarize` aggregates a results CSV.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cran/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Downlink C-RAN beamformer design experiments"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run an experiment from a JSON config");
    std::string config_path;
    std::string out_override;
    std::string algorithms_override;
    std::int64_t seed_override = -1;
    int trials_override = 0;
    int jobs = 0;
    bool trace = false;
    bool debug_hash = false;
    run_cmd->add_option("--config", config_path, "JSON experiment config")->required();
    run_cmd->add_option("--seed", seed_override, "override master_seed");
    run_cmd->add_option("--trials", trials_override, "override trial count");
    run_cmd->add_option("--out", out_override, "override output CSV path");
    run_cmd->add_option("--algorithms", algorithms_override,
                        "comma-separated override of the algorithm list");
    run_cmd->add_option("--jobs", jobs, "worker threads (default: hardware concurrency)");
    run_cmd->add_flag("--trace", trace, "dump gradient-descent traces next to the CSV");
    run_cmd->add_flag("--debug-hash", debug_hash, "append a problem_hash column");

    auto* sum_cmd = app.add_subcommand("summarize", "aggregate a results CSV");
    std::string in_path;
    sum_cmd->add_option("--in", in_path, "results CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            cran::harness::ExperimentSpec spec;
            try {
                spec = cran::harness::load_spec(config_path);
                if (seed_override >= 0) spec.master_seed = static_cast<std::uint64_t>(seed_override);
                if (trials_override > 0) spec.trials = trials_override;
                if (!out_override.empty()) spec.output_path = out_override;
                if (!algorithms_override.empty()) {
                    spec.algorithms.clear();
                    std::stringstream ss(algorithms_override);
                    std::string alg;
                    while (std::getline(ss, alg, ',')) spec.algorithms.push_back(alg);
                }
                spec.validate();
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 1;
            }
            cran::harness::RunOptions opts;
            opts.jobs = jobs;
            opts.trace = trace;
            opts.debug_hash = debug_hash;
            cran::harness::run_experiment_to_file(spec, opts);
            std::cout << "wrote " << spec.output_path << "\n";
        } else if (*sum_cmd) {
            const auto rows = cran::harness::summarize_file(in_path);
            cran::harness::write_summary(rows, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
