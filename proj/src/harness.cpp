#include "cran/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cran/baselines.hpp"
#include "cran/bounds.hpp"
#include "cran/core.hpp"
#include "cran/scfa.hpp"

namespace cran::harness {

namespace {

const std::set<std::string> kSweepParams = {"gamma_db", "k", "n", "l", "gamma_ch", "pt_watt"};
const std::set<std::string> kAlgorithms = {"scfa", "ilr", "es", "mm", "sca", "gsb", "full"};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::uint64_t hash_problem(const DesignProblem& prob) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the channel bytes
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& hk : prob.h_hat) mix(hk.data(), hk.size() * sizeof(std::complex<double>));
    for (const auto& dk : prob.d_diag) mix(dk.data(), dk.size() * sizeof(double));
    return h;
}

}  // namespace

void ExperimentSpec::validate() const {
    base.validate();
    if (sweep_values.empty()) throw std::invalid_argument("sweep_values must be nonempty");
    if (!kSweepParams.count(sweep_param))
        throw std::invalid_argument("unknown sweep_param: " + sweep_param);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (algorithms.empty()) throw std::invalid_argument("algorithms must be nonempty");
    for (const auto& alg : algorithms) {
        if (!kAlgorithms.count(alg)) throw std::invalid_argument("unknown algorithm: " + alg);
    }
    for (double v : sweep_values) {
        const SystemParams p = apply_sweep(base, sweep_param, v);
        p.validate();
        if (std::find(algorithms.begin(), algorithms.end(), "es") != algorithms.end()) {
            if (link_matrix_count(p.num_users, p.num_rrh) > 1000000ULL) {
                std::ostringstream msg;
                msg << "es requested but (2^N-1)^K exceeds the enumeration guard at sweep value "
                    << v;
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

SystemParams apply_sweep(const SystemParams& base, const std::string& param, double value) {
    SystemParams p = base;
    if (param == "gamma_db") {
        p.gamma_db = value;
    } else if (param == "k") {
        p.num_users = static_cast<int>(value);
    } else if (param == "n") {
        p.num_rrh = static_cast<int>(value);
    } else if (param == "l") {
        p.num_antennas = static_cast<int>(value);
    } else if (param == "gamma_ch") {
        p.gamma_ch = value;
    } else if (param == "pt_watt") {
        p.pt_watt = value;
    } else {
        throw std::invalid_argument("unknown sweep_param: " + param);
    }
    return p;
}

ExperimentSpec parse_spec(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

    const std::set<std::string> top_keys = {"base",       "sweep_param", "sweep_values",
                                            "algorithms", "trials",      "master_seed",
                                            "output_path"};
    for (const auto& [key, _] : j.items()) {
        if (!top_keys.count(key)) throw std::invalid_argument("unknown config key: " + key);
    }

    ExperimentSpec spec;
    if (j.contains("base")) {
        const auto& jb = j.at("base");
        const std::map<std::string, double SystemParams::*> dfields = {
            {"gamma_db", &SystemParams::gamma_db},
            {"pt_watt", &SystemParams::pt_watt},
            {"gamma_ch", &SystemParams::gamma_ch},
            {"eps1", &SystemParams::eps1},
            {"eps2", &SystemParams::eps2},
            {"noise_dbm", &SystemParams::noise_dbm},
            {"cell_radius_km", &SystemParams::cell_radius_km},
            {"min_dist_km", &SystemParams::min_dist_km},
            {"pathloss_a", &SystemParams::pathloss_a},
            {"pathloss_b", &SystemParams::pathloss_b},
            {"shadow_std_db", &SystemParams::shadow_std_db}};
        const std::map<std::string, int SystemParams::*> ifields = {
            {"k", &SystemParams::num_users},
            {"n", &SystemParams::num_rrh},
            {"l", &SystemParams::num_antennas}};
        for (const auto& [key, val] : jb.items()) {
            if (auto it = dfields.find(key); it != dfields.end()) {
                spec.base.*(it->second) = val.get<double>();
            } else if (auto it2 = ifields.find(key); it2 != ifields.end()) {
                spec.base.*(it2->second) = val.get<int>();
            } else {
                throw std::invalid_argument("unknown base key: " + key);
            }
        }
    }
    spec.sweep_param = j.at("sweep_param").get<std::string>();
    spec.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    spec.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    if (j.contains("trials")) spec.trials = j.at("trials").get<int>();
    if (j.contains("master_seed")) spec.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("output_path")) spec.output_path = j.at("output_path").get<std::string>();
    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

namespace {

SolveReport dispatch(const std::string& alg, const DesignProblem& prob, bool trace,
                     scfa::Trace* trace_out) {
    if (alg == "scfa") {
        scfa::Config cfg;
        return scfa::run(prob, cfg, trace ? trace_out : nullptr);
    }
    if (alg == "ilr") return baselines::run_ilr(prob);
    if (alg == "es") return baselines::run_es(prob);
    if (alg == "mm") return baselines::run_mm(prob);
    if (alg == "sca") return baselines::run_sca(prob);
    if (alg == "gsb") return baselines::run_gsb(prob);
    if (alg == "full") return baselines::run_full_cooperation(prob);
    throw std::invalid_argument("unknown algorithm: " + alg);
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
    spec.validate();
    const int num_points = static_cast<int>(spec.sweep_values.size());
    const int total_tasks = num_points * spec.trials;
    std::vector<std::vector<TrialRecord>> per_task(total_tasks);

    std::ofstream trace_out;
    if (opts.trace) trace_out.open(spec.output_path + ".trace.csv");
    if (opts.trace) trace_out << "sweep_value,trial,iter,q,a,step,grad_norm\n";
    std::mutex trace_mutex;

    std::atomic<int> next_task{0};
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            const int task = next_task.fetch_add(1);
            if (task >= total_tasks || failed.load()) break;
            const int si = task / spec.trials;
            const int trial = task % spec.trials;
            try {
                const SystemParams params =
                    apply_sweep(spec.base, spec.sweep_param, spec.sweep_values[si]);
                Rng rng = make_trial_rng(spec.master_seed, si, trial);
                FeasibleDraw draw =
                    sample_feasible_problem(params, rng, opts.feasibility_attempts);
                const BoundReport bounds = power_bounds(draw.problem);
                const std::uint64_t phash =
                    opts.debug_hash ? hash_problem(draw.problem) : 0;

                std::vector<TrialRecord>& records = per_task[task];
                for (const std::string& alg : spec.algorithms) {
                    scfa::Trace tr;
                    SolveReport rep = dispatch(alg, draw.problem, opts.trace, &tr);
                    TrialRecord rec;
                    rec.sweep_index = si;
                    rec.sweep_value = spec.sweep_values[si];
                    rec.trial = trial;
                    rec.algorithm = alg;
                    rec.feasible = rep.feasible;
                    rec.p_total = rep.p_total;
                    rec.p_cp = rep.p_cp;
                    rec.p_rrh = rep.p_rrh;
                    rec.p_lower = bounds.p_lower;
                    rec.p_upper = bounds.p_upper;
                    if (rep.feasible && rep.sinr.size() > 0) {
                        rec.sinr_min_ratio =
                            (rep.sinr.array() / draw.problem.gamma.array()).minCoeff();
                    }
                    rec.convex_solves = rep.convex_solves;
                    rec.gradient_iters = rep.gradient_iters;
                    rec.wall_time_s = rep.wall_time_s;
                    rec.problem_hash = phash;
                    records.push_back(std::move(rec));
                    if (opts.trace && alg == "scfa") {
                        std::lock_guard<std::mutex> lock(trace_mutex);
                        for (std::size_t i = 0; i < tr.q.size(); ++i) {
                            trace_out << format_double(spec.sweep_values[si]) << ',' << trial
                                      << ',' << (i + 1) << ',' << format_double(tr.q[i]) << ','
                                      << format_double(tr.a[i]) << ','
                                      << format_double(tr.step[i]) << ','
                                      << format_double(tr.grad_norm[i]) << '\n';
                        }
                    }
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure_message = e.what();
                failed.store(true);
            }
        }
    };

    int jobs = opts.jobs > 0 ? opts.jobs
                             : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, total_tasks));
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("experiment failed: " + failure_message);

    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(total_tasks) * spec.algorithms.size());
    for (auto& task_records : per_task) {
        for (auto& rec : task_records) records.push_back(std::move(rec));
    }
    std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        if (a.sweep_index != b.sweep_index) return a.sweep_index < b.sweep_index;
        if (a.trial != b.trial) return a.trial < b.trial;
        return a.algorithm < b.algorithm;
    });
    return records;
}

void write_csv(const std::vector<TrialRecord>& records, const std::string& sweep_param,
               std::ostream& out, bool debug_hash) {
    out << "sweep_param,sweep_value,trial,algorithm,feasible,p_total_w,p_cp_w,p_rrh_w,"
           "p_lower_w,p_upper_w,sinr_min_ratio,convex_solves,gradient_iters,wall_time_s";
    if (debug_hash) out << ",problem_hash";
    out << '\n';
    for (const TrialRecord& r : records) {
        out << sweep_param << ',' << format_double(r.sweep_value) << ',' << r.trial << ','
            << r.algorithm << ',' << (r.feasible ? 1 : 0) << ',' << format_double(r.p_total)
            << ',' << format_double(r.p_cp) << ',' << format_double(r.p_rrh) << ','
            << format_double(r.p_lower) << ',' << format_double(r.p_upper) << ','
            << format_double(r.sinr_min_ratio) << ',' << r.convex_solves << ','
            << r.gradient_iters << ',' << format_double(r.wall_time_s);
        if (debug_hash) out << ',' << r.problem_hash;
        out << '\n';
    }
}

void run_experiment_to_file(const ExperimentSpec& spec, const RunOptions& opts) {
    const std::vector<TrialRecord> records = run_experiment(spec, opts);
    std::ofstream out(spec.output_path);
    if (!out) throw std::runtime_error("cannot open output file: " + spec.output_path);
    write_csv(records, spec.sweep_param, out, opts.debug_hash);
}

std::vector<SummaryRow> summarize(std::istream& csv) {
    std::string header;
    if (!std::getline(csv, header)) throw std::runtime_error("empty results file");

    struct Acc {
        std::vector<double> p_totals;
        double p_cp = 0, p_rrh = 0, p_lower = 0, p_upper = 0, wall = 0;
        int n = 0, feasible = 0;
    };
    std::map<std::pair<double, std::string>, Acc> groups;

    std::string line;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 14) throw std::runtime_error("malformed results row: " + line);
        const double sweep_value = std::stod(fields[1]);
        const std::string alg = fields[3];
        const bool feasible = fields[4] == "1";
        Acc& acc = groups[{sweep_value, alg}];
        acc.n += 1;
        acc.wall += std::stod(fields[13]);
        if (feasible) {
            acc.feasible += 1;
            acc.p_totals.push_back(std::stod(fields[5]));
            acc.p_cp += std::stod(fields[6]);
            acc.p_rrh += std::stod(fields[7]);
            acc.p_lower += std::stod(fields[8]);
            acc.p_upper += std::stod(fields[9]);
        }
    }
    if (groups.empty()) throw std::runtime_error("no data rows in results file");

    std::vector<SummaryRow> rows;
    for (auto& [key, acc] : groups) {
        SummaryRow row;
        row.sweep_value = key.first;
        row.algorithm = key.second;
        row.trials = acc.n;
        row.feasible = acc.feasible;
        if (acc.feasible > 0) {
            std::sort(acc.p_totals.begin(), acc.p_totals.end());
            const int f = acc.feasible;
            row.mean_p_total =
                std::accumulate(acc.p_totals.begin(), acc.p_totals.end(), 0.0) / f;
            row.median_p_total = (f % 2 == 1)
                                     ? acc.p_totals[f / 2]
                                     : 0.5 * (acc.p_totals[f / 2 - 1] + acc.p_totals[f / 2]);
            row.mean_p_cp = acc.p_cp / f;
            row.mean_p_rrh = acc.p_rrh / f;
            row.mean_p_lower = acc.p_lower / f;
            row.mean_p_upper = acc.p_upper / f;
        }
        row.mean_wall_time_s = acc.wall / acc.n;
        rows.push_back(std::move(row));
    }
    // Normalize wall times within each sweep point.
    std::map<double, double> max_wall;
    for (const auto& row : rows) {
        max_wall[row.sweep_value] = std::max(max_wall[row.sweep_value], row.mean_wall_time_s);
    }
    for (auto& row : rows) {
        const double mx = max_wall[row.sweep_value];
        row.norm_wall_time = mx > 0 ? row.mean_wall_time_s / mx : 0.0;
    }
    return rows;
}

std::vector<SummaryRow> summarize_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path);
    return summarize(in);
}

void write_summary(const std::vector<SummaryRow>& rows, std::ostream& out) {
    out << "sweep_value,algorithm,trials,feasible,mean_p_total_w,median_p_total_w,mean_p_cp_w,"
           "mean_p_rrh_w,mean_p_lower_w,mean_p_upper_w,mean_wall_time_s,norm_wall_time\n";
    for (const SummaryRow& r : rows) {
        out << format_double(r.sweep_value) << ',' << r.algorithm << ',' << r.trials << ','
            << r.feasible << ',' << format_double(r.mean_p_total) << ','
            << format_double(r.median_p_total) << ',' << format_double(r.mean_p_cp) << ','
            << format_double(r.mean_p_rrh) << ',' << format_double(r.mean_p_lower) << ','
            << format_double(r.mean_p_upper) << ',' << format_double(r.mean_wall_time_s) << ','
            << format_double(r.norm_wall_time) << '\n';
    }
}

}  // namespace cran::harness
