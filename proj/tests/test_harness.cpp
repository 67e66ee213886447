#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cran/harness.hpp"

using namespace cran;
using namespace cran::harness;

namespace {

ExperimentSpec tiny_spec() {
    ExperimentSpec spec;
    spec.base.num_users = 1;
    spec.base.num_rrh = 2;
    spec.base.num_antennas = 2;
    spec.base.gamma_db = 0.0;
    spec.sweep_param = "gamma_db";
    spec.sweep_values = {0.0, 5.0};
    spec.algorithms = {"full"};
    spec.trials = 2;
    spec.master_seed = 99;
    return spec;
}

}  // namespace

TEST_CASE("sweep application touches exactly the requested parameter") {
    SystemParams base;
    CHECK(apply_sweep(base, "gamma_db", 7.0).gamma_db == 7.0);
    CHECK(apply_sweep(base, "k", 5).num_users == 5);
    CHECK(apply_sweep(base, "n", 4).num_rrh == 4);
    CHECK(apply_sweep(base, "l", 8).num_antennas == 8);
    CHECK(apply_sweep(base, "gamma_ch", 0.1).gamma_ch == 0.1);
    CHECK(apply_sweep(base, "pt_watt", 2.5).pt_watt == 2.5);
    CHECK_THROWS_AS(apply_sweep(base, "bogus", 1.0), std::invalid_argument);
}

TEST_CASE("config parsing enforces the schema") {
    const std::string good = R"({
        "base": {"k": 2, "n": 2, "l": 1, "gamma_db": 0.0},
        "sweep_param": "gamma_db",
        "sweep_values": [0.0, 5.0],
        "algorithms": ["full", "ilr"],
        "trials": 3,
        "master_seed": 7,
        "output_path": "out.csv"
    })";
    const ExperimentSpec spec = parse_spec(good);
    CHECK(spec.base.num_users == 2);
    CHECK(spec.trials == 3);
    CHECK(spec.algorithms.size() == 2);

    CHECK_THROWS_AS(parse_spec(R"({"sweep_param": "gamma_db", "sweep_values": [1],
                                   "algorithms": ["full"], "bogus_key": 1})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_spec(R"({"base": {"bogus": 1}, "sweep_param": "gamma_db",
                                   "sweep_values": [1], "algorithms": ["full"]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_spec(R"({"base": {"k": 9, "n": 6}, "sweep_param": "gamma_db",
                                   "sweep_values": [1], "algorithms": ["es"]})"),
                    std::invalid_argument);  // enumeration guard
    CHECK_THROWS_AS(parse_spec(R"({"sweep_param": "gamma_db", "sweep_values": [],
                                   "algorithms": ["full"]})"),
                    std::invalid_argument);
}

TEST_CASE("experiment produces one ordered row per sweep value, trial, algorithm") {
    const ExperimentSpec spec = tiny_spec();
    const auto records = run_experiment(spec, {.jobs = 2});
    REQUIRE(records.size() == 4);
    CHECK(records[0].sweep_value == 0.0);
    CHECK(records[0].trial == 0);
    CHECK(records[1].trial == 1);
    CHECK(records[2].sweep_value == 5.0);
    for (const auto& rec : records) {
        CHECK(rec.feasible);
        CHECK(rec.algorithm == "full");
        // Bound sandwich on every feasible row.
        CHECK(rec.p_lower - 1e-6 <= rec.p_total);
        CHECK(rec.p_total <= rec.p_upper + 1e-6);
        CHECK(rec.sinr_min_ratio >= 1 - 1e-5);
    }

    std::ostringstream csv;
    write_csv(records, spec.sweep_param, csv);
    std::istringstream lines(csv.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 5);  // header + 4 rows
    CHECK(csv.str().rfind("sweep_param,sweep_value,trial,algorithm,feasible,p_total_w,"
                          "p_cp_w,p_rrh_w,p_lower_w,p_upper_w,sinr_min_ratio,convex_solves,"
                          "gradient_iters,wall_time_s\n",
                          0) == 0);
}

TEST_CASE("identical seeds give identical records apart from wall time") {
    const ExperimentSpec spec = tiny_spec();
    const auto a = run_experiment(spec, {.jobs = 2});
    const auto b = run_experiment(spec, {.jobs = 1});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].sweep_value == b[i].sweep_value);
        CHECK(a[i].trial == b[i].trial);
        CHECK(a[i].algorithm == b[i].algorithm);
        CHECK(a[i].p_total == b[i].p_total);
        CHECK(a[i].p_cp == b[i].p_cp);
        CHECK(a[i].p_lower == b[i].p_lower);
        CHECK(a[i].sinr_min_ratio == b[i].sinr_min_ratio);
        CHECK(a[i].convex_solves == b[i].convex_solves);
    }
}

TEST_CASE("all algorithms of a trial see the identical problem") {
    ExperimentSpec spec = tiny_spec();
    spec.algorithms = {"full", "ilr", "gsb"};
    spec.sweep_values = {5.0};
    const auto records = run_experiment(spec, {.jobs = 2, .debug_hash = true});
    REQUIRE(records.size() == 6);
    for (int trial = 0; trial < 2; ++trial) {
        const auto h0 = records[3 * trial].problem_hash;
        CHECK(h0 != 0);
        CHECK(records[3 * trial + 1].problem_hash == h0);
        CHECK(records[3 * trial + 2].problem_hash == h0);
    }
}

TEST_CASE("summaries aggregate matching a second pass and normalize run times") {
    const std::string csv_text =
        "sweep_param,sweep_value,trial,algorithm,feasible,p_total_w,p_cp_w,p_rrh_w,"
        "p_lower_w,p_upper_w,sinr_min_ratio,convex_solves,gradient_iters,wall_time_s\n"
        "gamma_db,5,0,alpha,1,10,6,4,8,20,1,3,0,2\n"
        "gamma_db,5,1,alpha,1,14,8,6,9,20,1,3,0,2\n"
        "gamma_db,5,0,beta,1,11,6,5,8,20,1,3,0,1\n"
        "gamma_db,5,1,beta,1,13,8,5,9,20,1,3,0,1\n";

    std::istringstream in(csv_text);
    const auto rows = summarize(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].algorithm == "alpha");
    CHECK(rows[0].mean_p_total == doctest::Approx(12.0));
    CHECK(rows[0].median_p_total == doctest::Approx(12.0));
    CHECK(rows[0].mean_p_lower == doctest::Approx(8.5));
    CHECK(rows[0].norm_wall_time == doctest::Approx(1.0));
    CHECK(rows[1].algorithm == "beta");
    CHECK(rows[1].mean_p_total == doctest::Approx(12.0));
    CHECK(rows[1].norm_wall_time == doctest::Approx(0.5));

    std::istringstream empty("header-only\n");
    CHECK_THROWS(summarize(empty));
}

TEST_CASE("summary of a real run matches an independent aggregation") {
    const ExperimentSpec spec = tiny_spec();
    const auto records = run_experiment(spec, {.jobs = 2});
    std::ostringstream csv;
    write_csv(records, spec.sweep_param, csv);
    std::istringstream in(csv.str());
    const auto rows = summarize(in);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        double acc = 0.0;
        int cnt = 0;
        for (const auto& rec : records) {
            if (rec.sweep_value == row.sweep_value) {
                acc += rec.p_total;
                ++cnt;
            }
        }
        CHECK(row.trials == cnt);
        CHECK(row.mean_p_total == doctest::Approx(acc / cnt).epsilon(1e-9));
        CHECK(row.norm_wall_time == doctest::Approx(1.0));  // single algorithm
    }
}

TEST_CASE("mean power grows with the user count") {
    ExperimentSpec spec;
    spec.base.num_users = 1;
    spec.base.num_rrh = 2;
    spec.base.num_antennas = 2;
    spec.base.gamma_db = 5.0;
    spec.sweep_param = "k";
    spec.sweep_values = {1.0, 2.0};
    spec.algorithms = {"full"};
    spec.trials = 40;
    spec.master_seed = 123;
    const auto records = run_experiment(spec, {.jobs = 2});
    double mean_k1 = 0.0, mean_k2 = 0.0;
    for (const auto& rec : records) {
        if (rec.sweep_value == 1.0) mean_k1 += rec.p_total / spec.trials;
        if (rec.sweep_value == 2.0) mean_k2 += rec.p_total / spec.trials;
    }
    CHECK(mean_k2 > mean_k1);
}
