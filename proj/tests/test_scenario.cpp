#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cmte/errors.hpp"
#include "cmte/scenario.hpp"

using namespace cmte;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cmte_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(ExpandRange, InclusiveStop) {
    EXPECT_EQ(expand_range("3000:1000:4000"), (std::vector<double>{3000, 4000}));
    const auto l = expand_range("0:0.1:1");
    ASSERT_EQ(l.size(), 11u);
    EXPECT_EQ(l[3], 0.3);
    EXPECT_EQ(l.back(), 1.0);
    EXPECT_EQ(expand_range("0.6:0.1:0.9"), (std::vector<double>{0.6, 0.7, 0.8, 0.9}));
    EXPECT_THROW(expand_range("1:0:2"), ConfigError);
    EXPECT_THROW(expand_range("2:1:1"), ConfigError);
    EXPECT_THROW(expand_range("1:2"), ConfigError);
    EXPECT_THROW(expand_range("a:1:2"), ConfigError);
}

TEST(LoadScenario, RangesAndNestedBlocks) {
    const Scenario sc = load_scenario(R"({"alpha": 0.8, "lambda_grid": "0:0.5:1",
        "demand_grid": [3000, 4000], "theta_grid": 0.7,
        "bpr": {"beta": 0.2, "n": 5}, "solver": {"tol": 1e-5, "max_iter": 50}})");
    EXPECT_EQ(sc.alpha, 0.8);
    EXPECT_EQ(sc.lambda_grid, (std::vector<double>{0, 0.5, 1}));
    EXPECT_EQ(sc.theta_grid, (std::vector<double>{0.7}));
    EXPECT_EQ(sc.bpr.n, 5);
    EXPECT_EQ(sc.solver.max_iter, 50u);
}

TEST(LoadScenario, Rejections) {
    const std::string base = R"("demand_grid": [4000], "theta_grid": [0.8])";
    EXPECT_THROW(load_scenario("{\"lambda_grid\": [], " + base + "}"), ConfigError);
    EXPECT_THROW(load_scenario("{\"lambda_grid\": [1.5], " + base + "}"), ConfigError);
    EXPECT_THROW(load_scenario("{\"lambda_grid\": [0.5], \"demand_grid\": [4000], \"theta_grid\": [0]}"),
                 ConfigError);
    EXPECT_THROW(load_scenario("{\"lambda_grid\": [0.5], \"bogus\": 1, " + base + "}"), ConfigError);
    EXPECT_THROW(load_scenario("{\"lambda_grid\": [0.5], \"alpha\": 1, " + base + "}"), ConfigError);
    EXPECT_THROW(load_scenario("{not json"), ConfigError);
    EXPECT_THROW(load_scenario_file("/nonexistent/s.json"), IoError);
}

TEST(LoadScenario, BundledFilesMatchPresets) {
    for (const std::string& name : preset_names()) {
        const Scenario file = load_scenario_file(fs::path(CMTE_DATA_DIR) / (name + ".json"));
        const Scenario pre = preset_scenario(name);
        EXPECT_EQ(file.lambda_grid, pre.lambda_grid) << name;
        EXPECT_EQ(file.demand_grid, pre.demand_grid) << name;
        EXPECT_EQ(file.theta_grid, pre.theta_grid) << name;
        EXPECT_EQ(file.alpha, pre.alpha) << name;
    }
    EXPECT_THROW(preset_scenario("nope"), ConfigError);
}

TEST(RunScenario, ScenarioOneSingleRow) {
    const SweepResult res = run_scenario(standin_network(), preset_scenario("scenario1"));
    ASSERT_EQ(res.rows.size(), 1u);
    EXPECT_TRUE(res.rows[0].success) << res.rows[0].message;
    EXPECT_LE(res.rows[0].residual, 1e-4);
    EXPECT_GT(res.rows[0].antt, 0.0);
    EXPECT_NEAR(res.rows[0].antt, res.rows[0].antt_links, 1e-9 * res.rows[0].antt);
    EXPECT_EQ(res.route_labels.size(), 6u);
}

// ANTT at Scenario-1 parameters on the stand-in network, pinned from a verified
// solve; equilibrium link flows are unique, so this is stable to ~1e-3 min.
TEST(RunScenario, ScenarioOneGoldenAntt) {
    const SweepResult res = run_scenario(standin_network(), preset_scenario("scenario1"));
    EXPECT_NEAR(res.rows[0].antt, 184.657, 0.01);
}

TEST(RunScenario, ScenarioTwoRowCountAndOrder) {
    const SweepResult res = run_scenario(standin_network(), preset_scenario("scenario2"));
    ASSERT_EQ(res.rows.size(), 22u);
    EXPECT_EQ(res.rows[0].demand, 3000.0);
    EXPECT_EQ(res.rows[0].lambda, 0.0);
    EXPECT_EQ(res.rows[1].lambda, 0.1);
    EXPECT_EQ(res.rows[11].demand, 4000.0);
    EXPECT_TRUE(res.all_success());
    for (const SweepRow& r : res.rows) {
        EXPECT_TRUE(r.wardrop_pass);
        EXPECT_LE(r.wardrop_gap, 1e-3);
    }
}

TEST(RunScenario, ScenarioThreeRowCount) {
    Scenario sc = preset_scenario("scenario3");
    const SweepResult res = run_scenario(standin_network(), sc);
    EXPECT_EQ(res.rows.size(), 44u);
    EXPECT_TRUE(res.all_success());
}

TEST(RunScenario, ParallelMatchesSerial) {
    Scenario sc = preset_scenario("scenario2");
    sc.lambda_grid = {0.0, 0.5, 1.0};
    const SweepResult a = run_scenario(standin_network(), sc);
    const SweepResult b = serial::run_scenario(standin_network(), sc);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].flows, b.rows[i].flows);
        EXPECT_EQ(a.rows[i].antt, b.rows[i].antt);
        EXPECT_EQ(a.rows[i].residual_history, b.rows[i].residual_history);
    }
}

TEST(RunScenario, FailuresAreFlaggedNotDropped) {
    Scenario sc = preset_scenario("scenario1");
    sc.lambda_grid = {0.2, 0.5};
    sc.solver.max_iter = 3;
    const SweepResult res = run_scenario(standin_network(), sc);
    ASSERT_EQ(res.rows.size(), 2u);
    for (const SweepRow& r : res.rows) {
        EXPECT_FALSE(r.success);
        EXPECT_EQ(r.status, "max_iterations");
    }
    EXPECT_FALSE(res.all_success());
}

TEST(RunScenario, EmptyGridIsConfigError) {
    Scenario sc = preset_scenario("scenario1");
    sc.lambda_grid.clear();
    EXPECT_THROW(run_scenario(standin_network(), sc), ConfigError);
}

TEST(EmitResults, FilesSeriesAndDeterminism) {
    Scenario sc = preset_scenario("scenario2");
    sc.lambda_grid = {0.0, 0.5, 1.0};
    const fs::path d1 = scratch_dir("emit1"), d2 = scratch_dir("emit2");
    emit_results(run_scenario(standin_network(), sc), d1);
    emit_results(serial::run_scenario(standin_network(), sc), d2);
    for (const char* f : {"results.csv", "routes.csv", "antt_vs_lambda.csv",
                          "convergence/point_0000.csv", "convergence/point_0005.csv"}) {
        ASSERT_TRUE(fs::exists(d1 / f)) << f;
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    }
    std::istringstream series(slurp(d1 / "antt_vs_lambda.csv"));
    std::string line;
    std::getline(series, line);
    EXPECT_EQ(line, "series,demand,theta,lambda,antt,success");
    std::set<std::string> ids;
    int rows = 0;
    while (std::getline(series, line)) {
        ids.insert(line.substr(0, line.find(',')));
        ++rows;
    }
    EXPECT_EQ(ids.size(), 2u);
    EXPECT_EQ(rows, 6);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(EmitResults, UnwritableDestinationIsIoError) {
    const fs::path blocker = scratch_dir("blocker");
    { std::ofstream(blocker) << "x"; }
    Scenario sc = preset_scenario("scenario1");
    sc.solver.max_iter = 2;
    const SweepResult res = run_scenario(standin_network(), sc);
    try {
        emit_results(res, blocker / "out");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find(blocker.string()), std::string::npos);
    }
    fs::remove_all(blocker);
}
