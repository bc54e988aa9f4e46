#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cmte/equilibrium.hpp"
#include "cmte/network.hpp"
#include "cmte/stochastic_bpr.hpp"

namespace cmte {

struct Scenario {
    std::string name = "custom";
    double alpha = 0.9;
    std::vector<double> lambda_grid;
    std::vector<double> demand_grid;  // total demand Q, pcu/h
    std::vector<double> theta_grid;   // applied to every link
    BprParams bpr{};
    SolverConfig solver{};
    std::size_t max_routes_per_od = 1000;
    std::size_t max_hops = 64;
};

/// Throws ConfigError on an empty grid or any value outside its domain.
void validate(const Scenario& sc);

/// "start:step:stop", inclusive of stop up to rounding. Throws ConfigError.
std::vector<double> expand_range(std::string_view text);

/// JSON document with the Scenario fields; grids may be arrays or range strings.
Scenario load_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// scenario1, scenario2, scenario2_extended, scenario3. Throws ConfigError.
Scenario preset_scenario(std::string_view name);
std::vector<std::string> preset_names();

struct SweepRow {
    std::size_t point = 0;
    double lambda = 0.0;
    double demand = 0.0;
    double theta = 0.0;
    bool success = false;
    std::string status;
    std::string message;
    std::size_t iterations = 0;
    double residual = 0.0;
    double demand_residual = 0.0;
    double wardrop_gap = 0.0;
    bool wardrop_pass = false;
    double antt = 0.0;
    double antt_links = 0.0;  // same quantity from link totals
    std::vector<double> flows;
    std::vector<double> psi;
    std::vector<double> residual_history;
    std::vector<double> antt_history;
    std::vector<double> step_history;
};

struct SweepResult {
    Scenario scenario;
    std::vector<std::string> route_labels;  // link ids joined by '-'
    std::vector<SweepRow> rows;             // lambda fastest, then theta, then demand

    bool all_success() const;
};

/// Cartesian sweep. Points run in parallel; row order is fixed by the grid.
/// Per-point solver failures are recorded in the row; config errors throw
/// before any solve.
SweepResult run_scenario(const Network& net, const Scenario& sc);

namespace serial {
SweepResult run_scenario(const Network& net, const Scenario& sc);
}

/// Writes results.csv, routes.csv, antt_vs_lambda.csv and
/// convergence/point_NNNN.csv under `dest`. Throws IoError with the path.
void emit_results(const SweepResult& res, const std::filesystem::path& dest);

}  // namespace cmte
