#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cmte/errors.hpp"
#include "cmte/mc_oracle.hpp"
#include "cmte/network.hpp"
#include "cmte/scenario.hpp"
#include "cmte/text_format.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kNoConvergence = 2;
constexpr int kIo = 3;

struct Common {
    std::string network;
    std::string scenario;
    std::string preset;
    std::string out;
    std::uint64_t seed = 20121129;
    std::optional<std::size_t> max_iter;
    std::optional<double> tol;
};

cmte::Network load_net(const Common& c) {
    if (c.network.empty()) return cmte::standin_network();
    return cmte::load_network_file(c.network);
}

cmte::Scenario load_sc(const Common& c, const char* fallback) {
    cmte::Scenario sc;
    if (!c.scenario.empty()) sc = cmte::load_scenario_file(c.scenario);
    else sc = cmte::preset_scenario(c.preset.empty() ? fallback : c.preset);
    if (c.max_iter) sc.solver.max_iter = *c.max_iter;
    if (c.tol) sc.solver.tol = *c.tol;
    cmte::validate(sc);
    return sc;
}

void print_rows(const cmte::SweepResult& res) {
    std::printf("%6s %7s %8s %6s %10s %6s %11s %11s %s\n", "point", "lambda", "demand", "theta",
                "antt", "iter", "residual", "gap", "status");
    for (const cmte::SweepRow& r : res.rows) {
        std::printf("%6zu %7.3f %8.1f %6.3f %10.4f %6zu %11.3e %11.3e %s%s%s\n", r.point, r.lambda,
                    r.demand, r.theta, r.antt, r.iterations, r.residual, r.wardrop_gap,
                    r.success ? "ok" : "FAILED", r.message.empty() ? "" : ": ", r.message.c_str());
    }
}

int cmd_sweep(const Common& c, const char* fallback, bool single) {
    const cmte::Network net = load_net(c);
    cmte::Scenario sc = load_sc(c, fallback);
    if (single) {
        sc.lambda_grid.resize(1);
        sc.demand_grid.resize(1);
        sc.theta_grid.resize(1);
    }
    const cmte::SweepResult res = cmte::run_scenario(net, sc);
    print_rows(res);
    if (!c.out.empty()) cmte::emit_results(res, c.out);
    return res.all_success() ? kOk : kNoConvergence;
}

int cmd_verify(const Common& c) {
    cmte::OracleSuiteConfig cfg;
    cfg.link.seed = c.seed;
    cfg.tail.seed = c.seed;
    const auto rows = cmte::run_oracle_suite(cfg);
    cmte::write_oracle_report(std::cout, rows, cfg);
    if (!c.out.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(c.out, ec);
        if (ec) throw cmte::IoError("cannot create " + c.out + ": " + ec.message());
        const auto p = std::filesystem::path(c.out) / "oracle.csv";
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        if (!os) throw cmte::IoError("cannot open " + p.string() + " for writing");
        cmte::write_oracle_report(os, rows, cfg);
        if (!os) throw cmte::IoError("write failed for " + p.string());
    }
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.pass ? 0 : 1;
    std::fprintf(stderr, "%zu of %zu claims passed\n", rows.size() - failed, rows.size());
    return failed == 0 ? kOk : kNoConvergence;
}

int cmd_routes(const Common& c) {
    const cmte::Network net = load_net(c);
    cmte::Scenario sc;
    if (!c.scenario.empty()) sc = cmte::load_scenario_file(c.scenario);
    const cmte::RouteSet rs = cmte::build_routes(net, sc.max_routes_per_od, sc.max_hops);
    std::cout << "route,origin,destination,free_flow_time,links\n";
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const cmte::Route& r = rs.route(k);
        const cmte::OdPair& od = net.od_pairs()[r.od];
        std::cout << k + 1 << ',' << od.origin << ',' << od.destination << ','
                  << cmte::format_number(cmte::free_flow_time(net, r)) << ',';
        for (std::size_t i = 0; i < r.links.size(); ++i)
            std::cout << (i ? "-" : "") << net.link(r.links[i]).id;
        std::cout << '\n';
    }
    return kOk;
}

void add_common(CLI::App* sub, Common& c, bool scenario_opts) {
    sub->add_option("--network", c.network, "Network file (default: built-in stand-in)");
    if (scenario_opts) {
        sub->add_option("--scenario", c.scenario, "Scenario JSON file");
        sub->add_option("--preset", c.preset, "Named scenario when no file is given");
        sub->add_option("--max-iter", c.max_iter, "Override solver max_iter");
        sub->add_option("--tol", c.tol, "Override solver natural-residual tolerance");
    }
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--seed", c.seed, "RNG seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Alpha-reliable combined-mean traffic equilibrium solver"};
    app.require_subcommand(1);
    Common c;

    auto* solve = app.add_subcommand("solve", "Solve one point (first value of each grid)");
    add_common(solve, c, true);
    auto* sweep = app.add_subcommand("sweep", "Solve every point of the scenario grids");
    add_common(sweep, c, true);
    auto* verify = app.add_subcommand("verify", "Check closed forms against Monte-Carlo sampling");
    verify->add_option("--out", c.out, "Output directory");
    verify->add_option("--seed", c.seed, "RNG seed");
    auto* routes = app.add_subcommand("routes", "List enumerated routes");
    routes->add_option("--network", c.network, "Network file (default: built-in stand-in)");
    routes->add_option("--scenario", c.scenario, "Scenario JSON file (route limits)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*solve) return cmd_sweep(c, "scenario1", true);
        if (*sweep) return cmd_sweep(c, "scenario2_extended", false);
        if (*verify) return cmd_verify(c);
        if (*routes) return cmd_routes(c);
    } catch (const cmte::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfig;
    }
    return kConfig;
}
