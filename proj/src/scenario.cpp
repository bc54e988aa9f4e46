#include "cmte/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "cmte/antt.hpp"
#include "cmte/errors.hpp"
#include "cmte/text_format.hpp"

namespace cmte {

namespace {

using nlohmann::json;

void check_grid(const std::vector<double>& grid, const char* name, double lo, double hi,
                bool lo_open) {
    if (grid.empty()) throw ConfigError(std::string(name) + " is empty");
    for (double x : grid) {
        const bool ok = std::isfinite(x) && (lo_open ? x > lo : x >= lo) && x <= hi;
        if (!ok) {
            throw ConfigError(std::string(name) + " value " + format_number(x) + " outside " +
                              (lo_open ? "(" : "[") + format_number(lo) + ", " +
                              format_number(hi) + "]");
        }
    }
}

double parse_double(std::string_view s, const char* what) {
    std::string buf(s);
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(buf, &used);
    } catch (const std::exception&) {
        throw ConfigError(std::string("bad ") + what + " '" + buf + "'");
    }
    while (used < buf.size() && std::isspace(static_cast<unsigned char>(buf[used]))) ++used;
    if (used != buf.size()) throw ConfigError(std::string("bad ") + what + " '" + buf + "'");
    return x;
}

std::vector<double> grid_from_json(const json& j, const std::string& key) {
    if (j.is_string()) return expand_range(j.get<std::string>());
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ConfigError(key + " must be a number, array or range string");
    std::vector<double> out;
    for (const json& e : j) {
        if (!e.is_number()) throw ConfigError(key + " entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

double number_field(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError(key + " must be a number");
    return j.get<double>();
}

std::size_t count_field(const json& j, const std::string& key) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ConfigError(key + " must be a nonnegative integer");
    return j.get<std::size_t>();
}

void read_solver(const json& j, SolverConfig& s) {
    if (!j.is_object()) throw ConfigError("solver must be an object");
    for (const auto& [key, val] : j.items()) {
        const std::string k = "solver." + key;
        if (key == "tol") s.tol = number_field(val, k);
        else if (key == "max_iter") s.max_iter = count_field(val, k);
        else if (key == "step_init") s.step_init = number_field(val, k);
        else if (key == "step_shrink") s.step_shrink = number_field(val, k);
        else if (key == "step_grow") s.step_grow = number_field(val, k);
        else if (key == "nu") s.nu = number_field(val, k);
        else if (key == "inertia") s.inertia = number_field(val, k);
        else if (key == "demand_tol") s.demand_tol = number_field(val, k);
        else if (key == "gap_tol") s.gap_tol = number_field(val, k);
        else if (key == "used_threshold") s.used_threshold = number_field(val, k);
        else throw ConfigError("unknown key '" + k + "'");
    }
}

void read_bpr(const json& j, BprParams& p) {
    if (!j.is_object()) throw ConfigError("bpr must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "beta") p.beta = number_field(val, "bpr.beta");
        else if (key == "n") p.n = static_cast<int>(count_field(val, "bpr.n"));
        else throw ConfigError("unknown key 'bpr." + key + "'");
    }
}

struct Point {
    double lambda, demand, theta;
};

SweepRow solve_point(const Network& net, const Scenario& sc, const Point& p, std::size_t index) {
    SweepRow row;
    row.point = index;
    row.lambda = p.lambda;
    row.demand = p.demand;
    row.theta = p.theta;
    try {
        const Network pn =
            net.with_scaled_demand(p.demand / net.total_demand()).with_uniform_theta(p.theta);
        const RouteSet rs = build_routes(pn, sc.max_routes_per_od, sc.max_hops);
        const CostModel model(pn, rs, sc.bpr, RiskProfile(sc.alpha, p.lambda));
        EquilibriumResult r = extragradient_solve(model, sc.solver);

        row.status = to_string(r.status);
        row.message = r.message;
        row.iterations = r.iterations;
        row.residual = r.final_residual;
        row.demand_residual = r.demand_residual;
        row.antt = r.antt;
        row.flows = r.f_star;
        row.psi = r.cmtt_per_route;
        row.residual_history = std::move(r.residual_history);
        row.antt_history = std::move(r.antt_history);
        row.step_history = std::move(r.step_history);

        const std::vector<double> v = link_flows(rs, row.flows);
        const LinkMoments lm = link_moments(pn, v, sc.bpr);
        row.antt_links = antt_from_links(v, lm.mean, pn.total_demand());
        const bool antt_agree =
            std::abs(row.antt - row.antt_links) <= 1e-9 * std::max(1.0, std::abs(row.antt));

        const WardropReport w = wardrop_check(model, row.flows, sc.solver.used_threshold, 1e-3);
        row.wardrop_gap = std::max(w.max_used_gap, w.max_unused_shortfall);
        row.wardrop_pass = w.pass;
        row.success = r.converged() && w.pass && antt_agree;
        if (r.converged() && !w.pass) row.message = "converged point fails the Wardrop check";
        if (!antt_agree) row.message = "route and link ANTT disagree";
    } catch (const std::exception& e) {
        row.success = false;
        row.status = "error";
        row.message = e.what();
    }
    return row;
}

template <bool Parallel>
SweepResult run_impl(const Network& net, const Scenario& sc) {
    validate(sc);
    if (!(net.total_demand() > 0.0))
        throw ConfigError("network has zero total demand, cannot rescale to the demand grid");
    // Surface config problems before any solve.
    const RouteSet rs = build_routes(net, sc.max_routes_per_od, sc.max_hops);
    for (double th : sc.theta_grid) (void)net.with_uniform_theta(th);
    for (double l : sc.lambda_grid) (void)RiskProfile(sc.alpha, l);

    SweepResult res;
    res.scenario = sc;
    for (const Route& r : rs.routes()) {
        std::string label;
        for (std::size_t a : r.links) {
            if (!label.empty()) label += '-';
            label += net.link(a).id;
        }
        res.route_labels.push_back(std::move(label));
    }

    std::vector<Point> points;
    for (double q : sc.demand_grid)
        for (double th : sc.theta_grid)
            for (double l : sc.lambda_grid) points.push_back({l, q, th});
    res.rows.resize(points.size());

    const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic, 1) if (Parallel)
    for (long i = 0; i < n; ++i) {
        res.rows[static_cast<std::size_t>(i)] =
            solve_point(net, sc, points[static_cast<std::size_t>(i)], static_cast<std::size_t>(i));
    }
    return res;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + p.string() + " for writing");
    return os;
}

void finish(std::ofstream& os, const std::filesystem::path& p) {
    os.flush();
    if (!os) throw IoError("write failed for " + p.string());
}

std::string key_of(double x) { return format_number(x); }

}  // namespace

void validate(const Scenario& sc) {
    if (!(sc.alpha > 0.0 && sc.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    check_grid(sc.lambda_grid, "lambda_grid", 0.0, 1.0, false);
    check_grid(sc.demand_grid, "demand_grid", 0.0, HUGE_VAL, true);
    check_grid(sc.theta_grid, "theta_grid", 0.0, 1.0, true);
    validate(sc.bpr);
    validate(sc.solver);
    if (sc.max_routes_per_od == 0) throw ConfigError("max_routes_per_od must be positive");
    if (sc.max_hops == 0) throw ConfigError("max_hops must be positive");
}

std::vector<double> expand_range(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon == std::string_view::npos ? colon : colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3) throw ConfigError("range '" + std::string(text) + "' is not start:step:stop");
    const double a = parse_double(parts[0], "range start");
    const double step = parse_double(parts[1], "range step");
    const double b = parse_double(parts[2], "range stop");
    if (!(step > 0.0) || !(b >= a))
        throw ConfigError("range '" + std::string(text) + "' needs step > 0 and stop >= start");
    const double span = (b - a) / step;
    if (span > 1e6) throw ConfigError("range '" + std::string(text) + "' is too long");
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Round away accumulated binary noise so 0.1 * 3 prints as 0.3.
        out.push_back(std::stod(format_number(a + static_cast<double>(i) * step, 12)));
    }
    return out;
}

Scenario load_scenario(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("scenario JSON must be an object");
    Scenario sc;
    for (const auto& [key, val] : j.items()) {
        if (key == "name") {
            if (!val.is_string()) throw ConfigError("name must be a string");
            sc.name = val.get<std::string>();
        } else if (key == "alpha") sc.alpha = number_field(val, key);
        else if (key == "lambda_grid") sc.lambda_grid = grid_from_json(val, key);
        else if (key == "demand_grid") sc.demand_grid = grid_from_json(val, key);
        else if (key == "theta_grid") sc.theta_grid = grid_from_json(val, key);
        else if (key == "bpr") read_bpr(val, sc.bpr);
        else if (key == "solver") read_solver(val, sc.solver);
        else if (key == "max_routes_per_od") sc.max_routes_per_od = count_field(val, key);
        else if (key == "max_hops") sc.max_hops = count_field(val, key);
        else throw ConfigError("unknown key '" + key + "'");
    }
    validate(sc);
    return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open scenario " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    if (is.bad()) throw IoError("read failed for " + path.string());
    try {
        return load_scenario(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Scenario preset_scenario(std::string_view name) {
    Scenario sc;
    sc.name = std::string(name);
    sc.alpha = 0.9;
    sc.lambda_grid = expand_range("0:0.1:1");
    sc.demand_grid = {4000.0};
    sc.theta_grid = {0.8};
    if (name == "scenario1") {
        sc.lambda_grid = {0.5};
    } else if (name == "scenario2") {
        sc.demand_grid = expand_range("3000:1000:4000");
    } else if (name == "scenario2_extended") {
        sc.demand_grid = expand_range("3000:1000:6000");
    } else if (name == "scenario3") {
        sc.theta_grid = expand_range("0.6:0.1:0.9");
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    return sc;
}

std::vector<std::string> preset_names() {
    return {"scenario1", "scenario2", "scenario2_extended", "scenario3"};
}

bool SweepResult::all_success() const {
    return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.success; });
}

SweepResult run_scenario(const Network& net, const Scenario& sc) { return run_impl<true>(net, sc); }

namespace serial {
SweepResult run_scenario(const Network& net, const Scenario& sc) { return run_impl<false>(net, sc); }
}  // namespace serial

void emit_results(const SweepResult& res, const std::filesystem::path& dest) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dest / "convergence", ec);
    if (ec) throw IoError("cannot create " + (dest / "convergence").string() + ": " + ec.message());

    const std::size_t m = res.route_labels.size();
    {
        const fs::path p = dest / "results.csv";
        std::ofstream os = open_out(p);
        os << "point,lambda,demand,theta,success,status,iterations,residual,demand_residual,"
              "wardrop_gap,wardrop_pass,antt";
        for (std::size_t k = 0; k < m; ++k) os << ",f_" << k + 1;
        for (std::size_t k = 0; k < m; ++k) os << ",psi_" << k + 1;
        os << ",message\n";
        for (const SweepRow& r : res.rows) {
            os << r.point << ',' << format_number(r.lambda) << ',' << format_number(r.demand) << ','
               << format_number(r.theta) << ',' << (r.success ? 1 : 0) << ',' << r.status << ','
               << r.iterations << ',' << format_number(r.residual, 6) << ','
               << format_number(r.demand_residual, 6) << ',' << format_number(r.wardrop_gap, 6)
               << ',' << (r.wardrop_pass ? 1 : 0) << ',' << format_number(r.antt, 10);
            for (std::size_t k = 0; k < m; ++k)
                os << ',' << (k < r.flows.size() ? format_number(r.flows[k], 10) : "");
            for (std::size_t k = 0; k < m; ++k)
                os << ',' << (k < r.psi.size() ? format_number(r.psi[k], 10) : "");
            std::string msg = r.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            os << ',' << msg << '\n';
        }
        finish(os, p);
    }
    {
        const fs::path p = dest / "routes.csv";
        std::ofstream os = open_out(p);
        os << "route,links\n";
        for (std::size_t k = 0; k < m; ++k) os << k + 1 << ',' << res.route_labels[k] << '\n';
        finish(os, p);
    }
    {
        // One series per (demand, theta), each ordered by lambda.
        std::map<std::pair<std::size_t, std::size_t>, std::vector<const SweepRow*>> series;
        const auto& dg = res.scenario.demand_grid;
        const auto& tg = res.scenario.theta_grid;
        auto pos = [](const std::vector<double>& g, double x) {
            return static_cast<std::size_t>(std::find(g.begin(), g.end(), x) - g.begin());
        };
        for (const SweepRow& r : res.rows) series[{pos(dg, r.demand), pos(tg, r.theta)}].push_back(&r);
        const fs::path p = dest / "antt_vs_lambda.csv";
        std::ofstream os = open_out(p);
        os << "series,demand,theta,lambda,antt,success\n";
        for (const auto& [k, rows] : series) {
            const std::string id = "Q" + key_of(dg[k.first]) + "_theta" + key_of(tg[k.second]);
            for (const SweepRow* r : rows) {
                os << id << ',' << format_number(r->demand) << ',' << format_number(r->theta) << ','
                   << format_number(r->lambda) << ',' << format_number(r->antt, 10) << ','
                   << (r->success ? 1 : 0) << '\n';
            }
        }
        finish(os, p);
    }
    for (const SweepRow& r : res.rows) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu.csv", r.point);
        const fs::path p = dest / "convergence" / name;
        std::ofstream os = open_out(p);
        os << "iteration,residual,antt,step\n";
        for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
            os << i << ',' << format_number(r.residual_history[i], 8) << ','
               << format_number(r.antt_history[i], 10) << ',' << format_number(r.step_history[i], 8)
               << '\n';
        }
        finish(os, p);
    }
}

}  // namespace cmte
