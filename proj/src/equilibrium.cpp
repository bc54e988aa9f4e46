#include "cmte/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cmte/antt.hpp"
#include "cmte/errors.hpp"
#include "cmte/text_format.hpp"

namespace cmte {

namespace {

double inf_norm(std::span<const double> x) {
    double m = 0.0;
    for (double xi : x) m = std::max(m, std::abs(xi));
    return m;
}

double two_norm_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> pack(const VipState& s) {
    std::vector<double> u(s.f);
    u.insert(u.end(), s.pi.begin(), s.pi.end());
    return u;
}

VipState unpack(std::span<const double> u, std::size_t m) {
    return VipState{std::vector<double>(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(m)),
                    std::vector<double>(u.begin() + static_cast<std::ptrdiff_t>(m), u.end())};
}

// P(u - tau * g)
std::vector<double> projected_step(std::span<const double> u, std::span<const double> g, double tau) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::max(0.0, u[i] - tau * g[i]);
    return out;
}

std::vector<double> od_min_costs(const CostModel& model, std::span<const double> psi) {
    const RouteSet& rs = model.routes();
    std::vector<double> mins(model.num_ods(), 0.0);
    for (std::size_t w = 0; w < model.num_ods(); ++w) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t k : rs.routes_of(w)) m = std::min(m, psi[k]);
        mins[w] = std::isfinite(m) ? m : 0.0;
    }
    return mins;
}

double wardrop_gap_of(const CostModel& model, std::span<const double> f, std::span<const double> psi,
                      double used_threshold) {
    const auto mins = od_min_costs(model, psi);
    double gap = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const std::size_t w = model.routes().od_of(k);
        const double q = model.network().od_pairs()[w].demand;
        if (f[k] > used_threshold * q && mins[w] > 0.0) gap = std::max(gap, (psi[k] - mins[w]) / mins[w]);
    }
    return gap;
}

// Relative demand violation from the second block of F.
double relative_demand_residual(const CostModel& model, std::span<const double> F) {
    const std::size_t m = model.num_routes();
    double r = 0.0;
    for (std::size_t w = 0; w < model.num_ods(); ++w) {
        const double q = model.network().od_pairs()[w].demand;
        r = std::max(r, std::abs(F[m + w]) / std::max(q, 1.0));
    }
    return r;
}

// psi recovered from the first block of F: psi_k = F_k + pi_od(k).
std::vector<double> costs_from_F(const CostModel& model, std::span<const double> u,
                                 std::span<const double> F) {
    const std::size_t m = model.num_routes();
    std::vector<double> psi(m);
    for (std::size_t k = 0; k < m; ++k) psi[k] = F[k] + u[m + model.routes().od_of(k)];
    return psi;
}

}  // namespace

// ---------------------------------------------------------------------------

CostModel::CostModel(const Network& net, const RouteSet& routes, BprParams bpr, RiskProfile profile,
                     IndexKind kind)
    : net_(&net), routes_(&routes), bpr_(bpr), profile_(profile), kind_(kind),
      coefficient_(risk_coefficient(kind, profile)) {
    validate(bpr_);
    if (routes.num_links() != net.num_links() || routes.num_ods() != net.num_ods())
        throw DimensionError("route set was built for a different network");
}

RouteMoments CostModel::moments(std::span<const double> f) const {
    const auto v = link_flows(*routes_, f);
    return route_moments(*net_, *routes_, v, bpr_);
}

std::vector<double> CostModel::route_costs(std::span<const double> f) const {
    RouteMoments m = moments(f);
    std::vector<double> psi(m.mu.size());
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = m.mu[k] + coefficient_ * m.sigma[k];
    return psi;
}

std::vector<double> assemble_F(const VipState& state, const CostModel& model) {
    const std::size_t m = model.num_routes();
    const std::size_t w = model.num_ods();
    if (state.f.size() != m || state.pi.size() != w)
        throw DimensionError("VIP state has shape (" + std::to_string(state.f.size()) + ", " +
                             std::to_string(state.pi.size()) + "), expected (" + std::to_string(m) +
                             ", " + std::to_string(w) + ")");
    std::vector<double> F(m + w, 0.0);
    const auto psi = model.route_costs(state.f);
    const RouteSet& rs = model.routes();
    for (std::size_t k = 0; k < m; ++k) F[k] = psi[k] - state.pi[rs.od_of(k)];
    for (std::size_t od = 0; od < w; ++od) {
        double sum = 0.0;
        for (std::size_t k : rs.routes_of(od)) sum += state.f[k];
        F[m + od] = sum - model.network().od_pairs()[od].demand;
    }
    return F;
}

std::vector<double> project(std::span<const double> u) {
    std::vector<double> out(u.size());
    std::transform(u.begin(), u.end(), out.begin(), [](double x) { return std::max(0.0, x); });
    return out;
}

double natural_residual(std::span<const double> u, std::span<const double> F) {
    if (u.size() != F.size()) throw DimensionError("residual: u and F(u) lengths differ");
    double r = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) r = std::max(r, std::abs(u[i] - std::max(0.0, u[i] - F[i])));
    return r / (1.0 + inf_norm(u));
}

double natural_residual(const VipState& state, const CostModel& model) {
    const auto F = assemble_F(state, model);
    return natural_residual(pack(state), F);
}

void validate(const SolverConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw ConfigError("solver tol must be > 0");
    if (cfg.max_iter == 0) throw ConfigError("solver max_iter must be positive");
    if (!(cfg.step_shrink > 0.0 && cfg.step_shrink < 1.0))
        throw ConfigError("step_shrink must lie in (0, 1)");
    if (!(cfg.step_grow > 1.0)) throw ConfigError("step_grow must be > 1");
    if (!(cfg.nu > 0.0 && cfg.nu < 1.0)) throw ConfigError("nu must lie in (0, 1)");
    if (!(cfg.inertia >= 0.0 && cfg.inertia < 1.0)) throw ConfigError("inertia must lie in [0, 1)");
    if (!std::isfinite(cfg.step_init)) throw ConfigError("step_init must be finite");
    if (!(cfg.used_threshold >= 0.0 && cfg.used_threshold < 1.0))
        throw ConfigError("used_threshold must lie in [0, 1)");
}

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

VipState initial_state(const CostModel& model) {
    VipState s;
    s.f = equal_split(model.routes(), model.network());
    s.pi = od_min_costs(model, model.route_costs(s.f));
    return s;
}

EquilibriumResult extragradient_solve(const CostModel& model, const SolverConfig& cfg,
                                      std::optional<std::vector<double>> f0) {
    validate(cfg);
    const std::size_t m = model.num_routes();
    const std::size_t w = model.num_ods();
    const double total_demand = model.network().total_demand();

    VipState start = initial_state(model);
    if (f0) {
        if (f0->size() != m) throw DimensionError("initial flow vector length mismatch");
        start.f = project(*f0);
        start.pi = od_min_costs(model, model.route_costs(start.f));
    }

    // Iterate in dimensionless coordinates x = S^-1 u with
    // S = diag(flow_scale I_m, cost_scale I_w). The map G(x) = S F(S x) / (flow_scale * cost_scale)
    // is congruent to F, so monotonicity, the orthant and the solution set carry over,
    // while flow and cost blocks get comparable magnitudes.
    double flow_scale = 1.0;
    for (const OdPair& od : model.network().od_pairs()) flow_scale = std::max(flow_scale, od.demand);
    double cost_scale = 0.0;
    for (double p : start.pi) cost_scale = std::max(cost_scale, p);
    if (!(cost_scale > 0.0) || !std::isfinite(cost_scale)) cost_scale = 1.0;

    auto to_u = [&](std::span<const double> x) {
        std::vector<double> u(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] * (i < m ? flow_scale : cost_scale);
        return u;
    };
    auto to_G = [&](std::span<const double> F) {
        std::vector<double> g(F.size());
        for (std::size_t i = 0; i < F.size(); ++i) g[i] = F[i] / (i < m ? cost_scale : flow_scale);
        return g;
    };
    auto eval_F = [&](std::span<const double> u) { return assemble_F(unpack(u, m), model); };
    auto current_antt = [&](std::span<const double> u) {
        if (!(total_demand > 0.0)) return 0.0;
        std::span<const double> f = u.first(m);
        return antt(f, model.moments(f).mu, total_demand);
    };

    EquilibriumResult res;
    std::vector<double> u = pack(start);
    std::vector<double> x(m + w);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = u[i] / (i < m ? flow_scale : cost_scale);
    std::vector<double> F = eval_F(u);
    std::vector<double> G = to_G(F);
    double tau = cfg.step_init > 0.0 ? cfg.step_init : 1.0 / (1.0 + inf_norm(G));
    std::vector<double> x_prev;

    for (std::size_t it = 0;; ++it) {
        if (!all_finite(u) || !all_finite(F)) {
            res.status = SolveStatus::numerical_failure;
            res.message = "non-finite iterate at iteration " + std::to_string(it);
            break;
        }
        const double r = natural_residual(u, F);
        res.residual_history.push_back(r);
        res.antt_history.push_back(current_antt(u));
        res.step_history.push_back(tau);
        res.iterations = it;
        res.demand_residual = relative_demand_residual(model, F);
        if (r <= cfg.tol) {
            const bool demand_ok = cfg.demand_tol <= 0.0 || res.demand_residual <= cfg.demand_tol;
            const bool gap_ok =
                cfg.gap_tol <= 0.0 ||
                wardrop_gap_of(model, std::span<const double>(u).first(m), costs_from_F(model, u, F),
                               cfg.used_threshold) <= cfg.gap_tol;
            if (demand_ok && gap_ok) {
                res.status = SolveStatus::converged;
                break;
            }
        }
        if (it == cfg.max_iter) {
            res.status = SolveStatus::max_iterations;
            res.message = "residual " + format_number(r, 6) + " above tol after " +
                          std::to_string(it) + " iterations";
            break;
        }

        if (cfg.inertia > 0.0 && !x_prev.empty()) {
            double uphill = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) uphill += G[i] * (x[i] - x_prev[i]);
            if (uphill > 0.0) {
                x_prev = x;
            } else {
                std::vector<double> y(x.size());
                for (std::size_t i = 0; i < x.size(); ++i)
                    y[i] = std::max(0.0, x[i] + cfg.inertia * (x[i] - x_prev[i]));
                // The extrapolated point is kept only if it does not more than
                // double the residual; otherwise momentum can overshoot the
                // demand constraint and cycle.
                const std::vector<double> uy = to_u(y);
                std::vector<double> Fy = eval_F(uy);
                if (all_finite(Fy) && natural_residual(uy, Fy) <= 2.0 * r) {
                    x_prev = std::move(x);
                    x = std::move(y);
                    u = uy;
                    F = std::move(Fy);
                    G = to_G(F);
                } else {
                    x_prev = x;
                }
            }
        } else {
            x_prev = x;
        }

        // Predictor with backtracking on the local Lipschitz estimate.
        std::vector<double> xbar, Gbar;
        bool step_ok = false;
        while (tau >= 1e-300) {
            xbar = projected_step(x, G, tau);
            Gbar = to_G(eval_F(to_u(xbar)));
            if (all_finite(Gbar) && tau * two_norm_diff(G, Gbar) <= cfg.nu * two_norm_diff(x, xbar)) {
                step_ok = true;
                break;
            }
            tau *= cfg.step_shrink;
        }
        if (!step_ok) {
            res.status = SolveStatus::numerical_failure;
            res.message = "step size underflow at iteration " + std::to_string(it);
            break;
        }
        // Corrector uses the map at the predicted point.
        x = projected_step(x, Gbar, tau);
        u = to_u(x);
        F = eval_F(u);
        G = to_G(F);
        tau *= cfg.step_grow;
    }

    VipState final_state = unpack(u, m);
    res.f_star = std::move(final_state.f);
    res.pi_star = std::move(final_state.pi);
    res.final_residual = res.residual_history.empty() ? 0.0 : res.residual_history.back();
    if (all_finite(res.f_star)) {
        const RouteMoments mom = model.moments(res.f_star);
        res.mu_per_route = mom.mu;
        res.sigma_per_route = mom.sigma;
        res.cmtt_per_route.resize(m);
        for (std::size_t k = 0; k < m; ++k)
            res.cmtt_per_route[k] = mom.mu[k] + model.coefficient() * mom.sigma[k];
        res.antt = total_demand > 0.0 ? antt(res.f_star, mom.mu, total_demand) : 0.0;
        res.wardrop_gap = wardrop_gap_of(model, res.f_star, res.cmtt_per_route, cfg.used_threshold);
    }
    return res;
}

WardropReport wardrop_check(const CostModel& model, std::span<const double> f, double used_threshold,
                            double rel_tol) {
    if (f.size() != model.num_routes()) throw DimensionError("flow vector length mismatch");
    const auto psi = model.route_costs(f);
    const auto mins = od_min_costs(model, psi);
    const RouteSet& rs = model.routes();
    auto is_used = [&](std::size_t k) {
        return f[k] > used_threshold * model.network().od_pairs()[rs.od_of(k)].demand;
    };

    // Cheapest used route per OD; an unused route may not undercut it.
    std::vector<double> used_min(model.num_ods(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < f.size(); ++k)
        if (is_used(k)) used_min[rs.od_of(k)] = std::min(used_min[rs.od_of(k)], psi[k]);

    WardropReport rep;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const std::size_t w = rs.od_of(k);
        const double scale = mins[w] > 0.0 ? mins[w] : 1.0;
        if (is_used(k)) {
            ++rep.used_routes;
            rep.max_used_gap = std::max(rep.max_used_gap, (psi[k] - mins[w]) / scale);
        } else if (std::isfinite(used_min[w])) {
            rep.max_unused_shortfall = std::max(rep.max_unused_shortfall, (used_min[w] - psi[k]) / scale);
        }
    }
    rep.pass = rep.max_used_gap <= rel_tol && rep.max_unused_shortfall <= rel_tol;
    return rep;
}

WardropReport wardrop_check(const CostModel& model, const EquilibriumResult& result,
                            double used_threshold, double rel_tol) {
    return wardrop_check(model, result.f_star, used_threshold, rel_tol);
}

void write_convergence_log(std::ostream& os, const EquilibriumResult& result) {
    os << "iteration,residual,antt,step\n";
    for (std::size_t i = 0; i < result.residual_history.size(); ++i) {
        os << i << ',' << format_number(result.residual_history[i]) << ','
           << format_number(result.antt_history[i]) << ',' << format_number(result.step_history[i])
           << '\n';
    }
}

}  // namespace cmte
