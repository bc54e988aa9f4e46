#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmte/network.hpp"
#include "cmte/risk_indices.hpp"
#include "cmte/stochastic_bpr.hpp"

namespace cmte {

/// Route cost mapping f -> psi(f) for one network, route set and risk attitude.
/// Holds references: the Network and RouteSet must outlive it.
class CostModel {
public:
    CostModel(const Network& net, const RouteSet& routes, BprParams bpr, RiskProfile profile,
              IndexKind kind = IndexKind::CMTT);

    const Network& network() const { return *net_; }
    const RouteSet& routes() const { return *routes_; }
    const BprParams& bpr() const { return bpr_; }
    const RiskProfile& profile() const { return profile_; }
    IndexKind kind() const { return kind_; }
    /// c in psi = mu + c * sigma.
    double coefficient() const { return coefficient_; }

    std::size_t num_routes() const { return routes_->size(); }
    std::size_t num_ods() const { return net_->num_ods(); }

    RouteMoments moments(std::span<const double> f) const;
    std::vector<double> route_costs(std::span<const double> f) const;

private:
    const Network* net_;
    const RouteSet* routes_;
    BprParams bpr_;
    RiskProfile profile_;
    IndexKind kind_;
    double coefficient_;
};

/// u = (f, pi): route flows and per-OD minimum-cost multipliers.
struct VipState {
    std::vector<double> f;
    std::vector<double> pi;
};

/// F(u) = (psi(f) - Lambda^T pi ; Lambda f - Q), length m + w.
std::vector<double> assemble_F(const VipState& state, const CostModel& model);

/// Euclidean projection onto the nonnegative orthant.
std::vector<double> project(std::span<const double> u);

/// ||u - P(u - F(u))||_inf / (1 + ||u||_inf). Zero exactly at VI solutions.
double natural_residual(const VipState& state, const CostModel& model);
double natural_residual(std::span<const double> u, std::span<const double> F);

struct SolverConfig {
    double tol = 1e-4;
    std::size_t max_iter = 10'000;
    double step_init = 0.0;    // <= 0 selects 1 / (1 + ||F(u0)||_inf)
    double step_shrink = 0.5;
    double step_grow = 1.1;
    double nu = 0.9;           // tau ||F(u) - F(ubar)|| <= nu ||u - ubar||
    // Momentum applied before each extra-gradient step, dropped for one
    // iteration whenever the previous move points uphill in F. 0 gives the
    // plain method. Route flows that leave link flows unchanged feel only the
    // small spread term, and without momentum they creep.
    double inertia = 0.9;
    // Extra stopping certificates checked alongside the natural residual;
    // a value <= 0 disables the check.
    double demand_tol = 1e-6;  // max_od |sum_k f_k - q| / q
    double gap_tol = 1e-4;     // max relative excess cost of a used route
    double used_threshold = 1e-4;  // fraction of OD demand marking a route as used
};

/// Throws ConfigError on tol <= 0, max_iter == 0, or a step policy outside
/// 0 < shrink < 1 < grow, 0 < nu < 1, 0 <= inertia < 1.
void validate(const SolverConfig& cfg);

enum class SolveStatus { converged, max_iterations, numerical_failure };
const char* to_string(SolveStatus s);

struct EquilibriumResult {
    SolveStatus status = SolveStatus::max_iterations;
    std::string message;
    std::vector<double> f_star;
    std::vector<double> pi_star;
    std::size_t iterations = 0;
    double final_residual = 0.0;
    // One entry per evaluated iterate, starting with the initial point.
    std::vector<double> residual_history;
    std::vector<double> antt_history;
    std::vector<double> step_history;
    double demand_residual = 0.0;  // max_od |sum_k f_k - q| / q at the final iterate
    std::vector<double> cmtt_per_route;
    std::vector<double> mu_per_route;
    std::vector<double> sigma_per_route;
    double antt = 0.0;
    double wardrop_gap = 0.0;  // max relative excess of a used route over its OD minimum

    bool converged() const { return status == SolveStatus::converged; }
};

/// Equal split of each OD demand, pi at the per-OD minimum cost.
VipState initial_state(const CostModel& model);

/// Extra-gradient projection with backtracking step control and restarted
/// momentum (see SolverConfig::inertia). Stops once the
/// natural residual is <= tol and the demand and Wardrop-gap certificates in
/// `cfg` hold. `f0`, when given, is projected onto the orthant and used as
/// the starting flow.
EquilibriumResult extragradient_solve(const CostModel& model, const SolverConfig& cfg,
                                      std::optional<std::vector<double>> f0 = std::nullopt);

struct WardropReport {
    bool pass = false;
    double max_used_gap = 0.0;        // max over used routes of (psi - min) / min
    double max_unused_shortfall = 0.0;  // max over unused routes of (cheapest used - psi) / min
    std::size_t used_routes = 0;
};

/// Used routes (f > used_threshold * q) must sit within rel_tol of the OD
/// minimum cost; no route may undercut it by more than rel_tol.
WardropReport wardrop_check(const CostModel& model, std::span<const double> f,
                            double used_threshold = 1e-4, double rel_tol = 1e-3);
WardropReport wardrop_check(const CostModel& model, const EquilibriumResult& result,
                            double used_threshold = 1e-4, double rel_tol = 1e-3);

/// Per-iteration log: iteration,residual,antt,step.
void write_convergence_log(std::ostream& os, const EquilibriumResult& result);

}  // namespace cmte
