#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmte {

using NodeId = int;

/// Directed link with a BPR cost whose capacity is uniformly degradable:
/// realised capacity is drawn from U(theta * cap_design, cap_design).
struct Link {
    std::string id;
    NodeId tail = 0;
    NodeId head = 0;
    double t0 = 0.0;          // free-flow time, minutes
    double cap_design = 0.0;  // pcu/h
    double theta = 1.0;       // 1 means deterministic capacity
};

struct OdPair {
    NodeId origin = 0;
    NodeId destination = 0;
    double demand = 0.0;  // pcu/h
};

/// Route given explicitly in a network document; resolved into a RouteSet
/// instead of running enumeration.
struct RouteSpec {
    NodeId origin = 0;
    NodeId destination = 0;
    std::vector<std::string> link_ids;
};

/// Immutable, validated network. Construction checks every link/OD
/// invariant and that each OD pair is connected by at least one path.
class Network {
public:
    Network(std::vector<Link> links, std::vector<OdPair> od_pairs,
            std::vector<RouteSpec> explicit_routes = {});

    const std::vector<Link>& links() const { return links_; }
    const std::vector<OdPair>& od_pairs() const { return od_pairs_; }
    const std::vector<RouteSpec>& explicit_routes() const { return explicit_routes_; }
    const std::vector<NodeId>& nodes() const { return nodes_; }

    std::size_t num_links() const { return links_.size(); }
    std::size_t num_ods() const { return od_pairs_.size(); }

    const Link& link(std::size_t index) const { return links_[index]; }
    std::optional<std::size_t> link_index(std::string_view id) const;

    /// Indices of links leaving `node`, in declaration order.
    std::span<const std::size_t> out_links(NodeId node) const;

    double total_demand() const;

    /// Copy with theta replaced on every link.
    Network with_uniform_theta(double theta) const;
    /// Copy with every OD demand multiplied by `factor`.
    Network with_scaled_demand(double factor) const;

private:
    std::vector<Link> links_;
    std::vector<OdPair> od_pairs_;
    std::vector<RouteSpec> explicit_routes_;
    std::vector<NodeId> nodes_;
    std::vector<std::vector<std::size_t>> out_;  // parallel to nodes_
};

/// Throws ConfigError naming the violated invariant.
void validate_link(const Link& link);

/// Parses the line-oriented network format (see docs/network-format.md).
/// Throws ConfigError with line and field context.
Network load_network(std::string_view text);
Network load_network_file(const std::filesystem::path& path);

struct Route {
    std::size_t od = 0;
    std::vector<std::size_t> links;  // link indices, in travel order
};

/// Routes with their route-link (delta) and route-OD (Lambda) incidence.
class RouteSet {
public:
    /// Throws ConfigError when a route is not a simple path for its OD.
    RouteSet(const Network& net, std::vector<Route> routes);

    std::size_t size() const { return routes_.size(); }
    std::size_t num_links() const { return num_links_; }
    std::size_t num_ods() const { return num_ods_; }

    const std::vector<Route>& routes() const { return routes_; }
    const Route& route(std::size_t k) const { return routes_[k]; }
    std::size_t od_of(std::size_t k) const { return routes_[k].od; }

    /// Route indices serving `od`, ascending.
    std::span<const std::size_t> routes_of(std::size_t od) const { return by_od_[od]; }

    bool delta(std::size_t link, std::size_t route) const {
        return delta_[link * routes_.size() + route] != 0;
    }
    bool lambda(std::size_t od, std::size_t route) const { return routes_[route].od == od; }

    bool operator==(const RouteSet& other) const {
        return num_links_ == other.num_links_ && num_ods_ == other.num_ods_ &&
               by_od_ == other.by_od_ && delta_ == other.delta_ && same_routes(other);
    }

private:
    bool same_routes(const RouteSet& other) const;

    std::vector<Route> routes_;
    std::size_t num_links_ = 0;
    std::size_t num_ods_ = 0;
    std::vector<std::vector<std::size_t>> by_od_;
    std::vector<std::uint8_t> delta_;  // num_links x num_routes, row-major
};

/// Consecutive links chain head-to-tail, the path runs origin to destination
/// of its OD, and no node repeats.
bool is_simple_path(const Network& net, const Route& route);

/// All simple paths per OD with at most `max_hops` links, ranked by free-flow
/// time (ties broken lexicographically on link index sequence) and truncated
/// to `max_routes_per_od`. Throws ConfigError when an OD with positive demand
/// has no route.
RouteSet enumerate_routes(const Network& net, std::size_t max_routes_per_od,
                          std::size_t max_hops);

/// Explicit routes from the network document when present, enumeration otherwise.
RouteSet build_routes(const Network& net, std::size_t max_routes_per_od,
                      std::size_t max_hops);

double free_flow_time(const Network& net, const Route& route);

struct FlowState {
    std::vector<double> f;  // route flows
    std::vector<double> v;  // link flows
};

/// v_a = sum_k f_k delta_ak.
std::vector<double> link_flows(const RouteSet& rs, std::span<const double> f);

FlowState make_flow_state(const RouteSet& rs, std::vector<double> f);

struct FeasibilityReport {
    std::vector<double> demand_residual;  // |sum_k f_k - q| per OD
    double max_residual = 0.0;
    double min_flow = 0.0;
    bool feasible = false;
};

FeasibilityReport check_feasible(const RouteSet& rs, std::span<const double> f,
                                 const Network& net, double tol);

/// Each OD demand split evenly across its routes.
std::vector<double> equal_split(const RouteSet& rs, const Network& net);

/// 10-node, 13-link test network with six simple paths from node 1 to node 10
/// (theta 0.8 on every link, one OD 1->10 at 4000 pcu/h). Also shipped as
/// data/standin.net.
std::string_view standin_network_text();
Network standin_network();

}  // namespace cmte
