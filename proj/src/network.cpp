#include "cmte/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cmte/errors.hpp"

namespace cmte {

namespace {

std::string fmt_num(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

bool reachable(const Network& net, NodeId from, NodeId to) {
    std::set<NodeId> seen{from};
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (n == to) return true;
        for (std::size_t a : net.out_links(n)) {
            NodeId h = net.link(a).head;
            if (seen.insert(h).second) stack.push_back(h);
        }
    }
    return false;
}

}  // namespace

void validate_link(const Link& link) {
    const std::string where = "link '" + link.id + "': ";
    if (!(link.t0 > 0.0) || !std::isfinite(link.t0))
        throw ConfigError(where + "t0 must be > 0, got " + fmt_num(link.t0));
    if (!(link.cap_design > 0.0) || !std::isfinite(link.cap_design))
        throw ConfigError(where + "capacity must be > 0, got " + fmt_num(link.cap_design));
    if (!(link.theta > 0.0 && link.theta <= 1.0))
        throw ConfigError(where + "theta must lie in (0, 1], got " + fmt_num(link.theta));
    if (link.tail == link.head)
        throw ConfigError(where + "self-loop on node " + std::to_string(link.tail));
}

Network::Network(std::vector<Link> links, std::vector<OdPair> od_pairs,
                 std::vector<RouteSpec> explicit_routes)
    : links_(std::move(links)),
      od_pairs_(std::move(od_pairs)),
      explicit_routes_(std::move(explicit_routes)) {
    if (links_.empty()) throw ConfigError("network has no links");
    if (od_pairs_.empty()) throw ConfigError("network has no OD pairs");

    std::set<std::string> ids;
    std::set<NodeId> nodes;
    for (const Link& l : links_) {
        validate_link(l);
        if (!ids.insert(l.id).second) throw ConfigError("duplicate link id '" + l.id + "'");
        nodes.insert(l.tail);
        nodes.insert(l.head);
    }
    nodes_.assign(nodes.begin(), nodes.end());
    out_.resize(nodes_.size());
    for (std::size_t a = 0; a < links_.size(); ++a) {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), links_[a].tail);
        out_[static_cast<std::size_t>(it - nodes_.begin())].push_back(a);
    }

    std::set<std::pair<NodeId, NodeId>> seen_od;
    for (const OdPair& od : od_pairs_) {
        const std::string where = "OD " + std::to_string(od.origin) + "->" +
                                  std::to_string(od.destination) + ": ";
        if (!(od.demand >= 0.0) || !std::isfinite(od.demand))
            throw ConfigError(where + "demand must be >= 0, got " + fmt_num(od.demand));
        if (od.origin == od.destination) throw ConfigError(where + "origin equals destination");
        if (!nodes.count(od.origin) || !nodes.count(od.destination))
            throw ConfigError(where + "endpoint is not a node of the network");
        if (!seen_od.insert({od.origin, od.destination}).second)
            throw ConfigError(where + "listed twice");
        if (!reachable(*this, od.origin, od.destination))
            throw ConfigError(where + "no directed path between origin and destination");
    }

    for (const RouteSpec& r : explicit_routes_) {
        if (!seen_od.count({r.origin, r.destination}))
            throw ConfigError("route " + std::to_string(r.origin) + "->" +
                              std::to_string(r.destination) + " does not match any OD pair");
        for (const std::string& id : r.link_ids)
            if (!ids.count(id)) throw ConfigError("route references unknown link '" + id + "'");
    }
}

std::optional<std::size_t> Network::link_index(std::string_view id) const {
    for (std::size_t a = 0; a < links_.size(); ++a)
        if (links_[a].id == id) return a;
    return std::nullopt;
}

std::span<const std::size_t> Network::out_links(NodeId node) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node);
    if (it == nodes_.end() || *it != node) return {};
    return out_[static_cast<std::size_t>(it - nodes_.begin())];
}

double Network::total_demand() const {
    double q = 0.0;
    for (const OdPair& od : od_pairs_) q += od.demand;
    return q;
}

Network Network::with_uniform_theta(double theta) const {
    std::vector<Link> links = links_;
    for (Link& l : links) l.theta = theta;
    return Network(std::move(links), od_pairs_, explicit_routes_);
}

Network Network::with_scaled_demand(double factor) const {
    std::vector<OdPair> ods = od_pairs_;
    for (OdPair& od : ods) od.demand *= factor;
    return Network(links_, std::move(ods), explicit_routes_);
}

// ---------------------------------------------------------------------------
// Document parsing

namespace {

enum class Section { none, links, od, routes };

struct LineCursor {
    std::size_t line_no;
    std::vector<std::string_view> fields;
};

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
    while (i < s.size()) {
        while (i < s.size() && is_sep(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_sep(s[j])) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, std::string_view field, const std::string& what) {
    throw ConfigError("line " + std::to_string(line_no) + ", field '" + std::string(field) +
                      "': " + what);
}

double parse_double(const LineCursor& c, std::size_t i, std::string_view name) {
    std::string_view tok = c.fields[i];
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(value))
        parse_fail(c.line_no, name, "expected a decimal number, got '" + std::string(c.fields[i]) + "'");
    return value;
}

NodeId parse_node(const LineCursor& c, std::size_t i, std::string_view name) {
    std::string_view tok = c.fields[i];
    NodeId value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        parse_fail(c.line_no, name, "expected an integer node id, got '" + std::string(tok) + "'");
    return value;
}

void expect_fields(const LineCursor& c, std::size_t n, std::string_view section) {
    if (c.fields.size() != n)
        throw ConfigError("line " + std::to_string(c.line_no) + ": [" + std::string(section) +
                          "] entries take " + std::to_string(n) + " fields, got " +
                          std::to_string(c.fields.size()));
}

}  // namespace

Network load_network(std::string_view text) {
    std::vector<Link> links;
    std::vector<OdPair> ods;
    std::vector<RouteSpec> routes;
    std::map<std::string, std::size_t> link_line;

    Section section = Section::none;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto fields = split_fields(line);
        if (fields.empty()) continue;

        if (fields.size() == 1 && fields[0].front() == '[') {
            std::string_view h = fields[0];
            if (h == "[links]") section = Section::links;
            else if (h == "[od]") section = Section::od;
            else if (h == "[routes]") section = Section::routes;
            else
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section " +
                                  std::string(h));
            continue;
        }

        LineCursor c{line_no, std::move(fields)};
        switch (section) {
        case Section::none:
            throw ConfigError("line " + std::to_string(line_no) + ": entry outside of any section");
        case Section::links: {
            expect_fields(c, 6, "links");
            Link l;
            l.id = std::string(c.fields[0]);
            l.tail = parse_node(c, 1, "tail");
            l.head = parse_node(c, 2, "head");
            l.t0 = parse_double(c, 3, "t0_min");
            l.cap_design = parse_double(c, 4, "cap_pcu_h");
            l.theta = parse_double(c, 5, "theta");
            try {
                validate_link(l);
            } catch (const ConfigError& e) {
                throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!link_line.emplace(l.id, line_no).second)
                throw ConfigError("line " + std::to_string(line_no) + ": duplicate link id '" +
                                  l.id + "' (first defined on line " +
                                  std::to_string(link_line[l.id]) + ")");
            links.push_back(std::move(l));
            break;
        }
        case Section::od: {
            expect_fields(c, 3, "od");
            OdPair od;
            od.origin = parse_node(c, 0, "origin");
            od.destination = parse_node(c, 1, "destination");
            od.demand = parse_double(c, 2, "demand_pcu_h");
            if (od.demand < 0.0) parse_fail(line_no, "demand_pcu_h", "demand must be >= 0");
            ods.push_back(od);
            break;
        }
        case Section::routes: {
            if (c.fields.size() < 4 || c.fields[2] != ":")
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": [routes] entries read 'origin destination : link_id ...'");
            RouteSpec r;
            r.origin = parse_node(c, 0, "origin");
            r.destination = parse_node(c, 1, "destination");
            for (std::size_t i = 3; i < c.fields.size(); ++i) r.link_ids.emplace_back(c.fields[i]);
            routes.push_back(std::move(r));
            break;
        }
        }
    }
    return Network(std::move(links), std::move(ods), std::move(routes));
}

Network load_network_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open network file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_network(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Routes

bool is_simple_path(const Network& net, const Route& route) {
    if (route.od >= net.num_ods() || route.links.empty()) return false;
    const OdPair& od = net.od_pairs()[route.od];
    std::set<NodeId> visited{od.origin};
    NodeId at = od.origin;
    for (std::size_t a : route.links) {
        if (a >= net.num_links()) return false;
        const Link& l = net.link(a);
        if (l.tail != at) return false;
        if (!visited.insert(l.head).second) return false;
        at = l.head;
    }
    return at == od.destination;
}

RouteSet::RouteSet(const Network& net, std::vector<Route> routes)
    : routes_(std::move(routes)), num_links_(net.num_links()), num_ods_(net.num_ods()) {
    by_od_.resize(num_ods_);
    delta_.assign(num_links_ * routes_.size(), 0);
    for (std::size_t k = 0; k < routes_.size(); ++k) {
        const Route& r = routes_[k];
        if (!is_simple_path(net, r))
            throw ConfigError("route " + std::to_string(k) + " is not a simple path for its OD pair");
        by_od_[r.od].push_back(k);
        for (std::size_t a : r.links) delta_[a * routes_.size() + k] = 1;
    }
    for (std::size_t w = 0; w < num_ods_; ++w) {
        if (by_od_[w].empty() && net.od_pairs()[w].demand > 0.0) {
            const OdPair& od = net.od_pairs()[w];
            throw ConfigError("OD " + std::to_string(od.origin) + "->" +
                              std::to_string(od.destination) +
                              " has positive demand but no route");
        }
    }
}

bool RouteSet::same_routes(const RouteSet& other) const {
    if (routes_.size() != other.routes_.size()) return false;
    for (std::size_t k = 0; k < routes_.size(); ++k)
        if (routes_[k].od != other.routes_[k].od || routes_[k].links != other.routes_[k].links)
            return false;
    return true;
}

double free_flow_time(const Network& net, const Route& route) {
    double t = 0.0;
    for (std::size_t a : route.links) t += net.link(a).t0;
    return t;
}

namespace {

void dfs_paths(const Network& net, NodeId at, NodeId target, std::size_t max_hops,
               std::set<NodeId>& visited, std::vector<std::size_t>& stack,
               std::vector<std::vector<std::size_t>>& out) {
    if (at == target) {
        out.push_back(stack);
        return;
    }
    if (stack.size() == max_hops) return;
    for (std::size_t a : net.out_links(at)) {
        NodeId next = net.link(a).head;
        if (visited.count(next)) continue;
        visited.insert(next);
        stack.push_back(a);
        dfs_paths(net, next, target, max_hops, visited, stack, out);
        stack.pop_back();
        visited.erase(next);
    }
}

}  // namespace

RouteSet enumerate_routes(const Network& net, std::size_t max_routes_per_od, std::size_t max_hops) {
    if (max_routes_per_od == 0 || max_hops == 0)
        throw ConfigError("route limits must be positive");
    std::vector<Route> routes;
    for (std::size_t w = 0; w < net.num_ods(); ++w) {
        const OdPair& od = net.od_pairs()[w];
        std::vector<std::vector<std::size_t>> paths;
        std::set<NodeId> visited{od.origin};
        std::vector<std::size_t> stack;
        dfs_paths(net, od.origin, od.destination, max_hops, visited, stack, paths);

        std::vector<std::pair<double, std::vector<std::size_t>>> ranked;
        ranked.reserve(paths.size());
        for (auto& p : paths) {
            double t = 0.0;
            for (std::size_t a : p) t += net.link(a).t0;
            ranked.emplace_back(t, std::move(p));
        }
        std::sort(ranked.begin(), ranked.end());
        if (ranked.size() > max_routes_per_od) ranked.resize(max_routes_per_od);

        if (ranked.empty() && od.demand > 0.0)
            throw ConfigError("OD " + std::to_string(od.origin) + "->" +
                              std::to_string(od.destination) + " has no route within " +
                              std::to_string(max_hops) + " hops");
        for (auto& [t, p] : ranked) routes.push_back(Route{w, std::move(p)});
    }
    return RouteSet(net, std::move(routes));
}

RouteSet build_routes(const Network& net, std::size_t max_routes_per_od, std::size_t max_hops) {
    if (net.explicit_routes().empty()) return enumerate_routes(net, max_routes_per_od, max_hops);

    std::vector<Route> routes;
    for (std::size_t w = 0; w < net.num_ods(); ++w) {
        const OdPair& od = net.od_pairs()[w];
        for (const RouteSpec& spec : net.explicit_routes()) {
            if (spec.origin != od.origin || spec.destination != od.destination) continue;
            Route r{w, {}};
            for (const std::string& id : spec.link_ids) r.links.push_back(*net.link_index(id));
            routes.push_back(std::move(r));
        }
    }
    return RouteSet(net, std::move(routes));
}

// ---------------------------------------------------------------------------
// Flows

std::vector<double> link_flows(const RouteSet& rs, std::span<const double> f) {
    if (f.size() != rs.size())
        throw DimensionError("route flow vector has length " + std::to_string(f.size()) +
                             ", expected " + std::to_string(rs.size()));
    std::vector<double> v(rs.num_links(), 0.0);
    for (std::size_t k = 0; k < rs.size(); ++k)
        for (std::size_t a : rs.route(k).links) v[a] += f[k];
    return v;
}

FlowState make_flow_state(const RouteSet& rs, std::vector<double> f) {
    FlowState s;
    s.v = link_flows(rs, f);
    s.f = std::move(f);
    return s;
}

FeasibilityReport check_feasible(const RouteSet& rs, std::span<const double> f,
                                 const Network& net, double tol) {
    if (f.size() != rs.size()) throw DimensionError("route flow vector length mismatch");
    FeasibilityReport rep;
    rep.demand_residual.assign(net.num_ods(), 0.0);
    for (std::size_t w = 0; w < net.num_ods(); ++w) {
        double sum = 0.0;
        for (std::size_t k : rs.routes_of(w)) sum += f[k];
        rep.demand_residual[w] = std::abs(sum - net.od_pairs()[w].demand);
        rep.max_residual = std::max(rep.max_residual, rep.demand_residual[w]);
    }
    rep.min_flow = f.empty() ? 0.0 : *std::min_element(f.begin(), f.end());
    rep.feasible = rep.max_residual <= tol && rep.min_flow >= -tol;
    return rep;
}

std::vector<double> equal_split(const RouteSet& rs, const Network& net) {
    std::vector<double> f(rs.size(), 0.0);
    for (std::size_t w = 0; w < net.num_ods(); ++w) {
        auto ks = rs.routes_of(w);
        if (ks.empty()) continue;
        double share = net.od_pairs()[w].demand / static_cast<double>(ks.size());
        for (std::size_t k : ks) f[k] = share;
    }
    return f;
}

// ---------------------------------------------------------------------------

std::string_view standin_network_text() {
    static constexpr std::string_view text = R"(# Stand-in 10-node / 13-link test network.
# Six simple paths connect node 1 to node 10:
#   1-2-4-7-10     links 1 3 7 11
#   1-2-5-7-10     links 1 4 8 11
#   1-2-5-8-9-10   links 1 4 9 12 13
#   1-3-5-7-10     links 2 5 8 11
#   1-3-5-8-9-10   links 2 5 9 12 13
#   1-3-6-8-9-10   links 2 6 10 12 13
[links]
# id  tail head  t0_min  cap_pcu_h  theta
1     1    2     10      1000       0.8
2     1    3     10      1000       0.8
3     2    4     10      1000       0.8
4     2    5     5       1600       0.8
5     3    5     10      1000       0.8
6     3    6     5       1000       0.8
7     4    7     10      1000       0.8
8     5    7     10      1000       0.8
9     5    8     4       1500       0.8
10    6    8     10      2000       0.8
11    7    10    30      1000       0.8
12    8    9     10      1000       0.8
13    9    10    10      1000       0.8

[od]
# origin destination demand_pcu_h
1 10 4000
)";
    return text;
}

Network standin_network() { return load_network(standin_network_text()); }

}  // namespace cmte
