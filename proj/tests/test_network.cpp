#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <string>

#include "cmte/errors.hpp"
#include "cmte/network.hpp"

using namespace cmte;

namespace {

std::vector<std::string> route_ids(const Network& net, const Route& r) {
    std::vector<std::string> out;
    for (std::size_t a : r.links) out.push_back(net.link(a).id);
    return out;
}

}  // namespace

TEST(LoadNetwork, StandinHasThirteenLinksAndOneOd) {
    const Network net = standin_network();
    EXPECT_EQ(net.num_links(), 13u);
    EXPECT_EQ(net.nodes().size(), 10u);
    ASSERT_EQ(net.num_ods(), 1u);
    EXPECT_EQ(net.od_pairs()[0].origin, 1);
    EXPECT_EQ(net.od_pairs()[0].destination, 10);
    EXPECT_DOUBLE_EQ(net.total_demand(), 4000.0);
    for (const Link& l : net.links()) EXPECT_DOUBLE_EQ(l.theta, 0.8);
    EXPECT_DOUBLE_EQ(net.link(*net.link_index("11")).t0, 30.0);
}

TEST(LoadNetwork, BundledFileMatchesBuiltIn) {
    const Network file = load_network_file(std::string(CMTE_DATA_DIR) + "/standin.net");
    const Network built = standin_network();
    ASSERT_EQ(file.num_links(), built.num_links());
    for (std::size_t a = 0; a < file.num_links(); ++a) {
        EXPECT_EQ(file.link(a).id, built.link(a).id);
        EXPECT_EQ(file.link(a).tail, built.link(a).tail);
        EXPECT_EQ(file.link(a).head, built.link(a).head);
        EXPECT_EQ(file.link(a).t0, built.link(a).t0);
        EXPECT_EQ(file.link(a).cap_design, built.link(a).cap_design);
    }
}

TEST(LoadNetwork, MinimalSingleLink) {
    const Network net = load_network("[links]\n1 1 2 10 1000 1\n[od]\n1 2 100\n");
    EXPECT_EQ(net.num_links(), 1u);
    EXPECT_DOUBLE_EQ(net.link(0).theta, 1.0);
}

TEST(LoadNetwork, CommasAndCommentsAreAccepted) {
    const Network net = load_network("[links] # header\n1, 1, 2, 10, 1000, 0.5  # tail\n[od]\n1,2,5\n");
    EXPECT_DOUBLE_EQ(net.link(0).cap_design, 1000.0);
}

TEST(LoadNetwork, RejectsThetaZero) {
    try {
        load_network("[links]\n1 1 2 10 1000 0\n[od]\n1 2 100\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("theta"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(LoadNetwork, RejectsBadFieldsWithLineContext) {
    try {
        load_network("[links]\n1 1 2 10 abc 1\n[od]\n1 2 100\n");
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 2"), std::string::npos);
        EXPECT_NE(msg.find("cap_pcu_h"), std::string::npos);
    }
    EXPECT_THROW(load_network("[links]\n1 1 2 10 1000\n[od]\n1 2 100\n"), ConfigError);
    EXPECT_THROW(load_network("[links]\n1 1 2 10 1000 1.5\n[od]\n1 2 100\n"), ConfigError);
    EXPECT_THROW(load_network("[links]\n1 1 2 -1 1000 1\n[od]\n1 2 100\n"), ConfigError);
    EXPECT_THROW(load_network("[links]\n1 1 1 10 1000 1\n[od]\n1 2 100\n"), ConfigError);
    EXPECT_THROW(load_network("[links]\n1 1 2 10 1000 1\n1 2 3 10 1000 1\n[od]\n1 3 1\n"),
                 ConfigError);
    EXPECT_THROW(load_network("[links]\n1 1 2 10 1000 1\n[od]\n1 2 -5\n"), ConfigError);
    EXPECT_THROW(load_network("1 1 2 10 1000 1\n"), ConfigError);
    EXPECT_THROW(load_network("[nodes]\n"), ConfigError);
}

TEST(LoadNetwork, RejectsDisconnectedOd) {
    EXPECT_THROW(load_network("[links]\n1 1 2 10 1000 1\n2 3 4 10 1000 1\n[od]\n1 4 10\n"),
                 ConfigError);
}

TEST(LoadNetwork, MissingFileIsIoError) {
    EXPECT_THROW(load_network_file("/nonexistent/dir/x.net"), IoError);
}

TEST(EnumerateRoutes, StandinHasExactlySixRoutes) {
    const Network net = standin_network();
    const RouteSet rs = enumerate_routes(net, 6, 13);
    ASSERT_EQ(rs.size(), 6u);
    // Unlimited enumeration finds the same six paths.
    EXPECT_EQ(enumerate_routes(net, 1000, 64).size(), 6u);
    for (const Route& r : rs.routes()) EXPECT_TRUE(is_simple_path(net, r));
    using V = std::vector<std::string>;
    EXPECT_EQ(route_ids(net, rs.route(0)), (V{"1", "4", "9", "12", "13"}));
    EXPECT_EQ(route_ids(net, rs.route(5)), (V{"2", "5", "8", "11"}));
    double prev = 0.0;
    for (const Route& r : rs.routes()) {
        EXPECT_GE(free_flow_time(net, r), prev);
        prev = free_flow_time(net, r);
    }
}

TEST(EnumerateRoutes, ParallelLinksGiveTwoRoutes) {
    const Network net = load_network("[links]\na 1 2 10 100 1\nb 1 2 12 100 1\n[od]\n1 2 10\n");
    const RouteSet rs = enumerate_routes(net, 10, 10);
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_EQ(net.link(rs.route(0).links[0]).id, "a");
}

TEST(EnumerateRoutes, LimitsTruncate) {
    const Network net = standin_network();
    EXPECT_EQ(enumerate_routes(net, 3, 13).size(), 3u);
    EXPECT_EQ(enumerate_routes(net, 6, 4).size(), 3u);  // only the 4-link paths
    EXPECT_THROW(enumerate_routes(net, 6, 3), ConfigError);
}

TEST(EnumerateRoutes, Deterministic) {
    const Network net = standin_network();
    EXPECT_TRUE(enumerate_routes(net, 6, 13) == enumerate_routes(net, 6, 13));
}

TEST(EnumerateRoutes, IncidenceMatchesRoutes) {
    const Network net = standin_network();
    const RouteSet rs = enumerate_routes(net, 6, 13);
    for (std::size_t k = 0; k < rs.size(); ++k) {
        std::size_t count = 0;
        for (std::size_t a = 0; a < net.num_links(); ++a) {
            const bool on = std::find(rs.route(k).links.begin(), rs.route(k).links.end(), a) !=
                            rs.route(k).links.end();
            EXPECT_EQ(rs.delta(a, k), on);
            count += on;
        }
        EXPECT_EQ(count, rs.route(k).links.size());
        EXPECT_TRUE(rs.lambda(0, k));
    }
}

TEST(ExplicitRoutes, UsedInsteadOfEnumeration) {
    const Network net = load_network(
        "[links]\na 1 2 10 100 1\nb 1 2 12 100 1\nc 2 3 1 100 1\n[od]\n1 3 10\n[routes]\n1 3 : b c\n");
    const RouteSet rs = build_routes(net, 10, 10);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(net.link(rs.route(0).links[0]).id, "b");
}

TEST(ExplicitRoutes, NonPathRejected) {
    EXPECT_THROW(build_routes(load_network("[links]\na 1 2 10 100 1\nc 2 3 1 100 1\n[od]\n1 3 10\n"
                                           "[routes]\n1 3 : c a\n"),
                              10, 10),
                 ConfigError);
    EXPECT_THROW(load_network("[links]\na 1 2 10 100 1\n[od]\n1 2 10\n[routes]\n1 2 : zz\n"),
                 ConfigError);
}

TEST(LinkFlows, ZeroAndSingleRoute) {
    const Network net = standin_network();
    const RouteSet rs = enumerate_routes(net, 6, 13);
    const std::vector<double> zero(rs.size(), 0.0);
    for (double v : link_flows(rs, zero)) EXPECT_EQ(v, 0.0);

    // Route 1-4-8-11 alone at 100.
    std::vector<double> f(rs.size(), 0.0);
    f[3] = 100.0;
    const auto v = link_flows(rs, f);
    for (std::size_t a = 0; a < net.num_links(); ++a) {
        const std::string& id = net.link(a).id;
        const bool on = id == "1" || id == "4" || id == "8" || id == "11";
        EXPECT_EQ(v[a], on ? 100.0 : 0.0) << id;
    }
}

TEST(LinkFlows, SharedLinkAdds) {
    const Network net = standin_network();
    const RouteSet rs = enumerate_routes(net, 6, 13);
    std::vector<double> f(rs.size(), 0.0);
    f[0] = 50.0;  // 1-4-9-12-13
    f[3] = 70.0;  // 1-4-8-11
    const auto v = link_flows(rs, f);
    EXPECT_DOUBLE_EQ(v[*net.link_index("4")], 120.0);
    EXPECT_DOUBLE_EQ(v[*net.link_index("1")], 120.0);
    EXPECT_DOUBLE_EQ(v[*net.link_index("9")], 50.0);
}

TEST(LinkFlows, NonnegativeAndLinear) {
    const Network net = standin_network();
    const RouteSet rs = enumerate_routes(net, 6, 13);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1000.0), w(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> f1(rs.size()), f2(rs.size()), mix(rs.size());
        const double a = w(rng), b = w(rng);
        for (std::size_t k = 0; k < rs.size(); ++k) {
            f1[k] = u(rng);
            f2[k] = u(rng);
            mix[k] = a * f1[k] + b * f2[k];
        }
        const auto v1 = link_flows(rs, f1), v2 = link_flows(rs, f2), vm = link_flows(rs, mix);
        for (std::size_t i = 0; i < vm.size(); ++i) {
            EXPECT_GE(v1[i], 0.0);
            EXPECT_NEAR(vm[i], a * v1[i] + b * v2[i], 1e-9 * (1.0 + std::abs(vm[i])));
        }
    }
}

TEST(LinkFlows, LengthMismatchThrows) {
    const Network net = standin_network();
    const RouteSet rs = enumerate_routes(net, 6, 13);
    EXPECT_THROW(link_flows(rs, std::vector<double>(3, 0.0)), DimensionError);
}

TEST(CheckFeasible, Examples) {
    const Network net = standin_network();
    const RouteSet rs = enumerate_routes(net, 6, 13);
    const auto eq = equal_split(rs, net);
    EXPECT_TRUE(check_feasible(rs, eq, net, 1e-9).feasible);

    std::vector<double> short_by_one = eq;
    short_by_one[0] -= 1.0;
    const auto rep = check_feasible(rs, short_by_one, net, 1e-6);
    EXPECT_FALSE(rep.feasible);
    EXPECT_NEAR(rep.max_residual, 1.0, 1e-9);

    std::vector<double> dust = eq;
    dust[0] += eq[2];
    dust[2] = -1e-12;
    EXPECT_TRUE(check_feasible(rs, dust, net, 1e-9).feasible);
}

TEST(NetworkCopies, ThetaAndDemandScaling) {
    const Network net = standin_network();
    const Network t = net.with_uniform_theta(0.6);
    for (const Link& l : t.links()) EXPECT_EQ(l.theta, 0.6);
    EXPECT_DOUBLE_EQ(net.with_scaled_demand(1.5).total_demand(), 6000.0);
    EXPECT_THROW(net.with_uniform_theta(0.0), ConfigError);
}
