#pragma once

#include <span>
#include <vector>

#include "cmte/network.hpp"

namespace cmte {

struct BprParams {
    double beta = 0.15;
    int n = 4;  // integer exponent >= 2
};

/// Throws ConfigError unless beta > 0 and n >= 2.
void validate(const BprParams& p);

/// t0 * (1 + beta * (v / capacity)^n). Throws DomainError on capacity <= 0.
double bpr_time(const Link& link, double v, double capacity, const BprParams& p);

/// E[T_a] with capacity ~ U(theta * C, C).
double link_mean(const Link& link, double v, const BprParams& p);

/// Var[T_a] with capacity ~ U(theta * C, C).
double link_var(const Link& link, double v, const BprParams& p);

/// Per-link moments, indexed like Network::links().
struct LinkMoments {
    std::vector<double> mean;
    std::vector<double> var;
};

/// Route travel-time moments under independent link times:
/// mu_k = sum of link means, sigma_k = sqrt(sum of link variances).
struct RouteMoments {
    std::vector<double> mu;
    std::vector<double> sigma;
};

LinkMoments link_moments(const Network& net, std::span<const double> v, const BprParams& p);

RouteMoments route_moments(const Network& net, const RouteSet& rs, std::span<const double> v,
                           const BprParams& p);

/// Aggregation step alone, for callers that already hold link moments.
RouteMoments aggregate_route_moments(const RouteSet& rs, const LinkMoments& lm);

namespace serial {
LinkMoments link_moments(const Network& net, std::span<const double> v, const BprParams& p);
}

}  // namespace cmte
