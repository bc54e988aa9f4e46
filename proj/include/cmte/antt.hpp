#pragma once

#include <span>

namespace cmte {

/// Average network travel time: flow-weighted mean route travel time,
/// sum_k f_k mu_k / total_demand. Throws DomainError when total_demand <= 0.
double antt(std::span<const double> f, std::span<const double> route_mu, double total_demand);

/// Same quantity from link totals, sum_a v_a E[T_a] / total_demand.
double antt_from_links(std::span<const double> v, std::span<const double> link_mean,
                       double total_demand);

}  // namespace cmte
