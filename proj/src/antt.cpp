#include "cmte/antt.hpp"

#include <string>

#include "cmte/errors.hpp"

namespace cmte {

namespace {

double weighted_mean(std::span<const double> w, std::span<const double> x, double total) {
    if (w.size() != x.size()) throw DimensionError("ANTT weight/value length mismatch");
    if (!(total > 0.0)) throw DomainError("ANTT needs positive total demand, got " + std::to_string(total));
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return s / total;
}

}  // namespace

double antt(std::span<const double> f, std::span<const double> route_mu, double total_demand) {
    return weighted_mean(f, route_mu, total_demand);
}

double antt_from_links(std::span<const double> v, std::span<const double> link_mean,
                       double total_demand) {
    return weighted_mean(v, link_mean, total_demand);
}

}  // namespace cmte
