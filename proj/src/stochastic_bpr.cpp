#include "cmte/stochastic_bpr.hpp"

#include <array>
#include <cmath>
#include <string>

#include "cmte/errors.hpp"

namespace cmte {

namespace {

constexpr double kDeterministicBand = 1e-9;
constexpr int kMaxExponent = 32;

// For U ~ U(theta, 1) and integer k >= 2,
//   E[U^-k] = (1 - theta^(1-k)) / ((1 - theta)(1 - k)) = 1/(k-1) * sum_{i=1}^{k-1} theta^-i.
// Writing theta^-1 = 1 + d turns this into a polynomial in d with
// nonnegative coefficients. poly[j] is the coefficient of d^j.
using Poly = std::array<double, 2 * kMaxExponent>;

Poly inverse_moment_poly(int k) {
    Poly poly{};
    // Pascal row for (1+d)^i, accumulated over i = 1..k-1.
    std::array<double, 2 * kMaxExponent> row{};
    row[0] = 1.0;
    for (int i = 1; i <= k - 1; ++i) {
        for (int j = i; j >= 1; --j) row[j] += row[j - 1];
        for (int j = 0; j <= i; ++j) poly[j] += row[j];
    }
    for (double& c : poly) c /= static_cast<double>(k - 1);
    return poly;
}

double horner(const Poly& poly, int degree, double d) {
    double acc = 0.0;
    for (int j = degree; j >= 0; --j) acc = acc * d + poly[j];
    return acc;
}

double inverse_moment(int k, double theta) {
    // Direct sum is well conditioned for theta in (0, 1].
    double inv = 1.0 / theta;
    double term = 1.0;
    double sum = 0.0;
    for (int i = 1; i <= k - 1; ++i) {
        term *= inv;
        sum += term;
    }
    return sum / static_cast<double>(k - 1);
}

// Var[U^-n] = E[U^-2n] - E[U^-n]^2 with the constant and linear terms in d
// cancelled symbolically, so the result stays accurate as theta -> 1.
double inverse_power_variance(int n, double theta) {
    const Poly a = inverse_moment_poly(2 * n);
    const Poly b = inverse_moment_poly(n);
    Poly b2{};
    for (int i = 0; i <= n - 1; ++i)
        for (int j = 0; j <= n - 1; ++j) b2[i + j] += b[i] * b[j];
    Poly diff{};
    for (int j = 2; j <= 2 * n - 1; ++j) diff[j] = a[j] - b2[j];
    const double d = 1.0 / theta - 1.0;
    double v = horner(diff, 2 * n - 1, d);
    return v > 0.0 ? v : 0.0;
}

void check_flow(double v) {
    if (!(v >= 0.0)) throw DomainError("link flow must be >= 0, got " + std::to_string(v));
}

}  // namespace

void validate(const BprParams& p) {
    if (!(p.beta > 0.0) || !std::isfinite(p.beta))
        throw ConfigError("BPR beta must be > 0, got " + std::to_string(p.beta));
    if (p.n < 2 || p.n > kMaxExponent)
        throw ConfigError("BPR exponent n must be an integer in [2, " +
                          std::to_string(kMaxExponent) + "], got " + std::to_string(p.n));
}

double bpr_time(const Link& link, double v, double capacity, const BprParams& p) {
    if (!(capacity > 0.0)) throw DomainError("capacity must be > 0, got " + std::to_string(capacity));
    check_flow(v);
    return link.t0 * (1.0 + p.beta * std::pow(v / capacity, p.n));
}

double link_mean(const Link& link, double v, const BprParams& p) {
    check_flow(v);
    if (std::abs(1.0 - link.theta) < kDeterministicBand) return bpr_time(link, v, link.cap_design, p);
    const double ratio_n = std::pow(v / link.cap_design, p.n);
    return link.t0 + p.beta * link.t0 * ratio_n * inverse_moment(p.n, link.theta);
}

double link_var(const Link& link, double v, const BprParams& p) {
    check_flow(v);
    if (std::abs(1.0 - link.theta) < kDeterministicBand) return 0.0;
    const double ratio_n = std::pow(v / link.cap_design, p.n);
    const double scale = p.beta * link.t0 * ratio_n;
    return scale * scale * inverse_power_variance(p.n, link.theta);
}

namespace serial {

LinkMoments link_moments(const Network& net, std::span<const double> v, const BprParams& p) {
    if (v.size() != net.num_links()) throw DimensionError("link flow vector length mismatch");
    LinkMoments lm{std::vector<double>(v.size()), std::vector<double>(v.size())};
    for (std::size_t a = 0; a < v.size(); ++a) {
        lm.mean[a] = link_mean(net.link(a), v[a], p);
        lm.var[a] = link_var(net.link(a), v[a], p);
    }
    return lm;
}

}  // namespace serial

LinkMoments link_moments(const Network& net, std::span<const double> v, const BprParams& p) {
    if (v.size() != net.num_links()) throw DimensionError("link flow vector length mismatch");
    const auto n = static_cast<std::ptrdiff_t>(v.size());
    LinkMoments lm{std::vector<double>(v.size()), std::vector<double>(v.size())};
    // Validate up front: exceptions must not escape the parallel region.
    for (double x : v) check_flow(x);
#pragma omp parallel for schedule(static) if (n >= 512)
    for (std::ptrdiff_t a = 0; a < n; ++a) {
        const auto i = static_cast<std::size_t>(a);
        lm.mean[i] = link_mean(net.link(i), v[i], p);
        lm.var[i] = link_var(net.link(i), v[i], p);
    }
    return lm;
}

RouteMoments aggregate_route_moments(const RouteSet& rs, const LinkMoments& lm) {
    RouteMoments m{std::vector<double>(rs.size(), 0.0), std::vector<double>(rs.size(), 0.0)};
    for (std::size_t k = 0; k < rs.size(); ++k) {
        double mu = 0.0, var = 0.0;
        for (std::size_t a : rs.route(k).links) {
            mu += lm.mean[a];
            var += lm.var[a];
        }
        m.mu[k] = mu;
        m.sigma[k] = std::sqrt(var);
    }
    return m;
}

RouteMoments route_moments(const Network& net, const RouteSet& rs, std::span<const double> v,
                           const BprParams& p) {
    if (rs.num_links() != net.num_links()) throw DimensionError("route set built for another network");
    return aggregate_route_moments(rs, link_moments(net, v, p));
}

}  // namespace cmte
