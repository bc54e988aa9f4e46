#include "cmte/risk_indices.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "cmte/errors.hpp"

namespace cmte {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie strictly inside (0, 1), got " + std::to_string(alpha));
}

void check_sigma(double sigma) {
    if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0, got " + std::to_string(sigma));
}

// phi(Phi^-1(alpha)), the density at the alpha-quantile.
double density_at_quantile(double alpha) {
    const double z = std_normal_quantile(alpha);
    return std_normal_pdf(z);
}

}  // namespace

RiskProfile::RiskProfile(double alpha, double lambda) : alpha_(alpha), lambda_(lambda) {
    check_alpha(alpha);
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw DomainError("lambda must lie in [0, 1], got " + std::to_string(lambda));
}

std::string_view to_string(IndexKind kind) {
    switch (kind) {
    case IndexKind::MTT: return "MTT";
    case IndexKind::PTT_TTB: return "PTT_TTB";
    case IndexKind::MBTT: return "MBTT";
    case IndexKind::METT: return "METT";
    case IndexKind::CMTT: return "CMTT";
    }
    return "?";
}

IndexKind parse_index_kind(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (IndexKind k : {IndexKind::MTT, IndexKind::PTT_TTB, IndexKind::MBTT, IndexKind::METT,
                        IndexKind::CMTT})
        if (upper == to_string(k)) return k;
    if (upper == "TTB" || upper == "PTT") return IndexKind::PTT_TTB;
    throw ConfigError("unknown index kind '" + std::string(name) + "'");
}

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("quantile probability must lie strictly inside (0, 1), got " +
                          std::to_string(p));
    // Work in the lower half and reflect; Phi(x) for x < 0 keeps full
    // relative precision through erfc.
    const bool upper = p > 0.5;
    const double target = upper ? 1.0 - p : p;
    if (target == 0.5) return 0.0;

    double lo = -40.0, hi = 0.0;
    // Initial guess from the tail approximation sqrt(-2 ln p).
    double x = -std::sqrt(-2.0 * std::log(target));
    x = std::clamp(x, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double g = std_normal_cdf(x) - target;
        if (g == 0.0) break;
        if (g > 0.0) hi = x;
        else lo = x;
        const double dens = std_normal_pdf(x);
        double next = dens > 0.0 ? x - g / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return upper ? -x : x;
}

double ttb(double mu, double sigma, double alpha) {
    check_alpha(alpha);
    check_sigma(sigma);
    return mu + sigma * std_normal_quantile(alpha);
}

double mbtt(double mu, double sigma, double alpha) {
    check_alpha(alpha);
    check_sigma(sigma);
    return mu - sigma * density_at_quantile(alpha) / alpha;
}

double mett(double mu, double sigma, double alpha) {
    check_alpha(alpha);
    check_sigma(sigma);
    return mu + sigma * density_at_quantile(alpha) / (1.0 - alpha);
}

double cmtt(double mu, double sigma, const RiskProfile& profile) {
    check_sigma(sigma);
    const double a = profile.alpha();
    return mu + (a - profile.lambda()) * sigma * density_at_quantile(a) / (a * (1.0 - a));
}

double risk_coefficient(IndexKind kind, const RiskProfile& profile) {
    const double a = profile.alpha();
    switch (kind) {
    case IndexKind::MTT: return 0.0;
    case IndexKind::PTT_TTB: return std_normal_quantile(a);
    case IndexKind::MBTT: return -density_at_quantile(a) / a;
    case IndexKind::METT: return density_at_quantile(a) / (1.0 - a);
    case IndexKind::CMTT: return (a - profile.lambda()) * density_at_quantile(a) / (a * (1.0 - a));
    }
    return 0.0;
}

double reliability_index(IndexKind kind, double mu, double sigma, const RiskProfile& profile) {
    check_sigma(sigma);
    return mu + risk_coefficient(kind, profile) * sigma;
}

}  // namespace cmte
