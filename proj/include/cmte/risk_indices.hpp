#pragma once

#include <string_view>

namespace cmte {

/// Confidence level alpha in (0, 1) and optimism weight lambda in [0, 1].
/// Construction validates; alpha = 1 is not representable (use IndexKind::MTT).
class RiskProfile {
public:
    RiskProfile(double alpha, double lambda);

    double alpha() const { return alpha_; }
    double lambda() const { return lambda_; }

private:
    double alpha_;
    double lambda_;
};

enum class IndexKind { MTT, PTT_TTB, MBTT, METT, CMTT };

std::string_view to_string(IndexKind kind);
/// Accepts the names printed by to_string (case-insensitive). Throws ConfigError.
IndexKind parse_index_kind(std::string_view name);

double std_normal_pdf(double x);

/// Phi(x) via erfc; absolute error well under 1e-12.
double std_normal_cdf(double x);

/// Phi^-1(p) by bracketing and safeguarded Newton. Throws DomainError unless 0 < p < 1.
double std_normal_quantile(double p);

/// Percentile travel time / travel time budget: mu + sigma * Phi^-1(alpha).
double ttb(double mu, double sigma, double alpha);

/// Mean of T ~ N(mu, sigma) below its alpha-quantile.
double mbtt(double mu, double sigma, double alpha);

/// Mean of T ~ N(mu, sigma) above its alpha-quantile.
double mett(double mu, double sigma, double alpha);

/// lambda * MBTT + (1 - lambda) * METT, evaluated in closed form.
double cmtt(double mu, double sigma, const RiskProfile& profile);

/// Coefficient c with index = mu + c * sigma. Negative c is risk-optimistic,
/// zero neutral, positive pessimistic. Only CMTT reads lambda.
double risk_coefficient(IndexKind kind, const RiskProfile& profile);

/// mu + risk_coefficient(kind, profile) * sigma.
double reliability_index(IndexKind kind, double mu, double sigma, const RiskProfile& profile);

}  // namespace cmte
