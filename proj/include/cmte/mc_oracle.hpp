#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cmte/network.hpp"
#include "cmte/stochastic_bpr.hpp"

namespace cmte {

/// Sampling is split into fixed-size chunks, each driven by its own
/// mt19937_64 seeded from (seed, chunk index) through std::seed_seq. The
/// chunk layout does not depend on the thread count, so results are
/// bitwise reproducible for a given seed.
inline constexpr std::string_view kGeneratorName = "mt19937_64+seed_seq(seed,chunk)";
inline constexpr std::size_t kChunkSamples = std::size_t{1} << 16;

struct McConfig {
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 20121129;
    double ci_multiplier = 3.0;
};

/// Throws ConfigError when samples < 10^4 or ci_multiplier <= 0.
void validate(const McConfig& cfg);

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// |closed_form - est.value| <= k * est.se, with a few ulps of slack for
/// degenerate zero-variance estimates.
bool within_band(double closed_form, const Estimate& est, double k);

struct LinkMomentEstimate {
    Estimate mean;
    Estimate var;  // SE from the fourth central moment
};

/// Samples capacity ~ U(theta * C, C) and evaluates the BPR time.
LinkMomentEstimate mc_link_moments(const Link& link, double v, const BprParams& p,
                                   const McConfig& cfg);

struct TailEstimate {
    Estimate below;       // mean of samples at or below the empirical alpha-quantile
    Estimate excess;      // mean of samples above it
    Estimate percentile;  // order statistic ceil(alpha * N)
    std::size_t below_count = 0;
};

/// Samples N(mu, sigma). Requires sigma > 0 and 0 < alpha < 1.
TailEstimate mc_tail_means(double mu, double sigma, double alpha, const McConfig& cfg);

namespace serial {
LinkMomentEstimate mc_link_moments(const Link& link, double v, const BprParams& p,
                                   const McConfig& cfg);
TailEstimate mc_tail_means(double mu, double sigma, double alpha, const McConfig& cfg);
}  // namespace serial

struct OracleRow {
    std::string claim;
    double closed_form = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    bool pass = false;
};

struct OracleSuiteConfig {
    McConfig link{1'000'000, 20121129, 3.0};
    McConfig tail{10'000'000, 20121129, 3.0};
    BprParams bpr{};
};

/// Every closed-form link-moment and tail-mean claim checked against sampling:
/// stand-in network links at v in {0.5, 1, 1.5} x capacity and theta in
/// {0.6, 0.8}; tail means and percentiles for a fixed set of (mu, sigma, alpha).
std::vector<OracleRow> run_oracle_suite(const OracleSuiteConfig& cfg);

/// Delimiter-separated report with a generator/seed comment line.
void write_oracle_report(std::ostream& os, const std::vector<OracleRow>& rows,
                         const OracleSuiteConfig& cfg);

}  // namespace cmte
