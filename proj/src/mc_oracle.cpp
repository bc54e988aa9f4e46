#include "cmte/mc_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <span>

#include "cmte/errors.hpp"
#include "cmte/risk_indices.hpp"
#include "cmte/text_format.hpp"

namespace cmte {

namespace {

std::mt19937_64 chunk_engine(std::uint64_t seed, std::size_t chunk) {
    const auto c = static_cast<std::uint64_t>(chunk);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    return std::mt19937_64(seq);
}

// [0, 1) with 53 random bits.
double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::size_t chunk_count(std::size_t n) { return (n + kChunkSamples - 1) / kChunkSamples; }

std::span<double> chunk_span(std::vector<double>& x, std::size_t c) {
    const std::size_t begin = c * kChunkSamples;
    return std::span<double>(x).subspan(begin, std::min(kChunkSamples, x.size() - begin));
}

void fill_capacity_chunk(std::span<double> out, std::size_t chunk, const Link& link, double v,
                         const BprParams& p, std::uint64_t seed) {
    auto g = chunk_engine(seed, chunk);
    const double lo = link.theta * link.cap_design;
    const double width = link.cap_design - lo;
    for (double& x : out) {
        const double capacity = lo + width * unit(g);
        x = bpr_time(link, v, capacity, p);
    }
}

// Box-Muller, both outputs used.
void fill_normal_chunk(std::span<double> out, std::size_t chunk, double mu, double sigma,
                       std::uint64_t seed) {
    auto g = chunk_engine(seed, chunk);
    for (std::size_t i = 0; i < out.size(); i += 2) {
        const double u1 = 1.0 - unit(g);  // (0, 1]
        const double u2 = unit(g);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[i] = mu + sigma * (r * std::cos(angle));
        if (i + 1 < out.size()) out[i + 1] = mu + sigma * (r * std::sin(angle));
    }
}

template <bool Parallel, class Fill>
std::vector<double> draw(std::size_t n, Fill&& fill) {
    std::vector<double> x(n);
    const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(n));
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < chunks; ++c)
            fill(chunk_span(x, static_cast<std::size_t>(c)), static_cast<std::size_t>(c));
    } else {
        for (std::ptrdiff_t c = 0; c < chunks; ++c)
            fill(chunk_span(x, static_cast<std::size_t>(c)), static_cast<std::size_t>(c));
    }
    return x;
}

// Sum of term(x_i) over [begin, end), accumulated per chunk and combined in
// chunk order.
template <bool Parallel, class Term>
double chunked_sum(std::span<const double> x, Term&& term) {
    const std::size_t chunks = chunk_count(x.size());
    std::vector<double> partial(chunks, 0.0);
    auto body = [&](std::size_t c) {
        const std::size_t begin = c * kChunkSamples;
        const std::size_t end = std::min(x.size(), begin + kChunkSamples);
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(x[i]);
        partial[c] = s;
    };
    const auto n = static_cast<std::ptrdiff_t>(chunks);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < n; ++c) body(static_cast<std::size_t>(c));
    } else {
        for (std::ptrdiff_t c = 0; c < n; ++c) body(static_cast<std::size_t>(c));
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

struct SampleStats {
    double mean = 0.0;
    double var = 0.0;      // unbiased
    double m4 = 0.0;       // fourth central moment
    std::size_t n = 0;
};

// Shifted by the first sample so a constant sample set yields its value and
// zero variance exactly.
template <bool Parallel>
SampleStats sample_stats(std::span<const double> x, double shift) {
    SampleStats s;
    s.n = x.size();
    const double nd = static_cast<double>(s.n);
    const double d1 = chunked_sum<Parallel>(x, [shift](double xi) { return xi - shift; });
    const double offset = d1 / nd;
    s.mean = shift + offset;
    const double c = shift + offset;
    const double m2 = chunked_sum<Parallel>(x, [c](double xi) {
        const double d = xi - c;
        return d * d;
    });
    const double m4 = chunked_sum<Parallel>(x, [c](double xi) {
        const double d = xi - c;
        return d * d * d * d;
    });
    s.var = s.n > 1 ? m2 / (nd - 1.0) : 0.0;
    s.m4 = m4 / nd;
    return s;
}

template <bool Parallel>
LinkMomentEstimate link_moments_impl(const Link& link, double v, const BprParams& p,
                                     const McConfig& cfg) {
    validate(cfg);
    validate(p);
    if (!(v >= 0.0)) throw DomainError("link flow must be >= 0");
    auto x = draw<Parallel>(cfg.samples, [&](std::span<double> out, std::size_t c) {
        fill_capacity_chunk(out, c, link, v, p, cfg.seed);
    });
    const SampleStats s = sample_stats<Parallel>(x, x.front());
    const double nd = static_cast<double>(s.n);
    LinkMomentEstimate est;
    est.mean = {s.mean, std::sqrt(s.var / nd)};
    est.var = {s.var, std::sqrt(std::max(0.0, s.m4 - s.var * s.var) / nd)};
    return est;
}

struct TailSums {
    double sum = 0.0;
    double sumsq = 0.0;
};

TailSums tail_sums(std::span<const double> x, double mean_guess) {
    TailSums t;
    for (double xi : x) {
        const double d = xi - mean_guess;
        t.sum += d;
        t.sumsq += d * d;
    }
    return t;
}

template <bool Parallel>
TailEstimate tail_means_impl(double mu, double sigma, double alpha, const McConfig& cfg) {
    validate(cfg);
    if (!(sigma > 0.0)) throw DomainError("tail sampling needs sigma > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie strictly inside (0, 1)");

    auto x = draw<Parallel>(cfg.samples, [&](std::span<double> out, std::size_t c) {
        fill_normal_chunk(out, c, mu, sigma, cfg.seed);
    });
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    const SampleStats all = sample_stats<Parallel>(x, mu);

    // Lower-tail inclusive order statistic: xi = x_(ceil(alpha N)).
    auto rank = static_cast<std::size_t>(std::ceil(alpha * nd));
    rank = std::clamp<std::size_t>(rank, 1, n);
    if (rank == n) throw DomainError("alpha too close to 1 for the sample count");
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(rank - 1), x.end());
    const double xi = x[rank - 1];

    std::span<const double> lower(x.data(), rank);
    std::span<const double> upper(x.data() + rank, n - rank);
    const TailSums ls = tail_sums(lower, mu);
    const TailSums us = tail_sums(upper, mu);

    const double nb = static_cast<double>(rank);
    const double ne = static_cast<double>(n - rank);
    const double below = mu + ls.sum / nb;
    const double excess = mu + us.sum / ne;
    const double var_below = nb > 1 ? (ls.sumsq - ls.sum * ls.sum / nb) / (nb - 1.0) : 0.0;
    const double var_excess = ne > 1 ? (us.sumsq - us.sum * us.sum / ne) / (ne - 1.0) : 0.0;
    const double a_hat = nb / nd;

    TailEstimate t;
    t.below_count = rank;
    // Asymptotic SEs of tail means taken beyond an estimated quantile, from
    // the representation eta = xi + E[(T - xi)+] / (1 - a):
    //   se^2 = [Var(T | tail) + a' (tail mean - xi)^2] / (p_tail N)
    // where a' is the probability of the opposite tail.
    t.below.value = below;
    t.below.se = std::sqrt(std::max(0.0, var_below + (1.0 - a_hat) * (xi - below) * (xi - below)) /
                           (a_hat * nd));
    t.excess.value = excess;
    t.excess.se = std::sqrt(std::max(0.0, var_excess + a_hat * (excess - xi) * (excess - xi)) /
                            ((1.0 - a_hat) * nd));
    // Quantile SE sqrt(a(1-a)/N) / f(xi), density from the fitted normal.
    const double sd = std::sqrt(all.var);
    const double dens = std_normal_pdf((xi - all.mean) / sd) / sd;
    t.percentile.value = xi;
    t.percentile.se = std::sqrt(alpha * (1.0 - alpha) / nd) / dens;
    return t;
}

}  // namespace

void validate(const McConfig& cfg) {
    if (cfg.samples < 10'000)
        throw ConfigError("Monte-Carlo sample count must be >= 10000, got " +
                          std::to_string(cfg.samples));
    if (!(cfg.ci_multiplier > 0.0)) throw ConfigError("ci_multiplier must be > 0");
}

bool within_band(double closed_form, const Estimate& est, double k) {
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(closed_form), std::abs(est.value));
    return std::abs(closed_form - est.value) <= k * est.se + slack;
}

LinkMomentEstimate mc_link_moments(const Link& link, double v, const BprParams& p,
                                   const McConfig& cfg) {
    return link_moments_impl<true>(link, v, p, cfg);
}

TailEstimate mc_tail_means(double mu, double sigma, double alpha, const McConfig& cfg) {
    return tail_means_impl<true>(mu, sigma, alpha, cfg);
}

namespace serial {

LinkMomentEstimate mc_link_moments(const Link& link, double v, const BprParams& p,
                                   const McConfig& cfg) {
    return link_moments_impl<false>(link, v, p, cfg);
}

TailEstimate mc_tail_means(double mu, double sigma, double alpha, const McConfig& cfg) {
    return tail_means_impl<false>(mu, sigma, alpha, cfg);
}

}  // namespace serial

std::vector<OracleRow> run_oracle_suite(const OracleSuiteConfig& cfg) {
    std::vector<OracleRow> rows;
    auto add = [&](std::string claim, double closed, const Estimate& e, double k) {
        rows.push_back({std::move(claim), closed, e.value, e.se, within_band(closed, e, k)});
    };

    const Network net = standin_network();
    for (double theta : {0.6, 0.8}) {
        for (const Link& base : net.links()) {
            Link link = base;
            link.theta = theta;
            for (double ratio : {0.5, 1.0, 1.5}) {
                const double v = ratio * link.cap_design;
                const auto est = mc_link_moments(link, v, cfg.bpr, cfg.link);
                const std::string tag = "link" + link.id + ":theta=" + format_number(theta) +
                                        ":v=" + format_number(ratio) + "C";
                add(tag + ":mean", link_mean(link, v, cfg.bpr), est.mean, cfg.link.ci_multiplier);
                add(tag + ":var", link_var(link, v, cfg.bpr), est.var, cfg.link.ci_multiplier);
            }
        }
    }

    struct Triple {
        double mu, sigma, alpha;
    };
    for (const Triple& t : {Triple{20, 3, 0.9}, Triple{15, 5, 0.8}, Triple{30, 1, 0.95},
                            Triple{20, 3, 0.5}}) {
        const auto est = mc_tail_means(t.mu, t.sigma, t.alpha, cfg.tail);
        const std::string tag = "normal(" + format_number(t.mu) + "," + format_number(t.sigma) +
                                "):alpha=" + format_number(t.alpha);
        const double k = cfg.tail.ci_multiplier;
        add(tag + ":mbtt", mbtt(t.mu, t.sigma, t.alpha), est.below, k);
        add(tag + ":mett", mett(t.mu, t.sigma, t.alpha), est.excess, k);
        add(tag + ":ttb", ttb(t.mu, t.sigma, t.alpha), est.percentile, k);
        // Recombination of the two tail means gives back the mean.
        const double a = t.alpha;
        const Estimate mix{a * est.below.value + (1.0 - a) * est.excess.value,
                           t.sigma / std::sqrt(static_cast<double>(cfg.tail.samples))};
        add(tag + ":recombined_mean", t.mu, mix, k);
    }
    return rows;
}

void write_oracle_report(std::ostream& os, const std::vector<OracleRow>& rows,
                         const OracleSuiteConfig& cfg) {
    os << "# generator=" << kGeneratorName << " seed_link=" << cfg.link.seed
       << " seed_tail=" << cfg.tail.seed << " link_samples=" << cfg.link.samples
       << " tail_samples=" << cfg.tail.samples << " beta=" << format_number(cfg.bpr.beta)
       << " n=" << cfg.bpr.n << "\n";
    os << "claim,closed_form,mc_estimate,se,pass\n";
    for (const OracleRow& r : rows) {
        os << r.claim << ',' << format_number(r.closed_form) << ',' << format_number(r.estimate)
           << ',' << format_number(r.se) << ',' << (r.pass ? "pass" : "fail") << '\n';
    }
}

}  // namespace cmte
