#include "mflab/pretense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mflab/parallel.hpp"
#include "mflab/sieve.hpp"
#include "mflab/summation.hpp"
#include "mflab/table.hpp"

namespace mflab {

namespace {

/// Per-prime data for the t-search hot loop over one fixed prime list.
struct PrimeData {
    std::vector<double> inv_p;
    std::vector<double> log_p;
    std::vector<double> re_f;
    std::vector<double> im_f;
    double sum_inv_p = 0.0;
    bool real_valued = true;

    std::size_t size() const { return inv_p.size(); }
};

PrimeData make_prime_data(const FunctionSpec& f, std::span<const std::uint64_t> primes) {
    PrimeData d;
    const auto vals = values_at_primes(f, primes);
    d.inv_p.resize(primes.size());
    d.log_p.resize(primes.size());
    d.re_f.resize(primes.size());
    d.im_f.resize(primes.size());
    CompensatedSum s;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        d.inv_p[i] = 1.0 / static_cast<double>(primes[i]);
        d.log_p[i] = std::log(static_cast<double>(primes[i]));
        d.re_f[i] = vals[i].real();
        d.im_f[i] = vals[i].imag();
        if (d.im_f[i] != 0.0) d.real_valued = false;
        s.add(d.inv_p[i]);
    }
    d.sum_inv_p = s.value();
    return d;
}

/// D(f, n^{it}; N)^2 over the first `count` primes of the data set.
double distance_sq_at(const PrimeData& d, std::size_t count, double t) {
    CompensatedSum s;
    if (t == 0.0) {
        for (std::size_t i = 0; i < count; ++i) s.add((1.0 - d.re_f[i]) * d.inv_p[i]);
    } else if (d.real_valued) {
        for (std::size_t i = 0; i < count; ++i)
            s.add((1.0 - d.re_f[i] * std::cos(t * d.log_p[i])) * d.inv_p[i]);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const double th = t * d.log_p[i];
            s.add((1.0 - (d.re_f[i] * std::cos(th) + d.im_f[i] * std::sin(th))) * d.inv_p[i]);
        }
    }
    return s.value();
}

std::vector<double> search_grid(std::uint64_t N, const SearchConfig& cfg, bool nonneg_only) {
    const double logN = std::log(static_cast<double>(N));
    const double step = cfg.coarse_step_factor / (logN * logN);
    std::vector<double> ts;
    ts.push_back(0.0);
    for (double t = step; t <= 1.0; t += step) ts.push_back(t);
    for (double t = 1.0; t < static_cast<double>(N); t *= std::exp(cfg.geometric_delta))
        ts.push_back(t);
    ts.push_back(static_cast<double>(N));
    if (!nonneg_only) {
        const std::size_t pos = ts.size();
        for (std::size_t i = 1; i < pos; ++i) ts.push_back(-ts[i]);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

MinDistanceResult minimize_over_t(const PrimeData& d, std::size_t count, std::uint64_t N,
                                  const SearchConfig& cfg) {
    const auto ts = search_grid(N, cfg, d.real_valued);
    std::vector<double> vals(ts.size());

    const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
    constexpr std::size_t kGridChunk = 32;
    const auto n_chunks = static_cast<std::int64_t>((ts.size() + kGridChunk - 1) / kGridChunk);
    parallel_for_chunks(n_chunks, threads, [&](std::int64_t chunk) {
        const std::size_t begin = static_cast<std::size_t>(chunk) * kGridChunk;
        const std::size_t end = std::min(ts.size(), begin + kGridChunk);
        for (std::size_t i = begin; i < end; ++i) vals[i] = distance_sq_at(d, count, ts[i]);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (vals[i] < vals[best]) best = i;

    // golden-section refinement inside the bracket around the best grid point
    double a = best > 0 ? ts[best - 1] : ts[best];
    double b = best + 1 < ts.size() ? ts[best + 1] : ts[best];
    double best_t = ts[best];
    double best_v = vals[best];
    if (b > a) {
        constexpr double inv_phi = 0.6180339887498949;
        double x1 = b - inv_phi * (b - a);
        double x2 = a + inv_phi * (b - a);
        double f1 = distance_sq_at(d, count, x1);
        double f2 = distance_sq_at(d, count, x2);
        while (b - a > cfg.refine_width) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = distance_sq_at(d, count, x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = distance_sq_at(d, count, x2);
            }
        }
        const double xm = 0.5 * (a + b);
        const double fm = distance_sq_at(d, count, xm);
        if (fm < best_v) {
            best_v = fm;
            best_t = xm;
        }
    }
    return {best_t, best_v};
}

} // namespace

double distance_sq(const FunctionSpec& f, const FunctionSpec& g, std::uint64_t N) {
    if (N < 2) throw ValidationError("distance_sq: N must be >= 2");
    const auto primes = primes_up_to(N);
    const auto fv = values_at_primes(f, primes);
    const auto gv = values_at_primes(g, primes);
    CompensatedSum s;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const double re = fv[i].real() * gv[i].real() + fv[i].imag() * gv[i].imag();
        s.add((1.0 - re) / static_cast<double>(primes[i]));
    }
    return s.value();
}

double distance_to_archimedean(const FunctionSpec& f, double t, std::uint64_t N) {
    if (N < 2) throw ValidationError("distance_to_archimedean: N must be >= 2");
    const auto primes = primes_up_to(N);
    const PrimeData d = make_prime_data(f, primes);
    return distance_sq_at(d, d.size(), t);
}

DistanceProfile distance_profile(const FunctionSpec& f, const FunctionSpec& g,
                                 std::vector<std::uint64_t> cutoffs) {
    if (cutoffs.empty() || !std::is_sorted(cutoffs.begin(), cutoffs.end()))
        throw ValidationError("distance_profile: cutoffs must be ascending and non-empty");
    DistanceProfile out;
    out.f = f;
    out.twist = g;
    out.values.reserve(cutoffs.size());
    for (std::uint64_t N : cutoffs) out.values.push_back(distance_sq(f, g, N));
    out.cutoffs = std::move(cutoffs);
    return out;
}

MinDistanceResult min_distance(const FunctionSpec& f, std::uint64_t N, const SearchConfig& config) {
    if (N < 2) throw ValidationError("min_distance: N must be >= 2");
    const auto primes = primes_up_to(N);
    const PrimeData d = make_prime_data(f, primes);
    return minimize_over_t(d, d.size(), N, config);
}

cplx aperiodicity_mean(const FunctionSpec& f, std::uint64_t a, std::uint64_t b, std::uint64_t N) {
    if (a < 1) throw ValidationError("aperiodicity_mean: a must be >= 1");
    if (N < 1) throw ValidationError("aperiodicity_mean: N must be >= 1");
    const std::uint64_t top = a * N + b;
    const SievedBlock block = build_range(1, top + 1);
    const EvaluatedTable table = evaluate(f, block);

    if (table.exact_form()) {
        std::vector<std::uint64_t> counts(table.order(), 0);
        const auto expo = table.exponents();
        for (std::uint64_t n = 1; n <= N; ++n) {
            const std::uint16_t e = expo[a * n + b - 1];
            if (e != EvaluatedTable::kZero) ++counts[e];
        }
        cplx acc{0.0, 0.0};
        for (std::uint32_t r = 0; r < table.order(); ++r)
            if (counts[r] > 0) acc += static_cast<double>(counts[r]) * table.roots()[r];
        return acc / static_cast<double>(N);
    }
    const auto vals = table.dense_values();
    const cplx total = blocked_pairwise_csum(static_cast<std::int64_t>(N), [&](std::int64_t i) {
        return vals[a * static_cast<std::uint64_t>(i + 1) + b - 1];
    });
    return total / static_cast<double>(N);
}

const char* to_string(AperiodicityVerdict v) {
    switch (v) {
    case AperiodicityVerdict::EvidenceStrongAperiodic:
        return "evidence-strong-aperiodic";
    case AperiodicityVerdict::EvidenceNot:
        return "evidence-not";
    case AperiodicityVerdict::Inconclusive:
        return "inconclusive";
    }
    return "?";
}

AperiodicityReport strong_aperiodicity_scan(const FunctionSpec& f, std::uint32_t q_max,
                                            std::vector<std::uint64_t> cutoffs,
                                            const ScanConfig& config) {
    if (cutoffs.empty() || !std::is_sorted(cutoffs.begin(), cutoffs.end()))
        throw ValidationError("strong_aperiodicity_scan: cutoffs must be ascending");
    if (q_max < 1) throw ValidationError("strong_aperiodicity_scan: q_max must be >= 1");

    AperiodicityReport report;
    report.f = f;
    report.cutoffs = cutoffs;

    const std::uint64_t top = cutoffs.back();
    const auto primes = primes_up_to(top);
    std::vector<std::size_t> prime_counts;
    prime_counts.reserve(cutoffs.size());
    for (std::uint64_t N : cutoffs)
        prime_counts.push_back(static_cast<std::size_t>(
            std::upper_bound(primes.begin(), primes.end(), N) - primes.begin()));

    for (std::uint32_t q = 1; q <= q_max; ++q) {
        const auto chars = character_group(q);
        for (std::size_t idx = 0; idx < chars.size(); ++idx) {
            const FunctionSpec twisted =
                FunctionSpec::product({f, FunctionSpec::character(chars[idx])});
            const PrimeData d = make_prime_data(twisted, primes);
            AperiodicityReport::Curve curve;
            curve.q = q;
            curve.chi_index = idx;
            for (std::size_t k = 0; k < cutoffs.size(); ++k) {
                const auto r = minimize_over_t(d, prime_counts[k], cutoffs[k], config.search);
                curve.m_values.push_back(r.m_value);
                curve.t_stars.push_back(r.t_star);
            }
            report.curves.push_back(std::move(curve));
        }
    }

    if (cutoffs.size() < 2) {
        report.verdict = AperiodicityVerdict::Inconclusive;
        return report;
    }
    bool any_not = false;
    bool all_strong = true;
    double min_inc = std::numeric_limits<double>::infinity();
    for (const auto& curve : report.curves) {
        const double last = curve.m_values[curve.m_values.size() - 1];
        const double prev = curve.m_values[curve.m_values.size() - 2];
        const double inc = last - prev;
        min_inc = std::min(min_inc, inc);
        if (inc <= 1e-12 || std::max(last, prev) < config.bounded_threshold) any_not = true;
        if (inc < config.strong_increase) all_strong = false;
    }
    report.min_top_increase = min_inc;
    report.verdict = any_not ? AperiodicityVerdict::EvidenceNot
                   : all_strong ? AperiodicityVerdict::EvidenceStrongAperiodic
                                : AperiodicityVerdict::Inconclusive;
    return report;
}

} // namespace mflab
