#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mflab/common.hpp"
#include "mflab/shifts.hpp"
#include "mflab/table.hpp"

namespace mflab {

/// Nested average lengths [M_1 < M_2 < ...]; the computable surrogate for
/// averaging along a subsequence of intervals. One pass over m serves the
/// whole grid: the average at M_{k+1} extends the M_k sum by its increment
/// only.
struct EvaluationWindow {
    std::vector<std::uint64_t> m_grid;

    static EvaluationWindow make(std::vector<std::uint64_t> grid);
    std::uint64_t max_m() const { return m_grid.back(); }
};

/// (1/M) sum_{m<=M} f_0(m) prod_j f_j(m + s_j). tables = (f_0, ..., f_l),
/// shifts = (s_1, ..., s_l). Arguments m + s_j <= 0 go through the
/// Z-extension f(0) = 0, f(-n) = f(n). Deterministic: exact class counting
/// for root-of-unity tables, fixed-block pairwise summation otherwise.
cplx correlation(std::span<const EvaluatedTable* const> tables, std::span<const std::int64_t> shifts,
                 std::uint64_t M);

/// Same pass evaluated at every checkpoint of the window.
std::vector<cplx> correlation_series(std::span<const EvaluatedTable* const> tables,
                                     std::span<const std::int64_t> shifts,
                                     const EvaluationWindow& window);

/// Reusable state for many correlations of one table tuple under varying
/// shifts: the exact-form exponent folding is done once here, so a scan over
/// thousands of shift vectors pays it once. Immutable and safe to share
/// across threads. conjugate[j] conjugates the j-th factor.
class PreparedCorrelation {
public:
    explicit PreparedCorrelation(std::vector<const EvaluatedTable*> tables,
                                 std::vector<bool> conjugate = {});
    ~PreparedCorrelation();
    PreparedCorrelation(PreparedCorrelation&&) noexcept;
    PreparedCorrelation& operator=(PreparedCorrelation&&) noexcept;

    /// shifts = (s_0, s_1, ..., s_l), one per table (s_0 usually 0).
    std::vector<cplx> series(std::span<const std::int64_t> shifts,
                             const EvaluationWindow& window) const;
    cplx at(std::span<const std::int64_t> shifts, std::uint64_t M) const;

private:
    struct Impl;
    std::unique_ptr<const Impl> impl_;
};

/// Mean of |a(n) - c| over a series of box values (Definition of UD-lim,
/// condition (2)).
double ud_statistic(std::span<const cplx> values, cplx c);

struct CorrelatorOptions {
    int threads = 0;            // 0: default_thread_count()
    bool allow_dependent = false; // explicit override for uncertified families
};

struct CorrelationSeries {
    std::vector<FunctionSpec> functions;
    ShiftFamily family;
    LatticeBox box;
    EvaluationWindow window;
    /// data[k * point_count + rank] = c(M_k; n_rank), rank in box row-major order.
    std::vector<cplx> data;
    /// summary[k] = E_{n in box} |c(M_k; n)|.
    std::vector<double> summary;

    cplx at(std::size_t m_index, std::uint64_t rank) const;
};

/// Full (M, n) grid of correlation averages for f_0(m) prod f_j(m + p_j(n)).
/// Polynomial families must carry an independence certificate unless
/// options.allow_dependent is set (the documented exploration mode); the
/// same override admits fractional families that break the distinct
/// non-integer hypothesis.
CorrelationSeries correlation_scan(std::vector<FunctionSpec> functions, ShiftFamily family,
                                   LatticeBox box, EvaluationWindow window,
                                   const CorrelatorOptions& options = {});

// Short-interval and single-correlation statistics. Table-level entry
// points take prebuilt tables covering [1, M+N] (or [1, max(p,q)*N] for the
// Katai pair); spec-level overloads sieve and evaluate internally.

/// (1/M) sum_{m<=M} |(1/N) sum_{n<=N} f(m+n)|.
double short_interval_stat(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N);
double short_interval_stat(const FunctionSpec& f, std::uint64_t M, std::uint64_t N);

/// Same with the unimodular twist e(nt) inside the inner sum.
double twisted_short_interval_stat(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N, double t);
double twisted_short_interval_stat(const FunctionSpec& f, std::uint64_t M, std::uint64_t N, double t);

/// (1/N) sum_{n<=N} |(1/M) sum_{m<=M} f(m+n) conj(f(m))|.
double mrt_stat(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N);
double mrt_stat(const FunctionSpec& f, std::uint64_t M, std::uint64_t N);

struct FourierSupResult {
    double value = 0.0;       // (1/M) sum_m max over the t-grid
    double gap = 0.0;         // certified sup gap: pi / oversample
    double upper_bound = 0.0; // value + gap bounds the true sup average
};

/// (1/M) sum_m max_{t in grid} |(1/N) sum_{n<=N} f(m+n) e(nt)| with the
/// uniform grid t = k/(oversample*N). The grid maximum is a lower bound of
/// the true sup; the derivative bound 2*pi*N per unit t certifies the gap.
FourierSupResult local_fourier_sup(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N,
                                   std::uint32_t oversample);
FourierSupResult local_fourier_sup(const FunctionSpec& f, std::uint64_t M, std::uint64_t N,
                                   std::uint32_t oversample);

/// (1/N) sum_{n<=N} a(pn) conj(a(qn)) for distinct primes p, q. The raw
/// Katai pair average of the twisting sequence a.
cplx katai_pair_stat(const EvaluatedTable& a, std::uint64_t p, std::uint64_t q, std::uint64_t N);

} // namespace mflab
