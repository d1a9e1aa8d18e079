#include "mflab/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "mflab/parallel.hpp"
#include "mflab/summation.hpp"

namespace mflab {

EvaluationWindow EvaluationWindow::make(std::vector<std::uint64_t> grid) {
    if (grid.empty()) throw ValidationError("EvaluationWindow: empty M grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw ValidationError("EvaluationWindow: M grid must be strictly increasing");
    if (grid.front() < 1) throw ValidationError("EvaluationWindow: M must be >= 1");
    return EvaluationWindow{std::move(grid)};
}

namespace {

constexpr std::uint32_t kMaxClassOrder = 4096;
constexpr std::uint16_t kZ = EvaluatedTable::kZero;

std::uint64_t load_u64(const std::uint8_t* p) {
    std::uint64_t w;
    std::memcpy(&w, p, sizeof(w));
    return w;
}

/// Number of odd-parity positions among `count` entries of up to four 0/1
/// byte streams. Bytewise XOR has no carries; byte lanes accumulate up to
/// 255 words before a horizontal fold.
template <int J>
std::uint64_t parity_count(const std::uint8_t* const* streams, std::uint64_t count) {
    std::uint64_t total = 0;
    const std::uint64_t words = count / 8;
    std::uint64_t w = 0;
    while (w < words) {
        const std::uint64_t stop = std::min(words, w + 255);
        std::uint64_t lanes = 0;
        for (; w < stop; ++w) {
            std::uint64_t x = load_u64(streams[0] + w * 8);
            if constexpr (J > 1) x ^= load_u64(streams[1] + w * 8);
            if constexpr (J > 2) x ^= load_u64(streams[2] + w * 8);
            if constexpr (J > 3) x ^= load_u64(streams[3] + w * 8);
            lanes += x;
        }
        for (int b = 0; b < 8; ++b) total += (lanes >> (8 * b)) & 0xFF;
    }
    for (std::uint64_t i = words * 8; i < count; ++i) {
        std::uint8_t x = streams[0][i];
        if constexpr (J > 1) x ^= streams[1][i];
        if constexpr (J > 2) x ^= streams[2][i];
        if constexpr (J > 3) x ^= streams[3][i];
        total += x;
    }
    return total;
}

std::uint64_t parity_count_dispatch(const std::uint8_t* const* streams, int j, std::uint64_t count) {
    switch (j) {
    case 1: return parity_count<1>(streams, count);
    case 2: return parity_count<2>(streams, count);
    case 3: return parity_count<3>(streams, count);
    case 4: return parity_count<4>(streams, count);
    }
    throw Error("parity_count: unsupported stream count");
}

} // namespace

/// One prepared factor: a table, a conjugation flag, and (in exact mode) its
/// exponents folded into the common class order.
struct PreparedCorrelation::Impl {
    std::vector<const EvaluatedTable*> tables;
    std::vector<bool> conj;
    bool exact = false;
    std::uint32_t order = 1;
    bool parity_fast = false;
    std::vector<std::span<const std::uint16_t>> folded; // per factor
    std::vector<std::vector<std::uint16_t>> fold_store; // backing for non-identity folds
    std::vector<std::span<const std::uint8_t>> bits;    // parity_fast only
    std::vector<std::vector<std::uint8_t>> bits_store;
    std::vector<cplx> roots;

    void prepare() {
        std::uint64_t L = 1;
        exact = true;
        for (const auto* t : tables) {
            if (!t->exact_form()) {
                exact = false;
                break;
            }
            L = std::lcm(L, std::uint64_t{t->order()});
            if (L > kMaxClassOrder) {
                exact = false;
                break;
            }
        }
        if (!exact) return;
        order = static_cast<std::uint32_t>(L);
        bool any_zero = false;
        folded.resize(tables.size());
        fold_store.reserve(tables.size()); // spans into it must stay valid
        bits_store.reserve(tables.size());
        for (std::size_t j = 0; j < tables.size(); ++j) {
            const auto& t = *tables[j];
            const std::uint32_t scale = order / t.order();
            const std::uint32_t tl = t.order();
            const auto e = t.exponents();
            any_zero = any_zero || t.has_zero();
            if (scale == 1 && !conj[j]) {
                folded[j] = e; // identity fold: share the table's exponents
                continue;
            }
            // duplicate factors fold identically; reuse the first copy
            bool reused = false;
            for (std::size_t k = 0; k < j; ++k)
                if (tables[k] == tables[j] && conj[k] == conj[j]) {
                    folded[j] = folded[k];
                    reused = true;
                    break;
                }
            if (reused) continue;
            std::vector<std::uint16_t> f(t.size());
            if (conj[j]) {
                for (std::uint64_t i = 0; i < t.size(); ++i)
                    f[i] = e[i] == kZ ? kZ : static_cast<std::uint16_t>(((tl - e[i]) % tl) * scale);
            } else {
                for (std::uint64_t i = 0; i < t.size(); ++i)
                    f[i] = e[i] == kZ ? kZ : static_cast<std::uint16_t>(e[i] * scale);
            }
            fold_store.push_back(std::move(f));
            folded[j] = fold_store.back();
        }
        if (order <= 2 && !any_zero && tables.size() <= 4) {
            parity_fast = true;
            bits.resize(tables.size());
            for (std::size_t j = 0; j < tables.size(); ++j) {
                bool reused = false;
                for (std::size_t k = 0; k < j; ++k)
                    if (tables[k] == tables[j] && conj[k] == conj[j]) {
                        bits[j] = bits[k];
                        reused = true;
                        break;
                    }
                if (reused) continue;
                std::vector<std::uint8_t> b(folded[j].size());
                for (std::size_t i = 0; i < b.size(); ++i)
                    b[i] = static_cast<std::uint8_t>(folded[j][i]);
                bits_store.push_back(std::move(b));
                bits[j] = bits_store.back();
            }
        }
        roots.resize(order);
        for (std::uint32_t r = 0; r < order; ++r) roots[r] = root_of_unity_value(r, order);
    }

    void check_coverage(std::span<const std::int64_t> shifts, std::uint64_t M) const {
        for (std::size_t j = 0; j < tables.size(); ++j) {
            const auto& t = *tables[j];
            const std::int64_t s = shifts[j];
            const std::int64_t first = 1 + s;
            const std::int64_t last = static_cast<std::int64_t>(M) + s;
            const std::int64_t lo_req = first >= 1 ? first : 1;
            const std::uint64_t hi_req =
                std::max<std::uint64_t>(first < 0 ? static_cast<std::uint64_t>(-first) : 0,
                                        last > 0 ? static_cast<std::uint64_t>(last) : 0) +
                1;
            if (static_cast<std::int64_t>(t.lo()) > lo_req || t.hi() < hi_req)
                throw CoverageError(
                    "correlation: shift " + std::to_string(s) + " over M=" + std::to_string(M) +
                    " needs table coverage [" + std::to_string(lo_req) + ", " +
                    std::to_string(hi_req) + ") but [" + std::to_string(t.lo()) + ", " +
                    std::to_string(t.hi()) + ") is available");
        }
    }

    /// First m from which every argument m + s_j indexes the table directly.
    std::uint64_t fast_start(std::span<const std::int64_t> shifts) const {
        std::int64_t start = 1;
        for (std::size_t j = 0; j < tables.size(); ++j)
            start = std::max(start, static_cast<std::int64_t>(tables[j]->lo()) - shifts[j]);
        return static_cast<std::uint64_t>(start);
    }

    void count_fast(std::span<const std::int64_t> shifts, std::uint64_t m_begin, std::uint64_t m_end,
                    std::vector<std::uint64_t>& counts) const {
        const std::uint32_t L = order;
        const std::size_t J = tables.size();
        const std::uint64_t count = m_end - m_begin + 1;
        auto offset = [&](std::size_t j) {
            return static_cast<std::uint64_t>(static_cast<std::int64_t>(m_begin) + shifts[j] -
                                              static_cast<std::int64_t>(tables[j]->lo()));
        };
        if (parity_fast) {
            const std::uint8_t* streams[4] = {};
            for (std::size_t j = 0; j < J; ++j) streams[j] = bits[j].data() + offset(j);
            const std::uint64_t odd = parity_count_dispatch(streams, static_cast<int>(J), count);
            if (L == 2) {
                counts[1] += odd;
                counts[0] += count - odd;
            } else {
                counts[0] += count;
            }
            return;
        }
        switch (J) {
        case 1: {
            const std::uint16_t* a = folded[0].data() + offset(0);
            for (std::uint64_t i = 0; i < count; ++i)
                if (a[i] != kZ) ++counts[a[i]];
            return;
        }
        case 2: {
            const std::uint16_t* a = folded[0].data() + offset(0);
            const std::uint16_t* b = folded[1].data() + offset(1);
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::uint32_t x = a[i], y = b[i];
                if (x == kZ || y == kZ) continue;
                std::uint32_t cls = x + y;
                if (cls >= L) cls -= L;
                ++counts[cls];
            }
            return;
        }
        case 3: {
            const std::uint16_t* a = folded[0].data() + offset(0);
            const std::uint16_t* b = folded[1].data() + offset(1);
            const std::uint16_t* c = folded[2].data() + offset(2);
            for (std::uint64_t i = 0; i < count; ++i) {
                const std::uint32_t x = a[i], y = b[i], z = c[i];
                if (x == kZ || y == kZ || z == kZ) continue;
                std::uint32_t cls = x + y + z;
                while (cls >= L) cls -= L;
                ++counts[cls];
            }
            return;
        }
        default: {
            for (std::uint64_t i = 0; i < count; ++i) {
                std::uint32_t cls = 0;
                bool zero = false;
                for (std::size_t j = 0; j < J; ++j) {
                    const std::uint16_t e = (folded[j].data() + offset(j))[i];
                    if (e == kZ) {
                        zero = true;
                        break;
                    }
                    cls += e;
                }
                if (!zero) ++counts[cls % L];
            }
            return;
        }
        }
    }

    std::vector<cplx> exact_series(std::span<const std::int64_t> shifts,
                                   const EvaluationWindow& window) const {
        const std::uint32_t L = order;
        const std::uint64_t M_max = window.max_m();
        const std::uint64_t fast = std::min(fast_start(shifts), M_max + 1);
        std::vector<std::uint64_t> counts(L, 0);
        std::vector<cplx> out;
        out.reserve(window.m_grid.size());

        std::uint64_t m_done = 0;
        for (std::uint64_t M : window.m_grid) {
            std::uint64_t m = m_done + 1;
            for (; m <= M && m < fast; ++m) {
                // Z-extension: f(0) = 0, f(-n) = f(n)
                std::uint32_t cls = 0;
                bool zero = false;
                for (std::size_t j = 0; j < tables.size(); ++j) {
                    const std::int64_t arg = static_cast<std::int64_t>(m) + shifts[j];
                    if (arg == 0) {
                        zero = true;
                        break;
                    }
                    const auto mag = static_cast<std::uint64_t>(arg < 0 ? -arg : arg);
                    const std::uint16_t e = folded[j][mag - tables[j]->lo()];
                    if (e == kZ) {
                        zero = true;
                        break;
                    }
                    cls += e;
                }
                if (!zero) ++counts[cls % L];
            }
            if (m <= M) count_fast(shifts, m, M, counts);
            m_done = M;

            cplx acc{0.0, 0.0};
            for (std::uint32_t r = 0; r < L; ++r)
                if (counts[r] > 0) acc += static_cast<double>(counts[r]) * roots[r];
            out.push_back(acc / static_cast<double>(M));
        }
        return out;
    }

    std::vector<cplx> dense_series(std::span<const std::int64_t> shifts,
                                   const EvaluationWindow& window) const {
        const std::uint64_t M_max = window.max_m();
        const std::uint64_t fast = std::min(fast_start(shifts), M_max + 1);
        const std::size_t J = tables.size();

        std::vector<cplx> block_sums;
        block_sums.reserve(static_cast<std::size_t>(M_max / kSumBlock + 2));
        CompensatedComplexSum partial;
        std::vector<cplx> out;
        out.reserve(window.m_grid.size());
        std::size_t grid_pos = 0;

        for (std::uint64_t m = 1; m <= M_max; ++m) {
            cplx prod{1.0, 0.0};
            for (std::size_t j = 0; j < J; ++j) {
                cplx v;
                if (m < fast) {
                    v = tables[j]->value(static_cast<std::int64_t>(m) + shifts[j]);
                } else {
                    v = tables[j]->value_at_index(
                        static_cast<std::uint64_t>(static_cast<std::int64_t>(m) + shifts[j] -
                                                   static_cast<std::int64_t>(tables[j]->lo())));
                }
                prod *= conj[j] ? std::conj(v) : v;
            }
            partial.add(prod);
            if (m % kSumBlock == 0) {
                block_sums.push_back(partial.value());
                partial = CompensatedComplexSum{};
            }
            if (grid_pos < window.m_grid.size() && m == window.m_grid[grid_pos]) {
                std::vector<cplx> fold = block_sums;
                fold.push_back(partial.value());
                out.push_back(pairwise_fold(fold) / static_cast<double>(m));
                ++grid_pos;
            }
        }
        return out;
    }

    std::vector<cplx> run(std::span<const std::int64_t> shifts, const EvaluationWindow& window) const {
        if (shifts.size() != tables.size())
            throw ValidationError("PreparedCorrelation: one shift per table required");
        check_coverage(shifts, window.max_m());
        return exact ? exact_series(shifts, window) : dense_series(shifts, window);
    }
};

PreparedCorrelation::PreparedCorrelation(std::vector<const EvaluatedTable*> tables,
                                         std::vector<bool> conjugate) {
    if (tables.empty()) throw ValidationError("PreparedCorrelation: no tables");
    for (const auto* t : tables)
        if (t == nullptr) throw ValidationError("PreparedCorrelation: null table");
    auto impl = std::make_unique<Impl>();
    impl->tables = std::move(tables);
    impl->conj = conjugate.empty() ? std::vector<bool>(impl->tables.size(), false) : std::move(conjugate);
    if (impl->conj.size() != impl->tables.size())
        throw ValidationError("PreparedCorrelation: conjugate flags size mismatch");
    impl->prepare();
    impl_ = std::move(impl);
}

PreparedCorrelation::~PreparedCorrelation() = default;
PreparedCorrelation::PreparedCorrelation(PreparedCorrelation&&) noexcept = default;
PreparedCorrelation& PreparedCorrelation::operator=(PreparedCorrelation&&) noexcept = default;

std::vector<cplx> PreparedCorrelation::series(std::span<const std::int64_t> shifts,
                                              const EvaluationWindow& window) const {
    return impl_->run(shifts, window);
}

cplx PreparedCorrelation::at(std::span<const std::int64_t> shifts, std::uint64_t M) const {
    return impl_->run(shifts, EvaluationWindow::make({M})).front();
}

namespace {

std::vector<std::int64_t> with_zero_prefix(std::span<const std::int64_t> shifts) {
    std::vector<std::int64_t> s;
    s.reserve(shifts.size() + 1);
    s.push_back(0);
    s.insert(s.end(), shifts.begin(), shifts.end());
    return s;
}

} // namespace

cplx correlation(std::span<const EvaluatedTable* const> tables, std::span<const std::int64_t> shifts,
                 std::uint64_t M) {
    if (tables.size() != shifts.size() + 1)
        throw ValidationError("correlation: need one shift per table beyond f_0");
    PreparedCorrelation prep(std::vector<const EvaluatedTable*>(tables.begin(), tables.end()));
    return prep.at(with_zero_prefix(shifts), M);
}

std::vector<cplx> correlation_series(std::span<const EvaluatedTable* const> tables,
                                     std::span<const std::int64_t> shifts,
                                     const EvaluationWindow& window) {
    if (tables.size() != shifts.size() + 1)
        throw ValidationError("correlation_series: need one shift per table beyond f_0");
    PreparedCorrelation prep(std::vector<const EvaluatedTable*>(tables.begin(), tables.end()));
    return prep.series(with_zero_prefix(shifts), window);
}

double ud_statistic(std::span<const cplx> values, cplx c) {
    if (values.empty()) throw ValidationError("ud_statistic: empty series");
    const double total = blocked_pairwise_sum(static_cast<std::int64_t>(values.size()),
                                              [&](std::int64_t i) { return std::abs(values[i] - c); });
    return total / static_cast<double>(values.size());
}

cplx CorrelationSeries::at(std::size_t m_index, std::uint64_t rank) const {
    return data[m_index * box.point_count() + rank];
}

CorrelationSeries correlation_scan(std::vector<FunctionSpec> functions, ShiftFamily family,
                                   LatticeBox box, EvaluationWindow window,
                                   const CorrelatorOptions& options) {
    if (functions.empty()) throw ValidationError("correlation_scan: no functions");
    const std::size_t l = family.shift_count();
    if (functions.size() == 1 && l >= 1) {
        // a single spec fills every slot: the common Chowla-style setup
        functions.assign(l + 1, functions[0]);
    }
    if (functions.size() != l + 1)
        throw ValidationError("correlation_scan: got " + std::to_string(functions.size()) +
                              " functions for " + std::to_string(l) + " shifts; need l+1");
    if (box.arity() != family.arity())
        throw ValidationError("correlation_scan: box arity " + std::to_string(box.arity()) +
                              " does not match family arity " + std::to_string(family.arity()));
    if (family.kind == ShiftFamily::Kind::Polynomial &&
        family.independence != IndependenceStatus::Certified && !options.allow_dependent) {
        std::string msg = "correlation_scan: family lacks an independence certificate";
        if (!family.witness.empty()) {
            msg += " (dependence witness:";
            for (auto w : family.witness) msg += " " + std::to_string(w);
            msg += ")";
        }
        throw ValidationError(msg + "; pass the dependent-family override to explore anyway");
    }
    if (family.kind == ShiftFamily::Kind::Fractional && !family.fractional_hypothesis_ok() &&
        !options.allow_dependent)
        throw ValidationError("correlation_scan: fractional exponents must be positive, distinct "
                              "non-integers; pass the override to explore anyway");

    const std::uint64_t n_points = box.point_count();
    if (n_points > 10'000'000) throw ValidationError("correlation_scan: box too large");

    std::int64_t min_shift = 0, max_shift = 0;
    for (std::uint64_t rank = 0; rank < n_points; ++rank) {
        for (std::int64_t s : family.shifts_at(box.point_at(rank))) {
            min_shift = std::min(min_shift, s);
            max_shift = std::max(max_shift, s);
        }
    }
    const std::uint64_t M_max = window.max_m();
    const std::uint64_t cover =
        M_max + static_cast<std::uint64_t>(std::max<std::int64_t>(max_shift, -min_shift)) + 1;

    const SievedBlock block = build_range(1, cover + 1);
    std::vector<FunctionSpec> distinct;
    std::vector<std::size_t> table_of(functions.size());
    for (std::size_t i = 0; i < functions.size(); ++i) {
        std::size_t found = distinct.size();
        for (std::size_t d = 0; d < distinct.size(); ++d)
            if (distinct[d] == functions[i]) {
                found = d;
                break;
            }
        if (found == distinct.size()) distinct.push_back(functions[i]);
        table_of[i] = found;
    }
    std::vector<EvaluatedTable> tables;
    tables.reserve(distinct.size());
    for (const auto& spec : distinct) tables.push_back(evaluate(spec, block));

    std::vector<const EvaluatedTable*> term_tables(functions.size());
    for (std::size_t i = 0; i < functions.size(); ++i) term_tables[i] = &tables[table_of[i]];
    const PreparedCorrelation prep(term_tables);

    CorrelationSeries series;
    series.functions = functions;
    series.family = std::move(family);
    series.box = std::move(box);
    series.window = window;
    series.data.assign(window.m_grid.size() * n_points, cplx{0.0, 0.0});

    const int threads = options.threads > 0 ? options.threads : default_thread_count();
    parallel_for_chunks(static_cast<std::int64_t>(n_points), threads, [&](std::int64_t rank) {
        const auto point = series.box.point_at(static_cast<std::uint64_t>(rank));
        const auto shifts = series.family.shifts_at(point);
        const auto values = prep.series(with_zero_prefix(shifts), window);
        for (std::size_t k = 0; k < values.size(); ++k)
            series.data[k * n_points + static_cast<std::uint64_t>(rank)] = values[k];
    });

    series.summary.resize(window.m_grid.size());
    for (std::size_t k = 0; k < window.m_grid.size(); ++k)
        series.summary[k] =
            ud_statistic(std::span<const cplx>(series.data).subspan(k * n_points, n_points), {0.0, 0.0});
    return series;
}

// --- short-interval statistics ----------------------------------------------

namespace {

void check_window_coverage(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N,
                           const char* what) {
    if (M < 1 || N < 1) throw ValidationError(std::string(what) + ": M and N must be >= 1");
    if (f.lo() > 1 || f.hi() < M + N + 1)
        throw CoverageError(std::string(what) + ": needs table coverage [1, " +
                            std::to_string(M + N + 1) + ") but [" + std::to_string(f.lo()) + ", " +
                            std::to_string(f.hi()) + ") is available");
}

bool integer_valued(const EvaluatedTable& f) { return f.exact_form() && f.order() <= 2; }

EvaluatedTable table_for(const FunctionSpec& f, std::uint64_t top) {
    return evaluate(f, build_range(1, top + 1));
}

} // namespace

double short_interval_stat(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N) {
    check_window_coverage(f, M, N, "short_interval_stat");

    if (integer_valued(f)) {
        // values are -1/0/+1: prefix sums and the statistic numerator are
        // exact 64-bit integers
        const auto e = f.exponents();
        std::vector<std::int64_t> prefix(M + N + 1, 0);
        for (std::uint64_t n = 1; n <= M + N; ++n) {
            const std::uint16_t x = e[n - f.lo()];
            prefix[n] = prefix[n - 1] + (x == kZ ? 0 : (x == 0 ? 1 : -1));
        }
        std::uint64_t total = 0;
        for (std::uint64_t m = 1; m <= M; ++m) {
            const std::int64_t inner = prefix[m + N] - prefix[m];
            total += static_cast<std::uint64_t>(inner < 0 ? -inner : inner);
        }
        return static_cast<double>(total) / (static_cast<double>(M) * static_cast<double>(N));
    }

    const std::uint64_t base = f.lo();
    auto at = [&](std::uint64_t n) { return f.value_at_index(n - base); };
    std::vector<double> block_sums;
    CompensatedSum partial;
    cplx inner{0.0, 0.0};
    for (std::uint64_t m = 1; m <= M; ++m) {
        if ((m - 1) % kSumBlock == 0) {
            // fresh start kills sliding-window drift at fixed points
            CompensatedComplexSum fresh;
            for (std::uint64_t n = 1; n <= N; ++n) fresh.add(at(m + n));
            inner = fresh.value();
        } else {
            inner += at(m + N) - at(m);
        }
        partial.add(std::abs(inner) / static_cast<double>(N));
        if (m % kSumBlock == 0) {
            block_sums.push_back(partial.value());
            partial = CompensatedSum{};
        }
    }
    block_sums.push_back(partial.value());
    return pairwise_fold(block_sums) / static_cast<double>(M);
}

double short_interval_stat(const FunctionSpec& f, std::uint64_t M, std::uint64_t N) {
    return short_interval_stat(table_for(f, M + N), M, N);
}

double twisted_short_interval_stat(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N,
                                   double t) {
    check_window_coverage(f, M, N, "twisted_short_interval_stat");
    const std::uint64_t base = f.lo();
    auto at = [&](std::uint64_t n) { return f.value_at_index(n - base); };
    // B(m) = sum_n f(m+n) e((m+n) t) slides with two endpoint updates and
    // has the same modulus as the twisted inner sum.
    auto phase = [&](std::uint64_t n) {
        const double x = t * static_cast<double>(n);
        return unit_phase(x - std::floor(x));
    };
    std::vector<double> block_sums;
    CompensatedSum partial;
    cplx inner{0.0, 0.0};
    for (std::uint64_t m = 1; m <= M; ++m) {
        if ((m - 1) % kSumBlock == 0) {
            CompensatedComplexSum fresh;
            for (std::uint64_t n = 1; n <= N; ++n) fresh.add(at(m + n) * phase(m + n));
            inner = fresh.value();
        } else {
            inner += at(m + N) * phase(m + N) - at(m) * phase(m);
        }
        partial.add(std::abs(inner) / static_cast<double>(N));
        if (m % kSumBlock == 0) {
            block_sums.push_back(partial.value());
            partial = CompensatedSum{};
        }
    }
    block_sums.push_back(partial.value());
    return pairwise_fold(block_sums) / static_cast<double>(M);
}

double twisted_short_interval_stat(const FunctionSpec& f, std::uint64_t M, std::uint64_t N,
                                   double t) {
    return twisted_short_interval_stat(table_for(f, M + N), M, N, t);
}

double mrt_stat(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N) {
    check_window_coverage(f, M, N, "mrt_stat");
    const PreparedCorrelation prep({&f, &f}, {true, false});
    const EvaluationWindow window = EvaluationWindow::make({M});
    std::vector<double> inner(N);
    parallel_for_chunks(static_cast<std::int64_t>(N), default_thread_count(), [&](std::int64_t i) {
        const std::int64_t shifts[2] = {0, i + 1};
        inner[static_cast<std::size_t>(i)] = std::abs(prep.series(shifts, window).front());
    });
    const double total = blocked_pairwise_sum(static_cast<std::int64_t>(N),
                                              [&](std::int64_t i) { return inner[i]; });
    return total / static_cast<double>(N);
}

double mrt_stat(const FunctionSpec& f, std::uint64_t M, std::uint64_t N) {
    return mrt_stat(table_for(f, M + N), M, N);
}

FourierSupResult local_fourier_sup(const EvaluatedTable& f, std::uint64_t M, std::uint64_t N,
                                   std::uint32_t oversample) {
    check_window_coverage(f, M, N, "local_fourier_sup");
    if (oversample < 2) throw ValidationError("local_fourier_sup: oversample must be >= 2");
    const std::uint64_t K = std::uint64_t{oversample} * N; // t-grid k/K
    if (K > (std::uint64_t{1} << 24))
        throw ValidationError("local_fourier_sup: oversample * N too large");
    const std::uint64_t base = f.lo();
    auto at = [&](std::uint64_t n) { return f.value_at_index(n - base); };

    std::vector<cplx> roots(K);
    for (std::uint64_t j = 0; j < K; ++j)
        roots[j] = root_of_unity_value(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(K));

    const std::uint64_t n_segments = (M + kSumBlock - 1) / kSumBlock;
    std::vector<double> segment_sums(n_segments, 0.0);

    // C_k(m) = sum_{n<=N} f(m+n) e((m+n) k/K) carries |X_m(k)| and slides in
    // O(K); each fixed segment restarts from a direct DFT so the result is
    // independent of the worker count.
    parallel_for_chunks(static_cast<std::int64_t>(n_segments), default_thread_count(),
                        [&](std::int64_t seg) {
        const std::uint64_t m_begin = static_cast<std::uint64_t>(seg) * kSumBlock + 1;
        const std::uint64_t m_end = std::min(M, m_begin + kSumBlock - 1);
        std::vector<cplx> bins(K, cplx{0.0, 0.0});
        for (std::uint64_t n = 1; n <= N; ++n) {
            const cplx v = at(m_begin + n);
            if (v == cplx{0.0, 0.0}) continue;
            const std::uint64_t step = (m_begin + n) % K;
            for (std::uint64_t k = 0, idx = 0; k < K; ++k, idx = (idx + step) % K)
                bins[k] += v * roots[idx];
        }
        CompensatedSum seg_sum;
        for (std::uint64_t m = m_begin; m <= m_end; ++m) {
            if (m > m_begin) {
                const cplx drop = at(m);
                const cplx add = at(m + N);
                const std::uint64_t i_drop = m % K;
                const std::uint64_t i_add = (m + N) % K;
                for (std::uint64_t k = 0, d = 0, a = 0; k < K;
                     ++k, d = (d + i_drop) % K, a = (a + i_add) % K)
                    bins[k] += add * roots[a] - drop * roots[d];
            }
            double best = 0.0;
            for (std::uint64_t k = 0; k < K; ++k) best = std::max(best, std::norm(bins[k]));
            seg_sum.add(std::sqrt(best) / static_cast<double>(N));
        }
        segment_sums[static_cast<std::uint64_t>(seg)] = seg_sum.value();
    });

    FourierSupResult out;
    out.value = pairwise_fold(segment_sums) / static_cast<double>(M);
    out.gap = two_pi / 2.0 / static_cast<double>(oversample);
    out.upper_bound = out.value + out.gap;
    return out;
}

FourierSupResult local_fourier_sup(const FunctionSpec& f, std::uint64_t M, std::uint64_t N,
                                   std::uint32_t oversample) {
    return local_fourier_sup(table_for(f, M + N), M, N, oversample);
}

cplx katai_pair_stat(const EvaluatedTable& a, std::uint64_t p, std::uint64_t q, std::uint64_t N) {
    if (p == q) throw ValidationError("katai_pair_stat: p and q must be distinct");
    for (std::uint64_t x : {p, q}) {
        const auto fx = factor(x);
        if (fx.factors.size() != 1 || fx.factors[0].second != 1)
            throw ValidationError("katai_pair_stat: " + std::to_string(x) + " is not prime");
    }
    const std::uint64_t need = std::max(p, q) * N;
    if (a.lo() > 1 || a.hi() < need + 1)
        throw CoverageError("katai_pair_stat: needs coverage [1, " + std::to_string(need + 1) +
                            ") but [" + std::to_string(a.lo()) + ", " + std::to_string(a.hi()) +
                            ") is available");
    const std::uint64_t base = a.lo();
    const cplx total = blocked_pairwise_csum(static_cast<std::int64_t>(N), [&](std::int64_t i) {
        const auto n = static_cast<std::uint64_t>(i + 1);
        return a.value_at_index(p * n - base) * std::conj(a.value_at_index(q * n - base));
    });
    return total / static_cast<double>(N);
}

} // namespace mflab
