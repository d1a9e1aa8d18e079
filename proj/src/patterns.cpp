#include "mflab/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mflab/parallel.hpp"
#include "mflab/sieve.hpp"
#include "mflab/summation.hpp"
#include "mflab/table.hpp"

namespace mflab {

void PatternQuery::validate() const {
    const std::size_t k = slots();
    if (k == 0) throw ValidationError("pattern query: no slots");
    if (mode == Mode::Sign) {
        if (eps.size() != k) throw ValidationError("pattern query: eps size must match functions");
        for (int e : eps)
            if (e != 1 && e != -1) throw ValidationError("pattern query: eps entries must be +1 or -1");
    } else {
        if (residues.size() != k || counters.size() != k)
            throw ValidationError("pattern query: moduli, residues, counters must have equal size");
        std::uint64_t patterns = 1;
        for (std::size_t j = 0; j < k; ++j) {
            if (moduli[j] < 1) throw ValidationError("pattern query: moduli must be >= 1");
            if (residues[j] >= moduli[j])
                throw ValidationError("pattern query: residue " + std::to_string(residues[j]) +
                                      " out of range for modulus " + std::to_string(moduli[j]));
            patterns *= moduli[j];
            if (patterns > 1000000)
                throw ValidationError("pattern query: more than 1e6 residue patterns");
        }
    }
    if (k > 1 && family.shift_count() != k - 1)
        throw ValidationError("pattern query: family must provide " + std::to_string(k - 1) +
                              " shifts, has " + std::to_string(family.shift_count()));
}

namespace {

constexpr std::uint16_t kZ = EvaluatedTable::kZero;

std::string sign_label(std::size_t pattern, std::size_t slots) {
    std::string s(slots, '+');
    for (std::size_t j = 0; j < slots; ++j)
        if ((pattern >> j) & 1) s[j] = '-';
    return s;
}

std::string residue_label(std::size_t pattern, std::span<const std::uint32_t> moduli) {
    std::string s;
    for (std::size_t j = 0; j < moduli.size(); ++j) {
        if (j) s += ',';
        s += std::to_string(pattern % moduli[j]);
        pattern /= moduli[j];
    }
    return s;
}

/// Everything fixed across box points: the sieved block, per-slot byte
/// streams for direct counting, and the prepared correlations plus
/// coefficient matrix for the expansion route.
struct PatternEngine {
    PatternQuery::Mode mode;
    std::size_t slots = 0;
    std::size_t n_patterns = 0;
    double target = 1.0;
    std::vector<std::string> labels;

    SievedBlock block;                          // [1, cover)
    std::vector<EvaluatedTable> tables;         // distinct evaluated specs
    std::vector<std::vector<std::uint8_t>> streams; // distinct direct-count byte streams
    std::vector<std::size_t> stream_of_slot;
    std::vector<std::uint64_t> weight_of_slot;  // mixed-radix multiplier

    struct Prep {
        PreparedCorrelation prep;
        std::vector<std::size_t> active; // slot indices with a live factor
    };
    std::vector<Prep> preps;
    // expansion(pattern) = coeff0(pattern) + sum_t coeff[t][pattern] * T_t
    std::vector<cplx> coeff0;
    std::vector<std::vector<cplx>> coeff;

    PatternEngine(const PatternQuery& q, std::uint64_t m_max, std::uint64_t max_abs_shift) {
        q.validate();
        mode = q.mode;
        slots = q.slots();
        const std::uint64_t cover = m_max + max_abs_shift + 1;
        block = build_range(1, cover + 1);

        if (mode == PatternQuery::Mode::Sign)
            build_sign(q);
        else
            build_residue(q);
    }

    void build_sign(const PatternQuery& q) {
        n_patterns = std::size_t{1} << slots;
        target = 1.0 / static_cast<double>(n_patterns);
        for (std::size_t p = 0; p < n_patterns; ++p) labels.push_back(sign_label(p, slots));

        // one evaluated table and one 0/1 stream per distinct function
        std::vector<FunctionSpec> distinct;
        stream_of_slot.resize(slots);
        std::vector<std::size_t> table_of_slot(slots);
        for (std::size_t j = 0; j < slots; ++j) {
            std::size_t found = distinct.size();
            for (std::size_t d = 0; d < distinct.size(); ++d)
                if (distinct[d] == q.functions[j]) {
                    found = d;
                    break;
                }
            if (found == distinct.size()) distinct.push_back(q.functions[j]);
            stream_of_slot[j] = found;
            table_of_slot[j] = found;
        }
        for (const auto& spec : distinct) {
            tables.push_back(evaluate(spec, block));
            streams.push_back(sign_bits(tables.back()));
        }
        weight_of_slot.resize(slots);
        for (std::size_t j = 0; j < slots; ++j) weight_of_slot[j] = std::uint64_t{1} << j;

        // expansion: prod_j (1 + eps_j f_j)/2 expanded over subsets
        const double scale = target;
        coeff0.assign(n_patterns, cplx{scale, 0.0}); // empty subset
        for (std::size_t mask = 1; mask < n_patterns; ++mask) {
            Prep entry{make_subset_prep(mask, table_of_slot), {}};
            for (std::size_t j = 0; j < slots; ++j)
                if ((mask >> j) & 1) entry.active.push_back(j);
            preps.push_back(std::move(entry));
            std::vector<cplx> c(n_patterns);
            for (std::size_t pattern = 0; pattern < n_patterns; ++pattern) {
                int sign = 1;
                for (std::size_t j = 0; j < slots; ++j)
                    if ((mask >> j) & 1) sign *= ((pattern >> j) & 1) ? -1 : 1;
                c[pattern] = cplx{scale * sign, 0.0};
            }
            coeff.push_back(std::move(c));
        }
    }

    PreparedCorrelation make_subset_prep(std::size_t mask, const std::vector<std::size_t>& table_of_slot) {
        std::vector<const EvaluatedTable*> sub;
        for (std::size_t j = 0; j < slots; ++j)
            if ((mask >> j) & 1) sub.push_back(&tables[table_of_slot[j]]);
        return PreparedCorrelation(std::move(sub));
    }

    void build_residue(const PatternQuery& q) {
        n_patterns = 1;
        double t = 1.0;
        for (std::uint32_t b : q.moduli) {
            n_patterns *= b;
            t /= static_cast<double>(b);
        }
        target = t;
        for (std::size_t p = 0; p < n_patterns; ++p) labels.push_back(residue_label(p, q.moduli));

        // direct counting: counter mod b byte streams, deduped
        std::vector<std::pair<CounterKind, std::uint32_t>> distinct;
        stream_of_slot.resize(slots);
        for (std::size_t j = 0; j < slots; ++j) {
            const std::pair<CounterKind, std::uint32_t> key{q.counters[j], q.moduli[j]};
            std::size_t found = distinct.size();
            for (std::size_t d = 0; d < distinct.size(); ++d)
                if (distinct[d] == key) {
                    found = d;
                    break;
                }
            if (found == distinct.size()) distinct.push_back(key);
            stream_of_slot[j] = found;
        }
        for (const auto& [counter, b] : distinct) {
            const auto& src = counter == CounterKind::SmallOmega ? block.omega : block.big_omega;
            std::vector<std::uint8_t> r(src.size());
            for (std::size_t i = 0; i < src.size(); ++i) r[i] = src[i] % b;
            streams.push_back(std::move(r));
        }
        weight_of_slot.resize(slots);
        std::uint64_t w = 1;
        for (std::size_t j = 0; j < slots; ++j) {
            weight_of_slot[j] = w;
            w *= q.moduli[j];
        }

        // expansion tables: f_b^r (omega) or f'_b^r (Omega) per distinct spec.
        // Preps keep raw pointers into `tables`, so reserve the worst case
        // before any prep is built.
        std::size_t max_distinct = 0;
        for (std::uint32_t b : q.moduli) max_distinct += b - 1;
        tables.reserve(max_distinct);
        std::vector<FunctionSpec> distinct_specs;
        auto table_index = [&](const FunctionSpec& s) {
            for (std::size_t d = 0; d < distinct_specs.size(); ++d)
                if (distinct_specs[d] == s) return d;
            distinct_specs.push_back(s);
            tables.push_back(evaluate(s, block));
            return distinct_specs.size() - 1;
        };

        // enumerate r-vectors mixed-radix, r = 0 is the constant term
        const double scale = target;
        coeff0.assign(n_patterns, cplx{scale, 0.0});
        for (std::size_t rvec = 1; rvec < n_patterns; ++rvec) {
            std::vector<std::uint32_t> r(slots);
            {
                std::size_t x = rvec;
                for (std::size_t j = 0; j < slots; ++j) {
                    r[j] = static_cast<std::uint32_t>(x % q.moduli[j]);
                    x /= q.moduli[j];
                }
            }
            std::vector<const EvaluatedTable*> active_tables;
            std::vector<std::size_t> active;
            for (std::size_t j = 0; j < slots; ++j) {
                if (r[j] == 0) continue; // f^0 is the constant one
                const FunctionSpec base = q.counters[j] == CounterKind::SmallOmega
                                              ? FunctionSpec::root_of_unity(q.moduli[j])
                                              : FunctionSpec::complete_root_of_unity(q.moduli[j]);
                const std::size_t ti = table_index(FunctionSpec::power(base, r[j]));
                active_tables.push_back(&tables[ti]);
                active.push_back(j);
            }
            preps.push_back(Prep{PreparedCorrelation(std::move(active_tables)), std::move(active)});

            // coefficient: prod_j zeta_{b_j}^{-a_j r_j} / prod b_j, with the
            // convention zeta_b = e(1/b); exact rational phase
            std::uint64_t denom = 1;
            for (std::uint32_t b : q.moduli) denom = std::lcm(denom, std::uint64_t{b});
            std::vector<cplx> c(n_patterns);
            for (std::size_t pattern = 0; pattern < n_patterns; ++pattern) {
                std::size_t x = pattern;
                std::uint64_t num = 0;
                for (std::size_t j = 0; j < slots; ++j) {
                    const std::uint32_t a = static_cast<std::uint32_t>(x % q.moduli[j]);
                    x /= q.moduli[j];
                    const std::uint64_t step = denom / q.moduli[j];
                    num += (denom - (std::uint64_t{a} * r[j] % q.moduli[j]) * step % denom) % denom;
                }
                c[pattern] = scale * root_of_unity_value(static_cast<std::uint32_t>(num % denom),
                                                         static_cast<std::uint32_t>(denom));
            }
            coeff.push_back(std::move(c));
        }
    }

    /// 0/1 stream per n: 0 for value +1, 1 for value -1. Errors name the
    /// first n whose value leaves {-1,+1}.
    std::vector<std::uint8_t> sign_bits(const EvaluatedTable& t) const {
        std::vector<std::uint8_t> bits(t.size());
        if (t.exact_form()) {
            const auto e = t.exponents();
            const std::uint32_t L = t.order();
            for (std::uint64_t i = 0; i < t.size(); ++i) {
                if (e[i] == kZ)
                    throw ValidationError("sign pattern: " + t.spec().to_string() +
                                          " takes value 0 at n=" + std::to_string(t.lo() + i));
                if (e[i] == 0) {
                    bits[i] = 0;
                } else if (std::uint32_t{e[i]} * 2 == L) {
                    bits[i] = 1;
                } else {
                    throw ValidationError("sign pattern: " + t.spec().to_string() +
                                          " takes a non-real value at n=" + std::to_string(t.lo() + i));
                }
            }
            return bits;
        }
        const auto v = t.dense_values();
        for (std::uint64_t i = 0; i < t.size(); ++i) {
            if (std::abs(v[i] - cplx{1.0, 0.0}) <= 1e-12)
                bits[i] = 0;
            else if (std::abs(v[i] + cplx{1.0, 0.0}) <= 1e-12)
                bits[i] = 1;
            else
                throw ValidationError("sign pattern: " + t.spec().to_string() + " takes value (" +
                                      std::to_string(v[i].real()) + ", " + std::to_string(v[i].imag()) +
                                      ") at n=" + std::to_string(t.lo() + i) + ", not in {-1,+1}");
        }
        return bits;
    }

    /// Direct counting of every pattern at once, with window checkpoints.
    /// counts_out[k * n_patterns + pattern].
    void count_histogram(std::span<const std::int64_t> shifts, const EvaluationWindow& window,
                         std::uint64_t* counts_out) const {
        const std::uint64_t m_max = window.max_m();
        for (std::size_t j = 0; j < slots; ++j)
            if (shifts[j] < 0 && static_cast<std::uint64_t>(-shifts[j]) <= m_max)
                throw ValidationError("pattern query: shift " + std::to_string(shifts[j]) +
                                      " reaches argument 0 inside m <= " + std::to_string(m_max) +
                                      "; the indicator identities do not extend to 0");
        std::int64_t fast = 1;
        for (std::size_t j = 0; j < slots; ++j)
            fast = std::max(fast, std::int64_t{1} - shifts[j]);
        const auto fast_start = static_cast<std::uint64_t>(fast);

        std::vector<std::uint64_t> counts(n_patterns, 0);
        std::vector<const std::uint8_t*> base(slots);
        for (std::size_t j = 0; j < slots; ++j)
            base[j] = streams[stream_of_slot[j]].data();

        std::uint64_t m_done = 0;
        for (std::size_t k = 0; k < window.m_grid.size(); ++k) {
            const std::uint64_t M = window.m_grid[k];
            std::uint64_t m = m_done + 1;
            for (; m <= M && m < fast_start; ++m) {
                std::uint64_t idx = 0;
                for (std::size_t j = 0; j < slots; ++j) {
                    const std::int64_t arg = static_cast<std::int64_t>(m) + shifts[j];
                    const auto mag = static_cast<std::uint64_t>(arg < 0 ? -arg : arg);
                    if (mag < 1 || mag >= block.hi)
                        throw CoverageError("pattern query: argument " + std::to_string(arg) +
                                            " outside sieved range");
                    idx += base[j][mag - 1] * weight_of_slot[j];
                }
                ++counts[idx];
            }
            if (m <= M) {
                auto stream_at = [&](std::size_t j) {
                    const auto first =
                        static_cast<std::uint64_t>(static_cast<std::int64_t>(m) + shifts[j]);
                    return base[j] + (first - 1);
                };
                if (slots == 3) {
                    const std::uint8_t* a = stream_at(0);
                    const std::uint8_t* b = stream_at(1);
                    const std::uint8_t* c = stream_at(2);
                    const std::uint64_t w0 = weight_of_slot[0], w1 = weight_of_slot[1],
                                        w2 = weight_of_slot[2];
                    for (std::uint64_t i = 0, cnt = M - m + 1; i < cnt; ++i)
                        ++counts[a[i] * w0 + b[i] * w1 + c[i] * w2];
                } else {
                    std::vector<const std::uint8_t*> ptr(slots);
                    for (std::size_t j = 0; j < slots; ++j) ptr[j] = stream_at(j);
                    for (std::uint64_t i = 0, cnt = M - m + 1; i < cnt; ++i) {
                        std::uint64_t idx = 0;
                        for (std::size_t j = 0; j < slots; ++j) idx += ptr[j][i] * weight_of_slot[j];
                        ++counts[idx];
                    }
                }
            }
            m_done = M;
            std::copy(counts.begin(), counts.end(), counts_out + k * n_patterns);
        }
    }

    /// Expansion densities for every pattern and checkpoint.
    /// out[k * n_patterns + pattern]; imaginary dust is checked against 1e-9.
    void expansion_densities(std::span<const std::int64_t> shifts, const EvaluationWindow& window,
                             double* out) const {
        const std::size_t K = window.m_grid.size();
        std::vector<cplx> acc(K * n_patterns);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t p = 0; p < n_patterns; ++p) acc[k * n_patterns + p] = coeff0[p];
        for (std::size_t t = 0; t < preps.size(); ++t) {
            std::vector<std::int64_t> sub;
            sub.reserve(preps[t].active.size());
            for (std::size_t j : preps[t].active) sub.push_back(shifts[j]);
            const auto series = preps[t].prep.series(sub, window);
            for (std::size_t k = 0; k < K; ++k) {
                const cplx T = series[k];
                for (std::size_t p = 0; p < n_patterns; ++p)
                    acc[k * n_patterns + p] += coeff[t][p] * T;
            }
        }
        for (std::size_t i = 0; i < acc.size(); ++i) {
            if (std::abs(acc[i].imag()) > 1e-9)
                throw Error("pattern expansion: imaginary part " + std::to_string(acc[i].imag()) +
                            " exceeds 1e-9");
            out[i] = acc[i].real();
        }
    }
};

std::uint64_t max_abs_shift_over(const ShiftFamily& family, const LatticeBox& box) {
    std::uint64_t best = 0;
    const std::uint64_t n = box.point_count();
    for (std::uint64_t rank = 0; rank < n; ++rank)
        for (std::int64_t s : family.shifts_at(box.point_at(rank)))
            best = std::max(best, static_cast<std::uint64_t>(s < 0 ? -s : s));
    return best;
}

std::vector<std::int64_t> full_shifts(const PatternQuery& q, std::span<const std::int64_t> point) {
    std::vector<std::int64_t> shifts{0}; // p_0 = 0
    if (q.slots() > 1) {
        const auto tail = q.family.shifts_at(point);
        shifts.insert(shifts.end(), tail.begin(), tail.end());
    }
    return shifts;
}

std::size_t pattern_index_of(const PatternQuery& q) {
    if (q.mode == PatternQuery::Mode::Sign) {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < q.eps.size(); ++j)
            if (q.eps[j] == -1) idx |= std::size_t{1} << j;
        return idx;
    }
    std::size_t idx = 0;
    std::uint64_t w = 1;
    for (std::size_t j = 0; j < q.residues.size(); ++j) {
        idx += q.residues[j] * w;
        w *= q.moduli[j];
    }
    return idx;
}

PatternDensityResult single_query(const PatternQuery& q) {
    q.validate();
    if (q.m_length < 1) throw ValidationError("pattern query: M must be >= 1");
    std::vector<std::int64_t> shifts;
    if (q.slots() > 1) {
        shifts = full_shifts(q, q.point);
    } else {
        shifts = {0};
    }
    std::uint64_t max_abs = 0;
    for (std::int64_t s : shifts)
        max_abs = std::max(max_abs, static_cast<std::uint64_t>(s < 0 ? -s : s));

    const PatternEngine engine(q, q.m_length, max_abs);
    const EvaluationWindow window = EvaluationWindow::make({q.m_length});

    std::vector<std::uint64_t> counts(engine.n_patterns);
    engine.count_histogram(shifts, window, counts.data());
    std::vector<double> expansion(engine.n_patterns);
    engine.expansion_densities(shifts, window, expansion.data());

    const std::size_t idx = pattern_index_of(q);
    PatternDensityResult r;
    r.count = counts[idx];
    r.m_length = q.m_length;
    r.density = static_cast<double>(r.count) / static_cast<double>(q.m_length);
    r.expansion_density = expansion[idx];
    r.target = engine.target;
    return r;
}

} // namespace

PatternDensityResult sign_pattern_density(const PatternQuery& query) {
    if (query.mode != PatternQuery::Mode::Sign)
        throw ValidationError("sign_pattern_density: query is not sign-mode");
    return single_query(query);
}

PatternDensityResult residue_pattern_density(const PatternQuery& query) {
    if (query.mode != PatternQuery::Mode::Residue)
        throw ValidationError("residue_pattern_density: query is not residue-mode");
    return single_query(query);
}

PatternScanResult pattern_scan(const PatternQuery& query_template, const LatticeBox& box,
                               const EvaluationWindow& window, const PatternScanOptions& options) {
    query_template.validate();
    const std::uint64_t n_points = box.point_count();
    if (n_points == 0) throw ValidationError("pattern_scan: empty box");
    if (query_template.slots() > 1 && box.arity() != query_template.family.arity())
        throw ValidationError("pattern_scan: box arity does not match family arity");

    const std::uint64_t max_abs = query_template.slots() > 1
                                      ? max_abs_shift_over(query_template.family, box)
                                      : 0;
    const PatternEngine engine(query_template, window.max_m(), max_abs);

    PatternScanResult result;
    result.mode = query_template.mode;
    result.box = box;
    result.window = window;
    result.labels = engine.labels;
    result.target = engine.target;
    result.point_count = n_points;
    const std::size_t K = window.m_grid.size();
    const std::size_t P = engine.n_patterns;
    result.counts.assign(K * P * n_points, 0);
    result.density.assign(K * P * n_points, 0.0);
    result.expansion.assign(K * P * n_points, 0.0);
    std::vector<std::string> errors(n_points);

    const int threads = options.threads > 0 ? options.threads : default_thread_count();
    parallel_for_chunks(static_cast<std::int64_t>(n_points), threads, [&](std::int64_t rank_s) {
        const auto rank = static_cast<std::uint64_t>(rank_s);
        try {
            const auto point = box.point_at(rank);
            const auto shifts = full_shifts(query_template, point);
            std::vector<std::uint64_t> counts(K * P);
            engine.count_histogram(shifts, window, counts.data());
            std::vector<double> expansion(K * P);
            engine.expansion_densities(shifts, window, expansion.data());
            for (std::size_t k = 0; k < K; ++k) {
                const double M = static_cast<double>(window.m_grid[k]);
                for (std::size_t p = 0; p < P; ++p) {
                    const std::size_t out = result.index(k, p, rank);
                    result.counts[out] = counts[k * P + p];
                    result.density[out] = static_cast<double>(counts[k * P + p]) / M;
                    result.expansion[out] = expansion[k * P + p];
                }
            }
        } catch (const Error& e) {
            errors[rank] = e.what();
        }
    });

    for (std::uint64_t rank = 0; rank < n_points; ++rank)
        if (!errors[rank].empty())
            result.point_errors.push_back("point " + std::to_string(rank) + ": " + errors[rank]);

    result.ud_summary.assign(K * P, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t p = 0; p < P; ++p) {
            CompensatedSum s;
            for (std::uint64_t rank = 0; rank < n_points; ++rank)
                s.add(std::abs(result.density[result.index(k, p, rank)] - result.target));
            result.ud_summary[k * P + p] = s.value() / static_cast<double>(n_points);
        }
    return result;
}

} // namespace mflab
