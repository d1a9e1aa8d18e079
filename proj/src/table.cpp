#include "mflab/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mflab {

namespace {

constexpr std::uint32_t kMaxExactOrder = 4096;

std::vector<cplx> make_roots(std::uint32_t order) {
    std::vector<cplx> roots(order);
    for (std::uint32_t r = 0; r < order; ++r) roots[r] = root_of_unity_value(r, order);
    return roots;
}

} // namespace

EvaluatedTable EvaluatedTable::exact(FunctionSpec spec, std::uint64_t lo, std::uint32_t order,
                                     std::vector<std::uint16_t> exponents) {
    if (order == 0 || order >= kZero) throw ValidationError("EvaluatedTable: bad order");
    EvaluatedTable t;
    t.spec_ = std::move(spec);
    t.lo_ = lo;
    t.hi_ = lo + exponents.size();
    t.order_ = order;
    t.exponents_ = std::move(exponents);
    t.has_zero_ = std::find(t.exponents_.begin(), t.exponents_.end(), kZero) != t.exponents_.end();
    t.roots_ = make_roots(order);
    return t;
}

EvaluatedTable EvaluatedTable::dense(FunctionSpec spec, std::uint64_t lo, std::vector<cplx> values) {
    EvaluatedTable t;
    t.spec_ = std::move(spec);
    t.lo_ = lo;
    t.hi_ = lo + values.size();
    t.values_ = std::move(values);
    return t;
}

EvaluatedTable EvaluatedTable::from_values(std::uint64_t lo, std::vector<cplx> values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!(std::abs(values[i]) <= 1.0 + 1e-12))
            throw ValidationError("from_values: |a(" + std::to_string(lo + i) + ")| > 1");
    return dense(FunctionSpec::one(), lo, std::move(values));
}

cplx EvaluatedTable::value(std::int64_t n) const {
    if (n == 0) return {0.0, 0.0};
    const auto a = static_cast<std::uint64_t>(n < 0 ? -n : n);
    if (a < lo_ || a >= hi_)
        throw CoverageError("table for " + spec_.to_string() + " covers [" + std::to_string(lo_) +
                            ", " + std::to_string(hi_) + ") but " + std::to_string(n) +
                            " was requested");
    return value_at_index(a - lo_);
}

namespace {

std::uint32_t lcm_order(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>(std::lcm(std::uint64_t{a}, std::uint64_t{b}));
}

std::vector<cplx> to_dense(const EvaluatedTable& t) {
    std::vector<cplx> out(t.size());
    for (std::uint64_t i = 0; i < t.size(); ++i) out[i] = t.value_at_index(i);
    return out;
}

EvaluatedTable evaluate_impl(const FunctionSpec& spec, const SievedBlock& block) {
    const std::uint64_t n = block.size();
    const std::uint64_t lo = block.lo;

    switch (spec.kind()) {
    case SpecKind::One:
        return EvaluatedTable::exact(spec, lo, 1, std::vector<std::uint16_t>(n, 0));
    case SpecKind::Liouville: {
        std::vector<std::uint16_t> e(n);
        for (std::uint64_t i = 0; i < n; ++i) e[i] = block.big_omega[i] & 1;
        return EvaluatedTable::exact(spec, lo, 2, std::move(e));
    }
    case SpecKind::Mobius: {
        std::vector<std::uint16_t> e(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const bool sqf = (block.squarefree_bits[i >> 6] >> (i & 63)) & 1u;
            e[i] = sqf ? (block.omega[i] & 1) : EvaluatedTable::kZero;
        }
        return EvaluatedTable::exact(spec, lo, 2, std::move(e));
    }
    case SpecKind::RootOfUnity: {
        const std::uint32_t b = spec.root_order();
        std::vector<std::uint16_t> e(n);
        for (std::uint64_t i = 0; i < n; ++i) e[i] = block.omega[i] % b;
        return EvaluatedTable::exact(spec, lo, b, std::move(e));
    }
    case SpecKind::CompleteRootOfUnity: {
        const std::uint32_t b = spec.root_order();
        std::vector<std::uint16_t> e(n);
        for (std::uint64_t i = 0; i < n; ++i) e[i] = block.big_omega[i] % b;
        return EvaluatedTable::exact(spec, lo, b, std::move(e));
    }
    case SpecKind::Character: {
        const std::uint32_t q = spec.character_modulus();
        const Character chi = CharacterGroup(q).character(spec.character_exponents());
        std::vector<std::uint16_t> e(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint16_t v = chi.expo_table[(lo + i) % q];
            e[i] = (v == Character::kNoValue) ? EvaluatedTable::kZero : v;
        }
        return EvaluatedTable::exact(spec, lo, chi.order, std::move(e));
    }
    case SpecKind::Archimedean: {
        const double t = spec.archimedean_t();
        std::vector<cplx> v(n);
        for (std::uint64_t i = 0; i < n; ++i)
            v[i] = std::polar(1.0, t * std::log(static_cast<double>(lo + i)));
        return EvaluatedTable::dense(spec, lo, std::move(v));
    }
    case SpecKind::PrimeTable: {
        std::vector<cplx> v(n, cplx{1.0, 0.0});
        const auto primes = primes_up_to(isqrt(block.hi - 1));
        factor_sweep(lo, block.hi, primes, [&](std::uint64_t i, std::uint64_t p, std::uint32_t e) {
            v[i] *= spec.prime_power_value(p, e);
        });
        return EvaluatedTable::dense(spec, lo, std::move(v));
    }
    case SpecKind::Product: {
        std::vector<EvaluatedTable> parts;
        parts.reserve(spec.children().size());
        bool all_exact = true;
        std::uint32_t order = 1;
        for (const auto& c : spec.children()) {
            parts.push_back(evaluate_impl(c, block));
            if (parts.back().exact_form())
                order = lcm_order(order, parts.back().order());
            else
                all_exact = false;
        }
        if (all_exact && order <= kMaxExactOrder) {
            std::vector<std::uint16_t> e(n, 0);
            for (const auto& part : parts) {
                const std::uint32_t scale = order / part.order();
                const auto pe = part.exponents();
                for (std::uint64_t i = 0; i < n; ++i) {
                    if (e[i] == EvaluatedTable::kZero) continue;
                    e[i] = (pe[i] == EvaluatedTable::kZero)
                               ? EvaluatedTable::kZero
                               : static_cast<std::uint16_t>((e[i] + std::uint32_t{pe[i]} * scale) % order);
                }
            }
            return EvaluatedTable::exact(spec, lo, order, std::move(e));
        }
        std::vector<cplx> v(n, cplx{1.0, 0.0});
        for (const auto& part : parts)
            for (std::uint64_t i = 0; i < n; ++i) v[i] *= part.value_at_index(i);
        return EvaluatedTable::dense(spec, lo, std::move(v));
    }
    case SpecKind::Power: {
        EvaluatedTable base = evaluate_impl(spec.children()[0], block);
        const std::uint32_t r = spec.power_exponent();
        if (base.exact_form()) {
            const std::uint32_t order = base.order();
            std::vector<std::uint16_t> e(base.exponents().begin(), base.exponents().end());
            for (auto& x : e)
                if (x != EvaluatedTable::kZero)
                    x = static_cast<std::uint16_t>((std::uint64_t{x} * r) % order);
            return EvaluatedTable::exact(spec, lo, order, std::move(e));
        }
        std::vector<cplx> v = to_dense(base);
        for (auto& z : v) {
            if (z == cplx{0.0, 0.0}) continue;
            z = std::polar(std::pow(std::abs(z), static_cast<double>(r)),
                           std::arg(z) * static_cast<double>(r));
        }
        return EvaluatedTable::dense(spec, lo, std::move(v));
    }
    case SpecKind::Conjugate: {
        EvaluatedTable base = evaluate_impl(spec.children()[0], block);
        if (base.exact_form()) {
            const std::uint32_t order = base.order();
            std::vector<std::uint16_t> e(base.exponents().begin(), base.exponents().end());
            for (auto& x : e)
                if (x != EvaluatedTable::kZero) x = static_cast<std::uint16_t>((order - x) % order);
            return EvaluatedTable::exact(spec, lo, order, std::move(e));
        }
        std::vector<cplx> v = to_dense(base);
        for (auto& z : v) z = std::conj(z);
        return EvaluatedTable::dense(spec, lo, std::move(v));
    }
    }
    throw Error("evaluate: unreachable");
}

} // namespace

EvaluatedTable evaluate(const FunctionSpec& spec, const SievedBlock& block) {
    return evaluate_impl(spec, block);
}

std::vector<cplx> values_at_primes(const FunctionSpec& spec, std::span<const std::uint64_t> primes) {
    std::vector<cplx> out(primes.size());
    switch (spec.kind()) {
    case SpecKind::One:
        std::fill(out.begin(), out.end(), cplx{1.0, 0.0});
        return out;
    case SpecKind::Liouville:
    case SpecKind::Mobius:
        std::fill(out.begin(), out.end(), cplx{-1.0, 0.0});
        return out;
    case SpecKind::RootOfUnity:
    case SpecKind::CompleteRootOfUnity:
        std::fill(out.begin(), out.end(), root_of_unity_value(1, spec.root_order()));
        return out;
    case SpecKind::Character: {
        const Character chi = CharacterGroup(spec.character_modulus()).character(spec.character_exponents());
        for (std::size_t i = 0; i < primes.size(); ++i) out[i] = chi.value(primes[i]);
        return out;
    }
    case SpecKind::Archimedean: {
        const double t = spec.archimedean_t();
        for (std::size_t i = 0; i < primes.size(); ++i)
            out[i] = std::polar(1.0, t * std::log(static_cast<double>(primes[i])));
        return out;
    }
    case SpecKind::PrimeTable: {
        for (std::size_t i = 0; i < primes.size(); ++i) out[i] = spec.prime_value(primes[i]);
        return out;
    }
    case SpecKind::Product: {
        std::fill(out.begin(), out.end(), cplx{1.0, 0.0});
        for (const auto& c : spec.children()) {
            const auto part = values_at_primes(c, primes);
            for (std::size_t i = 0; i < primes.size(); ++i) out[i] *= part[i];
        }
        return out;
    }
    case SpecKind::Power: {
        out = values_at_primes(spec.children()[0], primes);
        const auto r = static_cast<double>(spec.power_exponent());
        for (auto& z : out)
            if (z != cplx{0.0, 0.0}) z = std::polar(std::pow(std::abs(z), r), std::arg(z) * r);
        return out;
    }
    case SpecKind::Conjugate: {
        out = values_at_primes(spec.children()[0], primes);
        for (auto& z : out) z = std::conj(z);
        return out;
    }
    }
    throw Error("values_at_primes: unreachable");
}

MultiplicativityReport verify_multiplicative(const EvaluatedTable& table, std::uint64_t samples,
                                             std::uint64_t seed) {
    MultiplicativityReport report;
    const std::uint64_t hi = table.hi();
    if (hi < 8) throw ValidationError("verify_multiplicative: table too small");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> pick_m(2, isqrt(hi - 1));
    while (report.samples < samples) {
        const std::uint64_t m = pick_m(rng);
        std::uniform_int_distribution<std::uint64_t> pick_n(2, (hi - 1) / m);
        const std::uint64_t n = pick_n(rng);
        if (std::gcd(m, n) != 1) continue;
        if (m < table.lo() || n < table.lo()) continue;
        ++report.samples;
        const cplx lhs = table.value(static_cast<std::int64_t>(m * n));
        const cplx rhs = table.value(static_cast<std::int64_t>(m)) * table.value(static_cast<std::int64_t>(n));
        bool equal;
        if (table.exact_form()) {
            const auto em = table.exponents()[m - table.lo()];
            const auto en = table.exponents()[n - table.lo()];
            const auto emn = table.exponents()[m * n - table.lo()];
            if (em == EvaluatedTable::kZero || en == EvaluatedTable::kZero)
                equal = emn == EvaluatedTable::kZero;
            else
                equal = emn != EvaluatedTable::kZero &&
                        emn == (std::uint32_t{em} + en) % table.order();
        } else {
            equal = std::abs(lhs - rhs) <= 1e-12;
        }
        if (!equal) {
            ++report.failures;
            if (report.first_failures.size() < 8) report.first_failures.push_back({m, n, lhs, rhs});
        }
    }
    return report;
}

} // namespace mflab
