#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mflab/common.hpp"
#include "mflab/funcspec.hpp"
#include "mflab/sieve.hpp"

namespace mflab {

/// Materialized values of a bounded multiplicative function over [lo, hi).
///
/// Whenever the function's value group is a finite group of roots of unity the
/// table stores exact exponents mod `order` (with a sentinel for zeros) and
/// converts to complex only at aggregation time; otherwise it stores complex
/// doubles directly. Tables are immutable after construction and safe to
/// share across threads.
class EvaluatedTable {
public:
    static constexpr std::uint16_t kZero = 0xFFFF;

    static EvaluatedTable exact(FunctionSpec spec, std::uint64_t lo, std::uint32_t order,
                                std::vector<std::uint16_t> exponents);
    static EvaluatedTable dense(FunctionSpec spec, std::uint64_t lo, std::vector<cplx> values);
    /// Arbitrary bounded sequence (e.g. a phase sequence for the Katai
    /// statistic); values are validated against the unit disc.
    static EvaluatedTable from_values(std::uint64_t lo, std::vector<cplx> values);

    const FunctionSpec& spec() const { return spec_; }
    std::uint64_t lo() const { return lo_; }
    std::uint64_t hi() const { return hi_; }
    std::uint64_t size() const { return hi_ - lo_; }

    bool exact_form() const { return order_ > 0; }
    std::uint32_t order() const { return order_; }
    bool has_zero() const { return has_zero_; }
    std::span<const std::uint16_t> exponents() const { return exponents_; }
    std::span<const cplx> dense_values() const { return values_; }
    /// roots()[e] = e(e / order); size order when in exact form.
    std::span<const cplx> roots() const { return roots_; }

    /// f extended to Z: f(0) = 0, f(-n) = f(n). Throws CoverageError when
    /// |n| falls outside [lo, hi).
    cplx value(std::int64_t n) const;
    /// Unchecked positive-range access, index i stands for n = lo + i.
    cplx value_at_index(std::uint64_t i) const {
        if (order_ > 0) {
            const std::uint16_t e = exponents_[i];
            return e == kZero ? cplx{0.0, 0.0} : roots_[e];
        }
        return values_[i];
    }

    bool covers(std::int64_t n) const {
        if (n == 0) return true;
        const auto a = static_cast<std::uint64_t>(n < 0 ? -n : n);
        return a >= lo_ && a < hi_;
    }

private:
    FunctionSpec spec_;
    std::uint64_t lo_ = 1;
    std::uint64_t hi_ = 1;
    std::uint32_t order_ = 0;
    bool has_zero_ = false;
    std::vector<std::uint16_t> exponents_;
    std::vector<cplx> values_;
    std::vector<cplx> roots_;
};

/// Evaluate a spec over the block's range. Uses the block's multiplicative
/// data (omega, big_omega, squarefree) wherever the spec is driven by them
/// and a factor sweep for prime-table specs.
EvaluatedTable evaluate(const FunctionSpec& spec, const SievedBlock& block);

/// f(p) for each listed prime, computed symbolically (no sieving).
std::vector<cplx> values_at_primes(const FunctionSpec& spec, std::span<const std::uint64_t> primes);

struct MultiplicativityReport {
    std::uint64_t samples = 0;
    std::uint64_t failures = 0;
    struct Case {
        std::uint64_t m, n;
        cplx product_value, pointwise_product;
    };
    std::vector<Case> first_failures; // up to 8
    bool ok() const { return failures == 0; }
};

/// Check f(mn) = f(m) f(n) on random coprime pairs with mn inside the table.
MultiplicativityReport verify_multiplicative(const EvaluatedTable& table, std::uint64_t samples,
                                             std::uint64_t seed = 0x6d666c6162ULL);

} // namespace mflab
