#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "mflab/common.hpp"

namespace mflab {

/// Canonical prime factorization, primes ascending. Computed by trial
/// division only; build_block() is deliberately never consulted so the two
/// routes stay independent.
struct Factorization {
    std::uint64_t n = 1;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> factors;

    std::uint32_t omega() const { return static_cast<std::uint32_t>(factors.size()); }
    std::uint32_t big_omega() const {
        std::uint32_t s = 0;
        for (const auto& [p, e] : factors) s += e;
        return s;
    }
};

/// Trial-division factorization of n >= 1. n == 0 has no factorization.
Factorization factor(std::uint64_t n);

/// All primes in [2, n], ascending. n < 2 yields an empty list.
std::vector<std::uint64_t> primes_up_to(std::uint64_t n);

std::uint64_t isqrt(std::uint64_t n);

/// Exact multiplicative-arithmetic data for the range [lo, hi).
/// Arrays are indexed by n - lo.
struct SievedBlock {
    std::uint64_t lo = 1;
    std::uint64_t hi = 2;
    std::vector<std::uint8_t> omega;      // distinct prime factors
    std::vector<std::uint8_t> big_omega;  // prime factors with multiplicity
    std::vector<std::int8_t> mu;          // Mobius, in {-1,0,+1}
    std::vector<std::int8_t> lambda;      // Liouville, in {-1,+1}
    std::vector<std::uint64_t> squarefree_bits;

    std::uint64_t size() const { return hi - lo; }
    bool covers(std::uint64_t n) const { return n >= lo && n < hi; }

    bool squarefree(std::uint64_t n) const {
        const std::uint64_t i = n - lo;
        return (squarefree_bits[i >> 6] >> (i & 63)) & 1u;
    }
    std::uint8_t omega_at(std::uint64_t n) const { return omega[n - lo]; }
    std::uint8_t big_omega_at(std::uint64_t n) const { return big_omega[n - lo]; }
    std::int8_t mu_at(std::uint64_t n) const { return mu[n - lo]; }
    std::int8_t lambda_at(std::uint64_t n) const { return lambda[n - lo]; }
};

inline constexpr std::uint64_t kDefaultSegment = std::uint64_t{1} << 22;

/// Sieve [lo, hi) in one pass using the supplied base primes, which must
/// include every prime <= sqrt(hi - 1). Throws CoverageError otherwise.
SievedBlock build_block(std::uint64_t lo, std::uint64_t hi, std::span<const std::uint64_t> primes);

/// Convenience wrapper: sieves its own base primes and assembles [lo, hi)
/// from cache-sized segments. Results are bit-identical to one-shot
/// build_block over the same range.
SievedBlock build_range(std::uint64_t lo, std::uint64_t hi, std::uint64_t segment = kDefaultSegment);

/// Per-entry callbacks while factoring a whole range by sieving:
///   on_prime_power(index, p, e) for each maximal p^e || n,
/// where index = n - lo. The tail prime of each n (cofactor > sqrt(hi - 1))
/// is reported with e = 1 like any other factor.
template <typename Fn>
void factor_sweep(std::uint64_t lo, std::uint64_t hi, std::span<const std::uint64_t> primes, Fn&& on_prime_power);

/// Throws CoverageError unless `primes` contains every prime <= bound.
/// Assumes the list itself is a correct ascending prime run from 2.
void ensure_prime_coverage(std::span<const std::uint64_t> primes, std::uint64_t bound,
                           const char* what);

// Binary block cache. Layout: magic, format version, lo, hi, then the raw
// little-endian arrays in declaration order. Bit-exact across runs.
void save_block(const SievedBlock& block, const std::filesystem::path& path);
SievedBlock load_block(const std::filesystem::path& path);

// --- implementation ---

template <typename Fn>
void factor_sweep(std::uint64_t lo, std::uint64_t hi, std::span<const std::uint64_t> primes, Fn&& on_prime_power) {
    if (hi <= lo) throw ValidationError("factor_sweep: empty range");
    const std::uint64_t n = hi - lo;
    const std::uint64_t root = isqrt(hi - 1);
    ensure_prime_coverage(primes, root, "factor_sweep");
    std::vector<std::uint64_t> cof(n);
    for (std::uint64_t i = 0; i < n; ++i) cof[i] = lo + i;
    for (std::uint64_t p : primes) {
        if (p > root) break;
        std::uint64_t first = ((lo + p - 1) / p) * p;
        for (std::uint64_t m = first; m < hi; m += p) {
            const std::uint64_t i = m - lo;
            std::uint32_t e = 0;
            while (cof[i] % p == 0) {
                cof[i] /= p;
                ++e;
            }
            on_prime_power(i, p, e);
        }
    }
    for (std::uint64_t i = 0; i < n; ++i)
        if (cof[i] > 1) on_prime_power(i, cof[i], 1u);
}

} // namespace mflab
