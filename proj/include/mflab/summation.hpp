#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mflab/common.hpp"

namespace mflab {

/// Neumaier variant of Kahan summation: exact to ~1 ulp of the result even
/// when individual terms exceed the running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }

    double value() const { return sum + carry; }
};

struct CompensatedComplexSum {
    CompensatedSum re, im;

    void add(cplx z) {
        re.add(z.real());
        im.add(z.imag());
    }

    cplx value() const { return {re.value(), im.value()}; }
};

inline constexpr std::int64_t kSumBlock = 4096;

/// Deterministic reduction: fold a vector of partial sums pairwise,
/// (v0+v1), (v2+v3), ... until one value remains. The tree shape depends
/// only on the number of partials, never on thread scheduling.
template <typename T>
T pairwise_fold(std::vector<T>& parts) {
    if (parts.empty()) return T{};
    std::size_t n = parts.size();
    while (n > 1) {
        std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + 1 < n; i += 2) parts[i / 2] = parts[i] + parts[i + 1];
        if (n % 2 == 1) parts[half - 1] = parts[n - 1];
        n = half;
    }
    return parts[0];
}

/// Sum term(i) for i in [0, n) with fixed 4096-term blocks, compensated
/// accumulation inside each block, and a pairwise tree across blocks.
template <typename Term>
double blocked_pairwise_sum(std::int64_t n, Term&& term) {
    std::vector<double> blocks;
    blocks.reserve(static_cast<std::size_t>(n / kSumBlock + 1));
    for (std::int64_t b = 0; b < n; b += kSumBlock) {
        const std::int64_t end = std::min(n, b + kSumBlock);
        CompensatedSum s;
        for (std::int64_t i = b; i < end; ++i) s.add(term(i));
        blocks.push_back(s.value());
    }
    return pairwise_fold(blocks);
}

template <typename Term>
cplx blocked_pairwise_csum(std::int64_t n, Term&& term) {
    std::vector<cplx> blocks;
    blocks.reserve(static_cast<std::size_t>(n / kSumBlock + 1));
    for (std::int64_t b = 0; b < n; b += kSumBlock) {
        const std::int64_t end = std::min(n, b + kSumBlock);
        CompensatedComplexSum s;
        for (std::int64_t i = b; i < end; ++i) s.add(term(i));
        blocks.push_back(s.value());
    }
    return pairwise_fold(blocks);
}

} // namespace mflab
