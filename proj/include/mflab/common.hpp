#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#ifdef __FAST_MATH__
#error "mflab relies on compensated summation; do not build with -ffast-math"
#endif

namespace mflab {

using cplx = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// e(x) = exp(2*pi*i*x), the standard additive character.
inline cplx unit_phase(double x) { return std::polar(1.0, two_pi * x); }

/// e(r / order) with the quarter-turn values snapped to exact +-1 / +-i.
inline cplx root_of_unity_value(std::uint32_t r, std::uint32_t order) {
    r %= order;
    const std::uint64_t four_r = std::uint64_t{4} * r;
    if (four_r % order == 0) {
        switch (four_r / order) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        case 3: return {0.0, -1.0};
        }
    }
    return unit_phase(static_cast<double>(r) / static_cast<double>(order));
}

// Error taxonomy; the CLI maps these onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed spec, residue out of range, empty box, ...
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A table or prime list does not cover a range an operation needs.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Exact integer arithmetic left the representable range.
class OverflowError : public Error {
public:
    using Error::Error;
};

} // namespace mflab
