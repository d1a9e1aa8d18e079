#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mflab/common.hpp"

namespace mflab {

/// Multivariate integer polynomial N^r -> Z, stored sparsely as
/// exponent-vector -> coefficient. Evaluation is exact; overflow throws.
class IntPolynomial {
public:
    using Monomial = std::vector<std::uint32_t>; // length = arity

    explicit IntPolynomial(std::uint32_t arity) : arity_(arity) {}

    std::uint32_t arity() const { return arity_; }
    const std::map<Monomial, std::int64_t>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Adds c * x^mono; zero net coefficients are dropped.
    void add_term(Monomial mono, std::int64_t c);

    std::int64_t eval(std::span<const std::int64_t> point) const;

    /// Sum-of-terms literal, e.g. "n^2", "3*n1*n2^2 - n1 + 7". Variables are
    /// n (arity 1) or n1..nr.
    static IntPolynomial parse(const std::string& text, std::uint32_t arity);
    std::string to_string() const;

private:
    std::uint32_t arity_;
    std::map<Monomial, std::int64_t> terms_;
};

struct IndependenceResult {
    bool certified = false;
    /// When dependent: integer vector (c_0, c_1, ..., c_l), not all zero,
    /// with c_0 * 1 + sum c_j p_j = 0.
    std::vector<std::int64_t> witness;
};

/// Decides whether {1, p_1, ..., p_l} is linearly independent over Q, by
/// exact fraction-free elimination. Never uses floating point: a wrong
/// certificate would silently invalidate every downstream experiment.
IndependenceResult check_independence(std::span<const IntPolynomial> polys);

/// floor(n^c) with a guard: values within 1e-9 of an integer are recomputed
/// in extended precision and snapped.
std::int64_t fractional_shift(double c, std::uint64_t n);

enum class IndependenceStatus { Certified, Dependent, NotApplicable };

/// A tuple of polynomial shifts (with independence certificate) or of
/// fractional-power shifts [n^{c_j}].
struct ShiftFamily {
    enum class Kind { Polynomial, Fractional };

    Kind kind = Kind::Polynomial;
    std::vector<IntPolynomial> polys; // Polynomial kind; common arity
    std::vector<double> exponents;    // Fractional kind
    IndependenceStatus independence = IndependenceStatus::NotApplicable;
    std::vector<std::int64_t> witness;

    static ShiftFamily polynomial(std::vector<IntPolynomial> polys);
    /// Exponents must be positive; distinct non-integers satisfy the
    /// theorem's hypothesis, anything else is exploration mode (see
    /// fractional_hypothesis_ok).
    static ShiftFamily fractional(std::vector<double> exponents);

    std::size_t arity() const {
        return kind == Kind::Polynomial ? (polys.empty() ? 0 : polys[0].arity()) : 1;
    }
    std::size_t shift_count() const {
        return kind == Kind::Polynomial ? polys.size() : exponents.size();
    }
    bool fractional_hypothesis_ok() const;

    /// Shift vector (s_1, ..., s_l) at the lattice point n.
    std::vector<std::int64_t> shifts_at(std::span<const std::int64_t> point) const;
};

/// Axis-aligned box of lattice points, each coordinate in [lo_i, hi_i],
/// 1 <= lo_i <= hi_i. Iteration order is row-major (last coordinate fastest).
struct LatticeBox {
    std::vector<std::int64_t> lo, hi;

    static LatticeBox make(std::vector<std::int64_t> lo, std::vector<std::int64_t> hi);
    /// One-dimensional [a, b].
    static LatticeBox interval(std::int64_t a, std::int64_t b);

    std::size_t arity() const { return lo.size(); }
    std::uint64_t point_count() const;
    /// Point with the given row-major rank.
    std::vector<std::int64_t> point_at(std::uint64_t rank) const;
};

/// Restartable row-major stream over the box.
class BoxPointStream {
public:
    explicit BoxPointStream(LatticeBox box) : box_(std::move(box)) {}
    std::optional<std::vector<std::int64_t>> next();
    void restart() { rank_ = 0; }

private:
    LatticeBox box_;
    std::uint64_t rank_ = 0;
};

} // namespace mflab
