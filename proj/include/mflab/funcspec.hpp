#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mflab/common.hpp"

#include <nlohmann/json_fwd.hpp>

namespace mflab {

/// A Dirichlet character mod q, represented as an exponent vector over a
/// fixed generator decomposition of (Z/qZ)*. Values are exact roots of
/// unity: chi(r) = e(expo_table[r % q] / order), or 0 when gcd(r, q) > 1.
struct Character {
    static constexpr std::uint16_t kNoValue = 0xFFFF;

    std::uint32_t modulus = 1;
    std::uint32_t order = 1;
    bool principal = true;
    std::vector<std::uint32_t> exponents;
    std::vector<std::uint16_t> expo_table; // size modulus; exponent in units of 1/order

    cplx value(std::uint64_t n) const {
        const std::uint16_t e = expo_table[n % modulus];
        if (e == kNoValue) return {0.0, 0.0};
        return root_of_unity_value(e, order);
    }
};

/// The unit group (Z/qZ)* decomposed into cyclic factors, with discrete
/// logarithm tables for every coprime residue. Characters are exponent
/// vectors against this decomposition; index 0 is always principal.
class CharacterGroup {
public:
    explicit CharacterGroup(std::uint32_t q);

    std::uint32_t modulus() const { return q_; }
    const std::vector<std::uint32_t>& generator_orders() const { return gen_orders_; }
    std::size_t size() const { return group_size_; } // phi(q)

    Character character(std::span<const std::uint32_t> exponents) const;
    Character character_by_index(std::size_t index) const;
    std::vector<Character> all() const;

private:
    std::uint32_t q_ = 1;
    std::size_t group_size_ = 1;
    std::vector<std::uint32_t> gen_orders_;
    // dlogs_[r * gen_orders_.size() + i] = discrete log of r w.r.t. generator i,
    // or kNoDlog when gcd(r, q) > 1.
    std::vector<std::uint32_t> dlogs_;
    static constexpr std::uint32_t kNoDlog = 0xFFFFFFFFu;
};

/// All phi(q) characters mod q in canonical (mixed-radix) order, principal
/// first. Pairwise orthogonality over one period is verified for small q.
std::vector<Character> character_group(std::uint32_t q);

enum class SpecKind {
    One,
    Liouville,
    Mobius,
    Character,
    RootOfUnity,         // f_b: a fixed b-th root of unity at every prime power
    CompleteRootOfUnity, // f'_b: zeta^j at p^j
    Archimedean,         // n^{it}
    PrimeTable,          // user-supplied values at primes (escape hatch)
    Product,
    Power,
    Conjugate,
};

/// Symbolic definition of a bounded multiplicative function (class M).
/// Every spec denotes f with |f(n)| <= 1, f(1) = 1, extended to Z by
/// f(-n) = f(n) and f(0) = 0.
class FunctionSpec {
public:
    FunctionSpec() = default; // constant one

    static FunctionSpec one();
    static FunctionSpec liouville();
    static FunctionSpec mobius();
    static FunctionSpec character(std::uint32_t q, std::vector<std::uint32_t> exponents);
    static FunctionSpec character(const Character& chi);
    static FunctionSpec root_of_unity(std::uint32_t b);
    static FunctionSpec complete_root_of_unity(std::uint32_t b);
    static FunctionSpec archimedean(double t);
    /// f(p^j) = v_p (or v_p^j when complete) for listed primes, default_value
    /// at all other primes. All moduli must stay within the unit disc.
    static FunctionSpec prime_table(std::vector<std::pair<std::uint64_t, cplx>> values,
                                    cplx default_value, bool complete);
    static FunctionSpec product(std::vector<FunctionSpec> factors);
    static FunctionSpec power(FunctionSpec base, std::uint32_t r);
    static FunctionSpec conjugate(FunctionSpec inner);

    SpecKind kind() const { return kind_; }
    std::uint32_t root_order() const { return b_; }
    double archimedean_t() const { return t_; }
    std::uint32_t character_modulus() const { return modulus_; }
    const std::vector<std::uint32_t>& character_exponents() const { return chi_exponents_; }
    std::uint32_t power_exponent() const { return power_; }
    const std::vector<FunctionSpec>& children() const { return children_; }
    const std::vector<std::pair<std::uint64_t, cplx>>& prime_values() const { return prime_values_; }
    cplx prime_default() const { return default_value_; }
    bool prime_table_complete() const { return complete_; }

    /// Value of the spec at the prime power p^e (e >= 1).
    cplx prime_power_value(std::uint64_t p, std::uint32_t e) const;
    cplx prime_value(std::uint64_t p) const { return prime_power_value(p, 1); }

    /// Value at arbitrary n via trial-division factorization (slow path;
    /// the oracle route used by tests and by prime sums).
    cplx value_by_factorization(std::int64_t n) const;

    nlohmann::json to_json() const;
    static FunctionSpec from_json(const nlohmann::json& j);
    /// Accepts the JSON form or CLI shorthand: liouville|lambda, mobius|mu,
    /// one, rou:B, crou:B, arch:T, chi:Q:INDEX.
    static FunctionSpec parse(const std::string& text);
    std::string to_string() const;

    bool operator==(const FunctionSpec& other) const;

private:
    SpecKind kind_ = SpecKind::One;
    std::uint32_t b_ = 0;
    double t_ = 0.0;
    std::uint32_t modulus_ = 0;
    std::vector<std::uint32_t> chi_exponents_;
    std::uint32_t power_ = 1;
    std::vector<FunctionSpec> children_;
    std::vector<std::pair<std::uint64_t, cplx>> prime_values_;
    cplx default_value_{1.0, 0.0};
    bool complete_ = false;
};

} // namespace mflab
