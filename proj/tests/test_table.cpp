#include <doctest.h>

#include <random>

#include "mflab/table.hpp"

using namespace mflab;

namespace {
bool close(cplx a, cplx b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

const SievedBlock& small_block() {
    static const SievedBlock b = build_range(1, 100001);
    return b;
}
} // namespace

TEST_CASE("evaluate: liouville, mobius and f_b match the examples") {
    const auto& block = small_block();
    const auto lam = evaluate(FunctionSpec::liouville(), block);
    CHECK(close(lam.value(12), {-1.0, 0.0})); // Omega(12)=3

    const auto f3 = evaluate(FunctionSpec::root_of_unity(3), block);
    CHECK(close(f3.value(12), root_of_unity_value(2, 3))); // omega(12)=2

    const auto g3 = evaluate(FunctionSpec::complete_root_of_unity(3), block);
    CHECK(close(g3.value(12), {1.0, 0.0})); // zeta^Omega(12) = zeta^3

    const auto mu = evaluate(FunctionSpec::mobius(), block);
    CHECK(close(mu.value(4), {0.0, 0.0}));
    CHECK(close(mu.value(6), {1.0, 0.0}));
    CHECK(mu.has_zero());
}

TEST_CASE("evaluate: Z-extension through value()") {
    const auto lam = evaluate(FunctionSpec::liouville(), small_block());
    CHECK(close(lam.value(0), {0.0, 0.0}));
    CHECK(close(lam.value(-12), lam.value(12)));
    CHECK_THROWS_AS(lam.value(200000), CoverageError);
    CHECK_THROWS_AS(lam.value(-200000), CoverageError);
}

TEST_CASE("evaluate: combinators act pointwise") {
    const auto& block = small_block();
    const auto f3 = FunctionSpec::root_of_unity(3);
    const auto spec = FunctionSpec::product(
        {FunctionSpec::liouville(), FunctionSpec::power(f3, 2), FunctionSpec::conjugate(f3)});
    const auto table = evaluate(spec, block);
    const auto lam = evaluate(FunctionSpec::liouville(), block);
    const auto t3 = evaluate(f3, block);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const std::int64_t n = static_cast<std::int64_t>(rng() % 100000 + 1);
        const cplx expect = lam.value(n) * t3.value(n) * t3.value(n) * std::conj(t3.value(n));
        CHECK(close(table.value(n), expect, 1e-11));
    }
    CHECK(table.exact_form());
    CHECK(table.order() == 6);
}

TEST_CASE("evaluate: f_b^b is exactly one everywhere") {
    const auto spec = FunctionSpec::power(FunctionSpec::root_of_unity(3), 3);
    const auto table = evaluate(spec, small_block());
    REQUIRE(table.exact_form());
    for (std::uint64_t n = 1; n <= 100000; ++n) {
        CHECK(table.exponents()[n - 1] == 0); // exact: exponent identically zero
    }
}

TEST_CASE("evaluate: archimedean is dense with unit modulus") {
    const auto table = evaluate(FunctionSpec::archimedean(0.5), small_block());
    CHECK_FALSE(table.exact_form());
    for (std::uint64_t n = 1; n <= 1000; ++n)
        CHECK(std::abs(table.value(static_cast<std::int64_t>(n))) <= 1.0 + 1e-12);
    CHECK(close(table.value(4), std::polar(1.0, 0.5 * std::log(4.0)), 1e-12));

    // completely multiplicative: the law holds for non-coprime pairs too
    std::mt19937_64 rng(29);
    for (int i = 0; i < 200; ++i) {
        const std::int64_t m = static_cast<std::int64_t>(rng() % 300 + 2);
        const std::int64_t n = static_cast<std::int64_t>(rng() % (100000 / m - 1) + 2);
        CHECK(close(table.value(m * n), table.value(m) * table.value(n), 1e-10));
    }
}

TEST_CASE("evaluate: exact tables agree with value_by_factorization") {
    const auto& block = small_block();
    const std::vector<FunctionSpec> specs = {
        FunctionSpec::liouville(),
        FunctionSpec::mobius(),
        FunctionSpec::root_of_unity(5),
        FunctionSpec::complete_root_of_unity(4),
        FunctionSpec::character(7, {2}),
        FunctionSpec::product({FunctionSpec::liouville(), FunctionSpec::character(3, {1})}),
        FunctionSpec::prime_table({{2, {0.0, 1.0}}, {7, {0.5, 0.5}}}, {-1.0, 0.0}, true),
    };
    std::mt19937_64 rng(17);
    for (const auto& spec : specs) {
        const auto table = evaluate(spec, block);
        for (int i = 0; i < 200; ++i) {
            const std::int64_t n = static_cast<std::int64_t>(rng() % 100000 + 1);
            CHECK(close(table.value(n), spec.value_by_factorization(n), 1e-11));
        }
    }
}

TEST_CASE("unit-disc bound over whole tables") {
    const auto& block = small_block();
    for (const auto& spec :
         {FunctionSpec::root_of_unity(7), FunctionSpec::archimedean(-1.3),
          FunctionSpec::product({FunctionSpec::mobius(), FunctionSpec::archimedean(2.0)})}) {
        const auto table = evaluate(spec, block);
        for (std::uint64_t i = 0; i < table.size(); ++i)
            CHECK(std::abs(table.value_at_index(i)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("verify_multiplicative: clean specs pass, corrupted values fail") {
    const auto& block = small_block();
    for (const auto& spec : {FunctionSpec::liouville(), FunctionSpec::mobius(),
                             FunctionSpec::root_of_unity(3), FunctionSpec::character(5, {1})}) {
        const auto report = verify_multiplicative(evaluate(spec, block), 500);
        CHECK(report.samples == 500);
        CHECK(report.ok());
    }
    // mobius at a coprime pair, exact: mu(6) = mu(2) mu(3) = 1
    const auto mu = evaluate(FunctionSpec::mobius(), block);
    CHECK(close(mu.value(6), mu.value(2) * mu.value(3)));

    // an intentionally corrupted table must be caught
    std::vector<cplx> vals(1000, cplx{1.0, 0.0});
    vals[6 - 1] = {-1.0, 0.0}; // breaks f(6) = f(2) f(3)
    auto broken = EvaluatedTable::from_values(1, std::move(vals));
    const auto report = verify_multiplicative(broken, 4000, 99);
    CHECK(report.failures > 0);
    CHECK(!report.first_failures.empty());
}

TEST_CASE("from_values validates the unit disc") {
    CHECK_THROWS_AS(EvaluatedTable::from_values(1, {cplx{1.5, 0.0}}), ValidationError);
    const auto t = EvaluatedTable::from_values(5, {cplx{0.5, 0.5}, cplx{0.0, -1.0}});
    CHECK(t.lo() == 5);
    CHECK(t.hi() == 7);
    CHECK(close(t.value(6), {0.0, -1.0}));
}
