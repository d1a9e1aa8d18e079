#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "mflab/sieve.hpp"

using namespace mflab;

TEST_CASE("factor: trial-division oracle basics") {
    CHECK(factor(1).factors.empty());
    CHECK(factor(12).factors == std::vector<std::pair<std::uint64_t, std::uint32_t>>{{2, 2}, {3, 1}});
    CHECK(factor(97).factors == std::vector<std::pair<std::uint64_t, std::uint32_t>>{{97, 1}});
    CHECK(factor(360).omega() == 3);
    CHECK(factor(360).big_omega() == 6);
    CHECK_THROWS_AS(factor(0), ValidationError);

    // product of p^e reconstructs n, primes ascending and prime
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t n = rng() % 1000000 + 1;
        const auto f = factor(n);
        std::uint64_t prod = 1;
        std::uint64_t prev = 1;
        for (const auto& [p, e] : f.factors) {
            CHECK(p > prev);
            prev = p;
            CHECK(factor(p).factors.size() == 1);
            for (std::uint32_t k = 0; k < e; ++k) prod *= p;
        }
        CHECK(prod == n);
    }
}

TEST_CASE("primes_up_to: endpoints and counts") {
    CHECK(primes_up_to(10) == std::vector<std::uint64_t>{2, 3, 5, 7});
    CHECK(primes_up_to(1).empty());
    CHECK(primes_up_to(2) == std::vector<std::uint64_t>{2});
    CHECK(primes_up_to(100).size() == 25);

    // count agrees with trial division up to 10^4
    const auto primes = primes_up_to(10000);
    std::size_t count = 0;
    for (std::uint64_t n = 2; n <= 10000; ++n)
        if (factor(n).factors.size() == 1 && factor(n).factors[0].second == 1) ++count;
    CHECK(primes.size() == count);
}

TEST_CASE("build_block: spec examples on [1,11)") {
    const auto primes = primes_up_to(4);
    const auto b = build_block(1, 11, primes);
    CHECK(std::vector<std::int8_t>(b.lambda.begin(), b.lambda.end()) ==
          std::vector<std::int8_t>{1, -1, -1, 1, -1, 1, -1, -1, 1, 1});
    CHECK(std::vector<std::int8_t>(b.mu.begin(), b.mu.end()) ==
          std::vector<std::int8_t>{1, -1, -1, 0, -1, 1, -1, 0, 0, 1});
}

TEST_CASE("build_block: omega/big_omega at 360") {
    const auto primes = primes_up_to(19);
    const auto b = build_block(360, 361, primes);
    CHECK(b.omega_at(360) == 3);
    CHECK(b.big_omega_at(360) == 6);
}

TEST_CASE("build_block: insufficient primes is a named error") {
    const auto primes = primes_up_to(5);
    CHECK_THROWS_WITH_AS(build_block(1, 100, primes),
                         doctest::Contains("primes up to 9"), CoverageError);
    CHECK_THROWS_AS(build_block(5, 5, primes), ValidationError);
    CHECK_THROWS_AS(build_block(0, 10, primes), ValidationError);
}

TEST_CASE("block values equal the factor() oracle") {
    const std::uint64_t hi = 20001;
    const auto block = build_range(1, hi);
    for (std::uint64_t n = 1; n < hi; ++n) {
        const auto f = factor(n);
        const auto om = f.omega();
        const auto bom = f.big_omega();
        CHECK(block.omega_at(n) == om);
        CHECK(block.big_omega_at(n) == bom);
        CHECK(block.lambda_at(n) == ((bom & 1) ? -1 : 1));
        const bool sqf = om == bom;
        CHECK(block.squarefree(n) == sqf);
        CHECK(block.mu_at(n) == (sqf ? ((om & 1) ? -1 : 1) : 0));
    }
}

TEST_CASE("segment-boundary independence") {
    const auto whole = build_range(1, 1000000, 1u << 22);
    const auto pieces = build_range(1, 1000000, 10000);
    CHECK(whole.omega == pieces.omega);
    CHECK(whole.big_omega == pieces.big_omega);
    CHECK(whole.mu == pieces.mu);
    CHECK(whole.lambda == pieces.lambda);
    CHECK(whole.squarefree_bits == pieces.squarefree_bits);

    // a block not anchored at 1 agrees with the big one
    const auto mid = build_block(50000, 60000, primes_up_to(isqrt(59999)));
    for (std::uint64_t n = 50000; n < 60000; ++n) {
        CHECK(mid.lambda_at(n) == whole.lambda_at(n));
        CHECK(mid.mu_at(n) == whole.mu_at(n));
    }
}

TEST_CASE("lambda is completely multiplicative on sampled pairs") {
    const auto block = build_range(1, 1000001);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t m = rng() % 999 + 2;
        const std::uint64_t n = rng() % (1000000 / m - 1) + 2;
        CHECK(static_cast<int>(block.lambda_at(m * n)) ==
              static_cast<int>(block.lambda_at(m)) * static_cast<int>(block.lambda_at(n)));
    }
}

TEST_CASE("block cache round-trips bit-exactly") {
    const auto block = build_block(1000, 5000, primes_up_to(100));
    const auto path = std::filesystem::temp_directory_path() / "mflab_block_test.bin";
    save_block(block, path);
    const auto loaded = load_block(path);
    CHECK(loaded.lo == block.lo);
    CHECK(loaded.hi == block.hi);
    CHECK(loaded.omega == block.omega);
    CHECK(loaded.big_omega == block.big_omega);
    CHECK(loaded.mu == block.mu);
    CHECK(loaded.lambda == block.lambda);
    CHECK(loaded.squarefree_bits == block.squarefree_bits);
    std::filesystem::remove(path);
}

TEST_CASE("factor_sweep covers every prime power once") {
    const auto primes = primes_up_to(isqrt(9999));
    std::vector<std::uint64_t> product(9000, 1);
    factor_sweep(1000, 10000, primes, [&](std::uint64_t i, std::uint64_t p, std::uint32_t e) {
        for (std::uint32_t k = 0; k < e; ++k) product[i] *= p;
    });
    for (std::uint64_t i = 0; i < 9000; ++i) CHECK(product[i] == 1000 + i);
}
