#include <doctest.h>

#include <cmath>
#include <random>

#include "mflab/pretense.hpp"
#include "mflab/sieve.hpp"

using namespace mflab;

namespace {

/// Independent oracle: direct rational-ish prime sum for D(f,g;N)^2 with
/// long double accumulation.
long double distance_sq_oracle(const FunctionSpec& f, const FunctionSpec& g, std::uint64_t N) {
    long double s = 0.0L;
    for (std::uint64_t p : primes_up_to(N)) {
        const cplx fp = f.prime_value(p);
        const cplx gp = g.prime_value(p);
        const long double re = (long double)fp.real() * gp.real() + (long double)fp.imag() * gp.imag();
        s += (1.0L - re) / (long double)p;
    }
    return s;
}

FunctionSpec random_spec(std::mt19937_64& rng, int depth = 0) {
    const auto pick = rng() % (depth >= 2 ? 7 : 10);
    switch (pick) {
    case 0: return FunctionSpec::liouville();
    case 1: return FunctionSpec::mobius();
    case 2: return FunctionSpec::one();
    case 3: return FunctionSpec::root_of_unity(2 + rng() % 4);
    case 4: return FunctionSpec::complete_root_of_unity(2 + rng() % 4);
    case 5: {
        const std::uint32_t q = 3 + static_cast<std::uint32_t>(rng() % 5);
        const CharacterGroup g(q);
        return FunctionSpec::character(g.character_by_index(rng() % g.size()));
    }
    case 6: return FunctionSpec::archimedean(static_cast<double>(rng() % 4000) / 1000.0 - 2.0);
    case 7: return FunctionSpec::power(random_spec(rng, depth + 1), 2 + rng() % 3);
    case 8: return FunctionSpec::conjugate(random_spec(rng, depth + 1));
    default:
        return FunctionSpec::product({random_spec(rng, depth + 1), random_spec(rng, depth + 1)});
    }
}

} // namespace

TEST_CASE("distance_sq: zero cases and the N=20 value") {
    CHECK(distance_sq(FunctionSpec::liouville(), FunctionSpec::liouville(), 10000) == 0.0);
    CHECK(distance_sq(FunctionSpec::mobius(), FunctionSpec::liouville(), 100000) == 0.0);

    const double v = distance_sq(FunctionSpec::liouville(), FunctionSpec::one(), 20);
    // oracle: 2 * sum 1/p over p <= 19
    long double oracle = 0.0L;
    for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19}) oracle += 2.0L / p;
    CHECK(std::abs(v - (double)oracle) <= 1e-12);
    CHECK(v == doctest::Approx(2.9109556).epsilon(1e-6));
}

TEST_CASE("distance_sq: matches the long double oracle on assorted specs") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 12; ++i) {
        const auto f = random_spec(rng);
        const auto g = random_spec(rng);
        const double v = distance_sq(f, g, 10000);
        const long double o = distance_sq_oracle(f, g, 10000);
        CHECK(std::abs(v - (double)o) <= 1e-11);
        CHECK(v >= -1e-15);
    }
}

TEST_CASE("distance_to_archimedean: trivial zeros and basicest1 shape") {
    CHECK(distance_to_archimedean(FunctionSpec::one(), 0.0, 1000) == 0.0);
    const double self = distance_to_archimedean(FunctionSpec::archimedean(0.7), 0.7, 10000);
    CHECK(std::abs(self) <= 1e-12);

    // D(1, n^{it}; N) = sqrt(log(1 + |t| log N)) + O(1) for |t| <= 1
    const double v = distance_to_archimedean(FunctionSpec::one(), 1.0, 1000000);
    const double predicted = std::sqrt(std::log(1.0 + std::log(1e6)));
    CHECK(std::abs(std::sqrt(v) - predicted) <= 2.0);
}

TEST_CASE("distance monotonicity in N") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 8; ++i) {
        const auto f = random_spec(rng);
        const auto g = random_spec(rng);
        double prev = 0.0;
        for (std::uint64_t N : {100ull, 1000ull, 10000ull, 100000ull}) {
            const double v = distance_sq(f, g, N);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("triangle inequalities with randomized specs") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 25; ++i) {
        const auto f = random_spec(rng);
        const auto g = random_spec(rng);
        const auto h = random_spec(rng);
        for (std::uint64_t N : {1000ull, 10000ull}) {
            const double dfg = std::sqrt(distance_sq(f, g, N));
            const double dfh = std::sqrt(distance_sq(f, h, N));
            const double dhg = std::sqrt(distance_sq(h, g, N));
            CHECK(dfg <= dfh + dhg + 1e-9);
        }
    }
    for (int i = 0; i < 25; ++i) {
        const auto f1 = random_spec(rng);
        const auto f2 = random_spec(rng);
        const auto g1 = random_spec(rng);
        const auto g2 = random_spec(rng);
        const auto prod = [](const FunctionSpec& a, const FunctionSpec& b) {
            return FunctionSpec::product({a, b});
        };
        for (std::uint64_t N : {1000ull, 10000ull}) {
            const double lhs = std::sqrt(distance_sq(prod(f1, f2), prod(g1, g2), N));
            const double rhs =
                std::sqrt(distance_sq(f1, g1, N)) + std::sqrt(distance_sq(f2, g2, N));
            CHECK(lhs <= rhs + 1e-9);
        }
    }
}

TEST_CASE("min_distance: trivial minimizers") {
    const auto r1 = min_distance(FunctionSpec::one(), 10000);
    CHECK(r1.m_value == 0.0);
    CHECK(r1.t_star == 0.0);

    const auto r2 = min_distance(FunctionSpec::archimedean(0.5), 10000);
    CHECK(r2.m_value <= 1e-6);
    CHECK(std::abs(r2.t_star - 0.5) <= 1e-3);

    // never exceeds the t=0 value
    std::mt19937_64 rng(77);
    for (int i = 0; i < 5; ++i) {
        const auto f = random_spec(rng);
        const auto r = min_distance(f, 2000);
        CHECK(r.m_value <= distance_to_archimedean(f, 0.0, 2000) + 1e-12);
    }
}

TEST_CASE("min_distance: refining the grid never increases the minimum") {
    const auto f = FunctionSpec::liouville();
    SearchConfig coarse;
    coarse.refine_width = 1e-2;
    SearchConfig fine;
    fine.refine_width = 1e-6;
    const auto rc = min_distance(f, 20000, coarse);
    const auto rf = min_distance(f, 20000, fine);
    CHECK(rf.m_value <= rc.m_value + 1e-12);

    SearchConfig denser = fine;
    denser.coarse_step_factor = 0.1;
    denser.geometric_delta = 0.02;
    const auto rd = min_distance(f, 20000, denser);
    CHECK(rd.m_value <= rf.m_value + 1e-9);
}

TEST_CASE("aperiodicity_mean: exact periodic and trivial cases") {
    const cplx one_mean = aperiodicity_mean(FunctionSpec::one(), 3, 2, 5000);
    CHECK(std::abs(one_mean - cplx{1.0, 0.0}) <= 1e-15);

    // chi mod 3 at 3n+1: constant chi(1) = 1
    const auto chi3 = FunctionSpec::character(3, {1});
    const cplx m = aperiodicity_mean(chi3, 3, 1, 30000);
    CHECK(std::abs(m - cplx{1.0, 0.0}) <= 1e-12);

    // liouville mean is PNT-small
    const cplx lm = aperiodicity_mean(FunctionSpec::liouville(), 1, 0, 1000000);
    CHECK(std::abs(lm) <= 0.01);

    CHECK_THROWS_AS(aperiodicity_mean(FunctionSpec::one(), 0, 1, 10), ValidationError);
}

TEST_CASE("strong_aperiodicity_scan: verdicts at reduced scale") {
    // cutoffs chosen far apart so the 0.2-increase convention is meaningful
    const std::vector<std::uint64_t> cutoffs{10000, 1000000};

    const auto lam = strong_aperiodicity_scan(FunctionSpec::liouville(), 3, cutoffs);
    CHECK(lam.verdict == AperiodicityVerdict::EvidenceStrongAperiodic);
    CHECK(lam.curves.size() == 4); // q=1,2 principal + two mod 3
    for (const auto& curve : lam.curves) {
        REQUIRE(curve.m_values.size() == 2);
        CHECK(curve.m_values[1] > curve.m_values[0]);
    }

    const auto flat = strong_aperiodicity_scan(FunctionSpec::one(), 2, cutoffs);
    CHECK(flat.verdict == AperiodicityVerdict::EvidenceNot);

    const auto chi4 = FunctionSpec::character(4, {1});
    const auto rep = strong_aperiodicity_scan(chi4, 4, cutoffs);
    CHECK(rep.verdict == AperiodicityVerdict::EvidenceNot);

    CHECK_THROWS_AS(strong_aperiodicity_scan(FunctionSpec::one(), 0, cutoffs), ValidationError);
    CHECK_THROWS_AS(strong_aperiodicity_scan(FunctionSpec::one(), 2, {}), ValidationError);
}

TEST_CASE("non-trivial root-of-unity prime values make M(f;N) climb") {
    // f(p) a fixed non-trivial cube root of unity at all but finitely many
    // primes: M(f;N) should diverge, so the finite curve must increase
    const cplx z3 = root_of_unity_value(1, 3);
    const auto f = FunctionSpec::prime_table({{2, {1.0, 0.0}}}, z3, false);
    double prev = -1.0;
    for (const std::uint64_t N : {1000ull, 10000ull, 100000ull}) {
        const auto r = min_distance(f, N);
        CHECK(r.m_value > prev);
        prev = r.m_value;
    }
    CHECK(prev > 1.0);
}

TEST_CASE("distance_profile carries monotone values") {
    auto prof = distance_profile(FunctionSpec::liouville(), FunctionSpec::one(),
                                 {100, 1000, 10000});
    REQUIRE(prof.values.size() == 3);
    CHECK(prof.values[0] <= prof.values[1]);
    CHECK(prof.values[1] <= prof.values[2]);
}
