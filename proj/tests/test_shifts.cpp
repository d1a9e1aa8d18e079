#include <doctest.h>

#include <random>
#include <set>

#include "mflab/shifts.hpp"

using namespace mflab;

namespace {
IntPolynomial P(const std::string& text, std::uint32_t arity = 1) {
    return IntPolynomial::parse(text, arity);
}
} // namespace

TEST_CASE("eval_poly: spec examples") {
    CHECK(P("n^2").eval(std::vector<std::int64_t>{7}) == 49);
    CHECK(P("n1*n2 - 3", 2).eval(std::vector<std::int64_t>{2, 5}) == 7);
    IntPolynomial zero(1);
    CHECK(zero.eval(std::vector<std::int64_t>{12345}) == 0);

    CHECK(P("3*n^2 - 2*n + 1").eval(std::vector<std::int64_t>{4}) == 41);
    CHECK_THROWS_AS(P("n^10").eval(std::vector<std::int64_t>{100000000}), OverflowError);
    CHECK_THROWS_AS(P("n").eval(std::vector<std::int64_t>{1, 2}), ValidationError);
}

TEST_CASE("polynomial parsing round trip") {
    const auto p = P("2*n1^2*n2 - n1 + 7", 2);
    CHECK(p.terms().size() == 3);
    const auto q = IntPolynomial::parse(p.to_string(), 2);
    CHECK(q.terms() == p.terms());
    CHECK_THROWS_AS(P("n3", 2), ValidationError);
    CHECK_THROWS_AS(P("x + 1"), ValidationError);
}

TEST_CASE("check_independence: spec examples with exact witnesses") {
    {
        const std::vector<IntPolynomial> polys{P("n"), P("n^2")};
        const auto r = check_independence(polys);
        CHECK(r.certified);
    }
    {
        const std::vector<IntPolynomial> polys{P("n"), P("2*n")};
        const auto r = check_independence(polys);
        REQUIRE_FALSE(r.certified);
        CHECK(r.witness == std::vector<std::int64_t>{0, 2, -1});
    }
    {
        const std::vector<IntPolynomial> polys{P("n1", 2), P("n2", 2), P("n1 + n2 + 1", 2)};
        const auto r = check_independence(polys);
        REQUIRE_FALSE(r.certified);
        CHECK(r.witness == std::vector<std::int64_t>{1, 1, 1, -1});
    }
    {
        // constant polynomial alone is dependent with 1
        const std::vector<IntPolynomial> polys{P("5")};
        const auto r = check_independence(polys);
        CHECK_FALSE(r.certified);
    }
}

TEST_CASE("check_independence: permutation and scaling invariance, witness validity") {
    std::mt19937_64 rng(2024);
    auto random_poly = [&](std::uint32_t arity) {
        IntPolynomial p(arity);
        const int terms = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < terms; ++t) {
            IntPolynomial::Monomial mono(arity);
            for (auto& e : mono) e = rng() % 3;
            p.add_term(mono, static_cast<std::int64_t>(rng() % 9) - 4);
        }
        return p;
    };
    for (int iter = 0; iter < 40; ++iter) {
        const std::uint32_t arity = 1 + rng() % 2;
        std::vector<IntPolynomial> polys;
        for (int i = 0; i < 3; ++i) polys.push_back(random_poly(arity));
        const auto r = check_independence(polys);

        std::vector<IntPolynomial> shuffled = {polys[2], polys[0], polys[1]};
        CHECK(check_independence(shuffled).certified == r.certified);

        if (r.certified) {
            // scaling a member by a non-zero integer preserves the certificate
            std::vector<IntPolynomial> scaled = polys;
            IntPolynomial doubled(arity);
            for (const auto& [mono, c] : polys[1].terms()) doubled.add_term(mono, 3 * c);
            scaled[1] = doubled;
            CHECK(check_independence(scaled).certified);
        } else {
            // witness must vanish identically: test at 20 random points
            REQUIRE(r.witness.size() == polys.size() + 1);
            for (int pt = 0; pt < 20; ++pt) {
                std::vector<std::int64_t> x(arity);
                for (auto& xi : x) xi = static_cast<std::int64_t>(rng() % 2001) - 1000;
                __int128 total = r.witness[0];
                for (std::size_t j = 0; j < polys.size(); ++j)
                    total += static_cast<__int128>(r.witness[j + 1]) * polys[j].eval(x);
                CHECK(total == 0);
            }
        }
    }
}

TEST_CASE("fractional_shift: spec examples and monotonicity") {
    CHECK(fractional_shift(1.5, 4) == 8); // 4^{3/2} exactly
    CHECK(fractional_shift(1.5, 2) == 2);
    CHECK(fractional_shift(0.5, 10) == 3);
    CHECK(fractional_shift(2.5, 200) == 565685); // 200^2 * sqrt(200)

    for (double c : {0.5, 1.3, 1.5, 2.5}) {
        std::int64_t prev = 0;
        for (std::uint64_t n = 1; n <= 500; ++n) {
            const auto v = fractional_shift(c, n);
            CHECK(v >= prev);
            prev = v;
        }
    }
    CHECK_THROWS_AS(fractional_shift(-1.0, 5), ValidationError);
    CHECK_THROWS_AS(fractional_shift(1.5, 0), ValidationError);
}

TEST_CASE("ShiftFamily: certification and shift evaluation") {
    auto fam = ShiftFamily::polynomial({P("n"), P("n^2")});
    CHECK(fam.independence == IndependenceStatus::Certified);
    CHECK(fam.shifts_at(std::vector<std::int64_t>{10}) == std::vector<std::int64_t>{10, 100});

    auto dep = ShiftFamily::polynomial({P("n"), P("2*n")});
    CHECK(dep.independence == IndependenceStatus::Dependent);
    CHECK_FALSE(dep.witness.empty());

    auto frac = ShiftFamily::fractional({1.5, 2.5});
    CHECK(frac.independence == IndependenceStatus::NotApplicable);
    CHECK(frac.fractional_hypothesis_ok());
    CHECK(frac.shifts_at(std::vector<std::int64_t>{4}) == std::vector<std::int64_t>{8, 32});

    CHECK_FALSE(ShiftFamily::fractional({1.5, 2.0}).fractional_hypothesis_ok());
    CHECK_FALSE(ShiftFamily::fractional({1.5, 1.5}).fractional_hypothesis_ok());
    CHECK_THROWS_AS(ShiftFamily::fractional({-0.5}), ValidationError);
}

TEST_CASE("LatticeBox: row-major enumeration") {
    const auto b1 = LatticeBox::interval(1, 3);
    BoxPointStream s1(b1);
    CHECK(*s1.next() == std::vector<std::int64_t>{1});
    CHECK(*s1.next() == std::vector<std::int64_t>{2});
    CHECK(*s1.next() == std::vector<std::int64_t>{3});
    CHECK_FALSE(s1.next().has_value());
    s1.restart();
    CHECK(s1.next().has_value());

    const auto b2 = LatticeBox::make({1, 5}, {2, 5});
    CHECK(b2.point_count() == 2);
    CHECK(b2.point_at(0) == std::vector<std::int64_t>{1, 5});
    CHECK(b2.point_at(1) == std::vector<std::int64_t>{2, 5});

    const auto b3 = LatticeBox::interval(7, 7);
    CHECK(b3.point_count() == 1);
    CHECK(b3.point_at(0) == std::vector<std::int64_t>{7});

    CHECK_THROWS_AS(LatticeBox::make({0}, {3}), ValidationError);
    CHECK_THROWS_AS(LatticeBox::make({4}, {3}), ValidationError);
    CHECK_THROWS_AS(LatticeBox::make({}, {}), ValidationError);
}

TEST_CASE("every box point exactly once") {
    const auto box = LatticeBox::make({1, 2, 1}, {3, 4, 2});
    BoxPointStream stream(box);
    std::set<std::vector<std::int64_t>> seen;
    while (auto p = stream.next()) {
        CHECK(seen.insert(*p).second);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK((*p)[i] >= box.lo[i]);
            CHECK((*p)[i] <= box.hi[i]);
        }
    }
    CHECK(seen.size() == box.point_count());
}
