#include <doctest.h>

#include <cmath>
#include <random>

#include "mflab/correlator.hpp"
#include "mflab/pretense.hpp"

using namespace mflab;

namespace {

const SievedBlock& block100k() {
    static const SievedBlock b = build_range(1, 110001);
    return b;
}

EvaluatedTable table_of(const FunctionSpec& spec) { return evaluate(spec, block100k()); }

/// Brute-force correlation oracle straight from the defining sum, long
/// double accumulation, Z-extension included.
cplx correlation_oracle(const std::vector<const EvaluatedTable*>& tables,
                        const std::vector<std::int64_t>& shifts, std::uint64_t M) {
    std::complex<long double> acc{0.0L, 0.0L};
    for (std::uint64_t m = 1; m <= M; ++m) {
        cplx prod = tables[0]->value(static_cast<std::int64_t>(m));
        for (std::size_t j = 0; j < shifts.size(); ++j)
            prod *= tables[j + 1]->value(static_cast<std::int64_t>(m) + shifts[j]);
        acc += std::complex<long double>(prod.real(), prod.imag());
    }
    acc /= static_cast<long double>(M);
    return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

} // namespace

TEST_CASE("correlation: constant one and the hand-summed lambda example") {
    const auto one = table_of(FunctionSpec::one());
    const auto lam = table_of(FunctionSpec::liouville());

    const EvaluatedTable* ones[2] = {&one, &one};
    const std::int64_t s5[1] = {5};
    CHECK(std::abs(correlation(ones, s5, 1000) - cplx{1.0, 0.0}) <= 1e-15);

    // (1/10) sum lambda(m) lambda(m+1), m = 1..10 -> -0.4
    const EvaluatedTable* lams[2] = {&lam, &lam};
    const std::int64_t s1[1] = {1};
    const cplx c = correlation(lams, s1, 10);
    CHECK(c.real() == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(c.imag() == 0.0);
}

TEST_CASE("correlation with l=0 equals aperiodicity_mean") {
    const auto lam = table_of(FunctionSpec::liouville());
    const EvaluatedTable* t[1] = {&lam};
    const cplx c = correlation(t, {}, 100000);
    const cplx m = aperiodicity_mean(FunctionSpec::liouville(), 1, 0, 100000);
    CHECK(std::abs(c - m) <= 1e-14);
}

TEST_CASE("correlation: exact and dense paths agree with the oracle") {
    const auto lam = table_of(FunctionSpec::liouville());
    const auto mu = table_of(FunctionSpec::mobius());
    const auto f3 = table_of(FunctionSpec::root_of_unity(3));
    const auto arch = table_of(FunctionSpec::archimedean(0.8));

    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 6; ++iter) {
        std::vector<const EvaluatedTable*> tables{&lam, &f3, &mu};
        std::vector<std::int64_t> shifts{static_cast<std::int64_t>(rng() % 50),
                                         static_cast<std::int64_t>(rng() % 2000) - 1000};
        const std::uint64_t M = 5000 + rng() % 5000;
        const cplx got = correlation(tables, shifts, M);
        const cplx want = correlation_oracle(tables, shifts, M);
        CHECK(std::abs(got - want) <= 1e-11);

        // dense route (archimedean factor forces it)
        std::vector<const EvaluatedTable*> dtables{&lam, &arch};
        std::vector<std::int64_t> dshift{shifts[0]};
        const cplx dgot = correlation(dtables, dshift, M);
        const cplx dwant = correlation_oracle(dtables, dshift, M);
        CHECK(std::abs(dgot - dwant) <= 1e-10);
    }
}

TEST_CASE("correlation: negative shifts pass through the Z-extension") {
    const auto lam = table_of(FunctionSpec::liouville());
    std::vector<const EvaluatedTable*> tables{&lam, &lam};
    std::vector<std::int64_t> shifts{-7};
    const cplx got = correlation(tables, shifts, 300);
    const cplx want = correlation_oracle(tables, shifts, 300);
    CHECK(std::abs(got - want) <= 1e-13);
}

TEST_CASE("correlation: coverage gap is a named error") {
    const auto lam = table_of(FunctionSpec::liouville());
    std::vector<const EvaluatedTable*> tables{&lam, &lam};
    std::vector<std::int64_t> shifts{50000};
    CHECK_THROWS_WITH_AS(correlation(tables, shifts, 100000), doctest::Contains("coverage"),
                         CoverageError);
}

TEST_CASE("conjugation symmetry: conjugating every factor conjugates the average") {
    const auto f3 = table_of(FunctionSpec::root_of_unity(3));
    const auto f3c = table_of(FunctionSpec::conjugate(FunctionSpec::root_of_unity(3)));
    std::vector<const EvaluatedTable*> tables{&f3, &f3};
    std::vector<const EvaluatedTable*> ctables{&f3c, &f3c};
    std::vector<std::int64_t> shifts{11};
    const cplx a = correlation(tables, shifts, 50000);
    const cplx b = correlation(ctables, shifts, 50000);
    CHECK(std::abs(a - std::conj(b)) <= 1e-13);
}

TEST_CASE("correlation series: checkpoints equal independent runs") {
    const auto lam = table_of(FunctionSpec::liouville());
    std::vector<const EvaluatedTable*> tables{&lam, &lam};
    std::vector<std::int64_t> shifts{3};
    const auto window = EvaluationWindow::make({100, 1000, 10000});
    const auto series = correlation_series(tables, shifts, window);
    REQUIRE(series.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const cplx direct = correlation(tables, shifts, window.m_grid[k]);
        CHECK(std::abs(series[k] - direct) <= 1e-15);
    }
}

TEST_CASE("ud_statistic: spec examples") {
    std::vector<cplx> constant(10, cplx{0.3, -0.2});
    CHECK(ud_statistic(constant, {0.3, -0.2}) == 0.0);

    std::vector<cplx> alt{{-1.0, 0.0}, {1.0, 0.0}};
    CHECK(ud_statistic(alt, {0.0, 0.0}) == 1.0);

    std::vector<cplx> recip{{1.0, 0.0}, {0.5, 0.0}, {1.0 / 3.0, 0.0}, {0.25, 0.0}};
    CHECK(ud_statistic(recip, {0.0, 0.0}) == doctest::Approx(25.0 / 48.0).epsilon(1e-15));
}

TEST_CASE("correlation_scan: ones give summary exactly 1; chi3 gives 4/9") {
    auto fam = ShiftFamily::polynomial({IntPolynomial::parse("n", 1)});
    {
        auto series = correlation_scan({FunctionSpec::one()}, fam, LatticeBox::interval(1, 30),
                                       EvaluationWindow::make({1000}));
        for (const auto& v : series.data) CHECK(std::abs(v - cplx{1.0, 0.0}) <= 1e-15);
        CHECK(series.summary[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    {
        // |E chi(m+n) conj chi(m)| is 2/3, 1/3, 1/3 per n mod 3
        auto chi = FunctionSpec::character(3, {1});
        auto series = correlation_scan({chi, FunctionSpec::conjugate(chi)}, fam,
                                       LatticeBox::interval(1, 300), EvaluationWindow::make({99999}));
        CHECK(series.summary[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-3));
    }
}

TEST_CASE("correlation_scan: dependent family refused without override") {
    auto dep = ShiftFamily::polynomial(
        {IntPolynomial::parse("n", 1), IntPolynomial::parse("2*n", 1)});
    CHECK_THROWS_AS(correlation_scan({FunctionSpec::liouville()}, dep, LatticeBox::interval(1, 5),
                                     EvaluationWindow::make({100})),
                    ValidationError);
    CorrelatorOptions override_opts;
    override_opts.allow_dependent = true;
    const auto series = correlation_scan({FunctionSpec::liouville()}, dep, LatticeBox::interval(1, 5),
                                         EvaluationWindow::make({100}), override_opts);
    CHECK(series.data.size() == 5);

    auto bad_frac = ShiftFamily::fractional({1.5, 2.0});
    CHECK_THROWS_AS(correlation_scan({FunctionSpec::liouville()}, bad_frac,
                                     LatticeBox::interval(1, 5), EvaluationWindow::make({100})),
                    ValidationError);
}

TEST_CASE("correlation_scan: determinism across thread counts") {
    auto fam = ShiftFamily::polynomial({IntPolynomial::parse("n", 1), IntPolynomial::parse("n^2", 1)});
    CorrelatorOptions t1, t4;
    t1.threads = 1;
    t4.threads = 4;
    const auto a = correlation_scan({FunctionSpec::liouville()}, fam, LatticeBox::interval(1, 40),
                                    EvaluationWindow::make({1000, 20000}), t1);
    const auto b = correlation_scan({FunctionSpec::liouville()}, fam, LatticeBox::interval(1, 40),
                                    EvaluationWindow::make({1000, 20000}), t4);
    CHECK(a.data.size() == b.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        CHECK(a.data[i].real() == b.data[i].real());
        CHECK(a.data[i].imag() == b.data[i].imag());
    }
    CHECK(a.summary == b.summary);
}

TEST_CASE("short_interval_stat: exact cases") {
    CHECK(short_interval_stat(FunctionSpec::one(), 5000, 37) == 1.0);

    // full character periods cancel exactly
    const auto chi4 = FunctionSpec::character(4, {1});
    CHECK(short_interval_stat(chi4, 20000, 40) <= 1e-12);

    // liouville decays with N
    const double v10 = short_interval_stat(FunctionSpec::liouville(), 100000, 10);
    const double v100 = short_interval_stat(FunctionSpec::liouville(), 100000, 100);
    CHECK(v100 < v10);

    // integer and complex paths agree: force the dense route via a product
    // with archimedean(0), which is identically 1 but not exact-form
    const auto lam_dense = FunctionSpec::product(
        {FunctionSpec::liouville(), FunctionSpec::archimedean(0.0)});
    const double a = short_interval_stat(FunctionSpec::liouville(), 5000, 23);
    const double b = short_interval_stat(lam_dense, 5000, 23);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("twisted_short_interval_stat: t=0 equals the plain statistic") {
    const double plain = short_interval_stat(FunctionSpec::liouville(), 20000, 50);
    const double twisted = twisted_short_interval_stat(FunctionSpec::liouville(), 20000, 50, 0.0);
    CHECK(plain == doctest::Approx(twisted).epsilon(1e-12));

    // f = one, t = 1/2, N even: e(n/2) cancels pairwise
    const double v = twisted_short_interval_stat(FunctionSpec::one(), 3000, 40, 0.5);
    CHECK(v <= 1e-10);
}

TEST_CASE("mrt_stat: dense route with an archimedean twist") {
    // inner sums E_m e(it log((m+n)/m)) sit near 1 once M >> N
    const double v = mrt_stat(FunctionSpec::archimedean(1.0), 20000, 5);
    CHECK(v >= 0.9);
    CHECK(v <= 1.0 + 1e-12);
}

TEST_CASE("mrt_stat: ones, periodic 4/9 and decay for liouville") {
    CHECK(mrt_stat(FunctionSpec::one(), 4000, 20) == doctest::Approx(1.0).epsilon(1e-14));

    const auto chi3 = FunctionSpec::character(3, {1});
    const double v = mrt_stat(chi3, 120000, 99);
    CHECK(v == doctest::Approx(4.0 / 9.0).epsilon(5e-4));

    const double lam = mrt_stat(FunctionSpec::liouville(), 200000, 50);
    CHECK(lam <= 0.05);
}

TEST_CASE("local_fourier_sup: one peaks at t=0; dominates the plain statistic") {
    const auto r1 = local_fourier_sup(FunctionSpec::one(), 500, 20, 4);
    CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r1.gap == doctest::Approx(3.14159265358979 / 4).epsilon(1e-12));
    CHECK(r1.upper_bound >= r1.value);

    const double plain = short_interval_stat(FunctionSpec::liouville(), 3000, 24);
    const auto sup = local_fourier_sup(FunctionSpec::liouville(), 3000, 24, 4);
    CHECK(sup.value >= plain - 1e-12);

    // twisted statistic at any grid point stays below the sup average
    const double tw = twisted_short_interval_stat(FunctionSpec::liouville(), 3000, 24,
                                                  3.0 / (4.0 * 24.0));
    CHECK(sup.value >= tw - 1e-9);
}

TEST_CASE("local_fourier_sup: decays in N for liouville") {
    const auto table = evaluate(FunctionSpec::liouville(), build_range(1, 100000 + 101));
    const auto n10 = local_fourier_sup(table, 100000, 10, 8);
    const auto n100 = local_fourier_sup(table, 100000, 100, 8);
    CHECK(n100.value < n10.value);
}

TEST_CASE("katai_pair_stat: constants and the geometric phase bound") {
    const auto ones = EvaluatedTable::from_values(1, std::vector<cplx>(6001, cplx{1.0, 0.0}));
    CHECK(std::abs(katai_pair_stat(ones, 2, 3, 2000) - cplx{1.0, 0.0}) <= 1e-14);

    // a(n) = e(n alpha): closed-form geometric sum
    const double alpha = std::sqrt(2.0) - 1.0;
    const std::uint64_t N = 5000;
    std::vector<cplx> vals(3 * N);
    for (std::uint64_t n = 1; n <= 3 * N; ++n) {
        const double x = alpha * static_cast<double>(n);
        vals[n - 1] = unit_phase(x - std::floor(x));
    }
    const auto table = EvaluatedTable::from_values(1, std::move(vals));
    const cplx v = katai_pair_stat(table, 2, 3, N);
    const double closed = std::abs(std::sin(3.14159265358979324 * N * alpha)) /
                          (static_cast<double>(N) * std::sin(3.14159265358979324 * alpha));
    CHECK(std::abs(v) == doctest::Approx(closed).epsilon(1e-9));

    // liouville fails the Katai hypothesis identically: lambda(2n)lambda(3n) = 1
    const auto lam = table_of(FunctionSpec::liouville());
    const cplx lv = katai_pair_stat(lam, 2, 3, 30000);
    CHECK(std::abs(lv - cplx{1.0, 0.0}) <= 1e-14);

    CHECK_THROWS_AS(katai_pair_stat(lam, 4, 3, 100), ValidationError);
    CHECK_THROWS_AS(katai_pair_stat(lam, 3, 3, 100), ValidationError);
    CHECK_THROWS_AS(katai_pair_stat(lam, 2, 3, 60000), CoverageError);
}

TEST_CASE("every correlation average stays in the unit disc") {
    const auto f3 = table_of(FunctionSpec::root_of_unity(3));
    const auto arch = table_of(FunctionSpec::archimedean(1.1));
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10; ++i) {
        std::vector<const EvaluatedTable*> tables{&f3, &arch};
        std::vector<std::int64_t> shifts{static_cast<std::int64_t>(rng() % 100)};
        CHECK(std::abs(correlation(tables, shifts, 1000 + rng() % 9000)) <= 1.0 + 1e-12);
    }
}
