#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mflab/correlator.hpp"
#include "mflab/patterns.hpp"
#include "mflab/pretense.hpp"
#include "mflab/sieve.hpp"
#include "mflab/table.hpp"

namespace py = pybind11;
using namespace mflab;

namespace {

FunctionSpec spec_of(const std::string& text) { return FunctionSpec::parse(text); }

EvaluatedTable table_to(const FunctionSpec& spec, std::uint64_t hi) {
    return evaluate(spec, build_range(1, hi + 1));
}

std::vector<FunctionSpec> specs_of(const std::vector<std::string>& texts) {
    std::vector<FunctionSpec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(spec_of(t));
    return out;
}

ShiftFamily family_of(const py::object& family) {
    if (py::isinstance<py::str>(family)) {
        const auto text = family.cast<std::string>();
        std::uint32_t arity = 1;
        for (std::size_t i = 0; i + 1 < text.size(); ++i)
            if (text[i] == 'n' && std::isdigit(static_cast<unsigned char>(text[i + 1])))
                arity = std::max(arity, static_cast<std::uint32_t>(std::atoi(text.c_str() + i + 1)));
        std::vector<IntPolynomial> polys;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto comma = text.find(',', start);
            const auto piece = text.substr(start, comma == std::string::npos ? comma : comma - start);
            if (!piece.empty()) polys.push_back(IntPolynomial::parse(piece, arity));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return ShiftFamily::polynomial(std::move(polys));
    }
    return ShiftFamily::fractional(family.cast<std::vector<double>>());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Correlation averages, pretentious distance and pattern densities for bounded "
              "multiplicative functions";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<CoverageError>(m, "CoverageError", PyExc_RuntimeError);
    py::register_exception<OverflowError>(m, "OverflowError", PyExc_OverflowError);

    m.def("primes_up_to", &primes_up_to, py::arg("n"), "All primes <= n, ascending.");

    m.def(
        "factor",
        [](std::uint64_t n) {
            const auto f = factor(n);
            return f.factors;
        },
        py::arg("n"), "Trial-division factorization as [(p, e), ...].");

    m.def(
        "sieve",
        [](std::uint64_t lo, std::uint64_t hi) {
            const auto b = build_range(lo, hi);
            const auto n = static_cast<py::ssize_t>(b.size());
            py::array_t<std::int8_t> lam(n), mu(n);
            py::array_t<std::uint8_t> om(n), bom(n);
            std::memcpy(lam.mutable_data(), b.lambda.data(), b.size());
            std::memcpy(mu.mutable_data(), b.mu.data(), b.size());
            std::memcpy(om.mutable_data(), b.omega.data(), b.size());
            std::memcpy(bom.mutable_data(), b.big_omega.data(), b.size());
            py::dict out;
            out["lo"] = b.lo;
            out["hi"] = b.hi;
            out["lambda"] = lam;
            out["mu"] = mu;
            out["omega"] = om;
            out["big_omega"] = bom;
            return out;
        },
        py::arg("lo"), py::arg("hi"),
        "Exact lambda/mu/omega/Omega arrays for [lo, hi) as numpy arrays.");

    m.def(
        "evaluate",
        [](const std::string& spec, std::uint64_t hi) {
            const auto table = table_to(spec_of(spec), hi);
            py::array_t<std::complex<double>> vals(static_cast<py::ssize_t>(table.size()));
            auto* out = vals.mutable_data();
            for (std::uint64_t i = 0; i < table.size(); ++i) out[i] = table.value_at_index(i);
            return vals;
        },
        py::arg("spec"), py::arg("hi"),
        "Values f(1..hi) of a multiplicative function spec (name, shorthand or JSON).");

    m.def(
        "spec_json",
        [](const std::string& spec) { return spec_of(spec).to_string(); },
        py::arg("spec"), "Canonical JSON form of a spec string.");

    m.def(
        "distance_sq",
        [](const std::string& f, const std::string& g, std::uint64_t N) {
            return distance_sq(spec_of(f), spec_of(g), N);
        },
        py::arg("f"), py::arg("g"), py::arg("N"),
        "Pretentious distance D(f,g;N)^2 over primes p <= N.");

    m.def(
        "distance_to_archimedean",
        [](const std::string& f, double t, std::uint64_t N) {
            return distance_to_archimedean(spec_of(f), t, N);
        },
        py::arg("f"), py::arg("t"), py::arg("N"));

    m.def(
        "min_distance",
        [](const std::string& f, std::uint64_t N) {
            const auto r = min_distance(spec_of(f), N);
            return py::make_tuple(r.t_star, r.m_value);
        },
        py::arg("f"), py::arg("N"), "Returns (t_star, M(f;N)).");

    m.def(
        "aperiodicity_mean",
        [](const std::string& f, std::uint64_t a, std::uint64_t b, std::uint64_t N) {
            return aperiodicity_mean(spec_of(f), a, b, N);
        },
        py::arg("f"), py::arg("a"), py::arg("b"), py::arg("N"));

    m.def(
        "strong_aperiodicity_scan",
        [](const std::string& f, std::uint32_t q_max, std::vector<std::uint64_t> cutoffs) {
            const auto rep = strong_aperiodicity_scan(spec_of(f), q_max, std::move(cutoffs));
            py::list curves;
            for (const auto& curve : rep.curves) {
                py::dict d;
                d["q"] = curve.q;
                d["chi_index"] = curve.chi_index;
                d["M_values"] = curve.m_values;
                d["t_stars"] = curve.t_stars;
                curves.append(d);
            }
            py::dict out;
            out["verdict"] = to_string(rep.verdict);
            out["min_top_increase"] = rep.min_top_increase;
            out["curves"] = curves;
            return out;
        },
        py::arg("f"), py::arg("q_max"), py::arg("cutoffs"));

    m.def(
        "correlation",
        [](const std::vector<std::string>& functions, const std::vector<std::int64_t>& shifts,
           std::uint64_t M) {
            const auto specs = specs_of(functions);
            std::int64_t max_abs = 0;
            for (auto s : shifts) max_abs = std::max(max_abs, s < 0 ? -s : s);
            const auto block = build_range(1, M + static_cast<std::uint64_t>(max_abs) + 1);
            std::vector<EvaluatedTable> tables;
            tables.reserve(specs.size());
            for (const auto& s : specs) tables.push_back(evaluate(s, block));
            std::vector<const EvaluatedTable*> ptrs;
            for (const auto& t : tables) ptrs.push_back(&t);
            return correlation(ptrs, shifts, M);
        },
        py::arg("functions"), py::arg("shifts"), py::arg("M"),
        "(1/M) sum f_0(m) prod_j f_j(m + s_j); functions = (f_0, ..., f_l).");

    m.def(
        "correlation_scan",
        [](const std::vector<std::string>& functions, const py::object& family,
           const std::vector<std::pair<std::int64_t, std::int64_t>>& box,
           const std::vector<std::uint64_t>& m_grid, bool allow_dependent) {
            std::vector<std::int64_t> lo, hi;
            for (const auto& [a, b] : box) {
                lo.push_back(a);
                hi.push_back(b);
            }
            CorrelatorOptions opts;
            opts.allow_dependent = allow_dependent;
            const auto series =
                correlation_scan(specs_of(functions), family_of(family),
                                 LatticeBox::make(std::move(lo), std::move(hi)),
                                 EvaluationWindow::make(m_grid), opts);
            const auto points = static_cast<py::ssize_t>(series.box.point_count());
            py::array_t<std::complex<double>> data(
                {static_cast<py::ssize_t>(m_grid.size()), points});
            std::memcpy(data.mutable_data(), series.data.data(),
                        series.data.size() * sizeof(cplx));
            py::dict out;
            out["data"] = data;
            out["summary"] = series.summary;
            return out;
        },
        py::arg("functions"), py::arg("family"), py::arg("box"), py::arg("m_grid"),
        py::arg("allow_dependent") = false,
        "Full (M, n) grid of correlation averages plus E_n|c(M;n)| per M.");

    m.def(
        "short_interval_stat",
        [](const std::string& f, std::uint64_t M, std::uint64_t N) {
            return short_interval_stat(spec_of(f), M, N);
        },
        py::arg("f"), py::arg("M"), py::arg("N"));

    m.def(
        "twisted_short_interval_stat",
        [](const std::string& f, std::uint64_t M, std::uint64_t N, double t) {
            return twisted_short_interval_stat(spec_of(f), M, N, t);
        },
        py::arg("f"), py::arg("M"), py::arg("N"), py::arg("t"));

    m.def(
        "mrt_stat",
        [](const std::string& f, std::uint64_t M, std::uint64_t N) {
            return mrt_stat(spec_of(f), M, N);
        },
        py::arg("f"), py::arg("M"), py::arg("N"));

    m.def(
        "local_fourier_sup",
        [](const std::string& f, std::uint64_t M, std::uint64_t N, std::uint32_t oversample) {
            const auto r = local_fourier_sup(spec_of(f), M, N, oversample);
            return py::make_tuple(r.value, r.gap);
        },
        py::arg("f"), py::arg("M"), py::arg("N"), py::arg("oversample") = 8,
        "Returns (grid max average, certified sup gap).");

    m.def(
        "katai_pair_stat",
        [](const std::string& a, std::uint64_t p, std::uint64_t q, std::uint64_t N) {
            return katai_pair_stat(table_to(spec_of(a), std::max(p, q) * N), p, q, N);
        },
        py::arg("a"), py::arg("p"), py::arg("q"), py::arg("N"));

    m.def(
        "katai_pair_stat_phase",
        [](double alpha, std::uint64_t p, std::uint64_t q, std::uint64_t N) {
            const std::uint64_t need = std::max(p, q) * N;
            std::vector<cplx> vals(need);
            for (std::uint64_t n = 1; n <= need; ++n) {
                const double x = alpha * static_cast<double>(n);
                vals[n - 1] = unit_phase(x - std::floor(x));
            }
            return katai_pair_stat(EvaluatedTable::from_values(1, std::move(vals)), p, q, N);
        },
        py::arg("alpha"), py::arg("p"), py::arg("q"), py::arg("N"),
        "Katai pair average of the phase sequence a(n) = e(n*alpha).");

    m.def(
        "sign_pattern_density",
        [](const std::vector<std::string>& functions, const std::vector<int>& eps,
           const py::object& family, const std::vector<std::int64_t>& point, std::uint64_t M) {
            PatternQuery q;
            q.mode = PatternQuery::Mode::Sign;
            q.functions = specs_of(functions);
            q.eps = eps;
            if (!family.is_none()) q.family = family_of(family);
            q.point = point;
            q.m_length = M;
            const auto r = sign_pattern_density(q);
            py::dict out;
            out["count"] = r.count;
            out["density"] = r.density;
            out["expansion_density"] = r.expansion_density;
            out["target"] = r.target;
            return out;
        },
        py::arg("functions"), py::arg("eps"), py::arg("family") = py::none(),
        py::arg("point") = std::vector<std::int64_t>{}, py::arg("M") = 1000000);

    m.def(
        "residue_pattern_density",
        [](const std::vector<std::uint32_t>& moduli, const std::vector<std::uint32_t>& residues,
           const std::string& counters, const py::object& family,
           const std::vector<std::int64_t>& point, std::uint64_t M) {
            PatternQuery q;
            q.mode = PatternQuery::Mode::Residue;
            q.moduli = moduli;
            q.residues = residues;
            for (char c : counters)
                q.counters.push_back(c == 'W' ? CounterKind::BigOmega : CounterKind::SmallOmega);
            if (!family.is_none()) q.family = family_of(family);
            q.point = point;
            q.m_length = M;
            const auto r = residue_pattern_density(q);
            py::dict out;
            out["count"] = r.count;
            out["density"] = r.density;
            out["expansion_density"] = r.expansion_density;
            out["target"] = r.target;
            return out;
        },
        py::arg("moduli"), py::arg("residues"), py::arg("counters"),
        py::arg("family") = py::none(), py::arg("point") = std::vector<std::int64_t>{},
        py::arg("M") = 1000000);

    m.def(
        "check_independence",
        [](const std::vector<std::string>& polys, std::uint32_t arity) {
            std::vector<IntPolynomial> ps;
            ps.reserve(polys.size());
            for (const auto& s : polys) ps.push_back(IntPolynomial::parse(s, arity));
            const auto r = check_independence(ps);
            return py::make_tuple(r.certified, r.witness);
        },
        py::arg("polys"), py::arg("arity") = 1,
        "Exact rational independence of {1, p_1, ..., p_l}; returns (certified, witness).");

    m.def("fractional_shift", &fractional_shift, py::arg("c"), py::arg("n"),
          "floor(n^c) with a near-integer guard.");

    m.def(
        "eval_poly",
        [](const std::string& text, std::uint32_t arity, const std::vector<std::int64_t>& point) {
            return IntPolynomial::parse(text, arity).eval(point);
        },
        py::arg("text"), py::arg("arity"), py::arg("point"));

    m.attr("__version__") = "0.1.0";
}
