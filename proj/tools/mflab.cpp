// mflab: a laboratory for correlation, pretentious-distance and sign-pattern
// experiments with bounded multiplicative functions.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mflab/correlator.hpp"
#include "mflab/parallel.hpp"
#include "mflab/patterns.hpp"
#include "mflab/pretense.hpp"
#include "mflab/sieve.hpp"
#include "mflab/table.hpp"

using namespace mflab;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 2 validation, 3 coverage/overflow, 4 internal
constexpr int kExitValidation = 2;
constexpr int kExitCoverage = 3;
constexpr int kExitInternal = 4;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::uint64_t parse_count(const std::string& s) {
    const double v = std::stod(s);
    if (!(v >= 0) || v > 9.2e18) throw ValidationError("count out of range: " + s);
    return static_cast<std::uint64_t>(v + 0.5);
}

/// Counts arrive as "1e7" from flags or as plain numbers from config files.
std::uint64_t get_count(const json& v) {
    if (v.is_string()) return parse_count(v.get<std::string>());
    if (v.is_number()) {
        const double d = v.get<double>();
        if (!(d >= 0) || d > 9.2e18) throw ValidationError("count out of range: " + v.dump());
        return static_cast<std::uint64_t>(d + 0.5);
    }
    throw ValidationError("expected a count, got " + v.dump());
}

std::uint64_t get_count(const json& cfg, const char* key, std::uint64_t dflt) {
    return cfg.contains(key) ? get_count(cfg.at(key)) : dflt;
}

std::vector<std::uint64_t> get_count_list(const json& v) {
    std::vector<std::uint64_t> out;
    if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(parse_count(item));
    } else if (v.is_array()) {
        for (const auto& e : v) out.push_back(get_count(e));
    } else {
        out.push_back(get_count(v));
    }
    if (out.empty()) throw ValidationError("empty list: " + v.dump());
    return out;
}

std::uint32_t detect_arity(const std::string& text) {
    std::uint32_t arity = 1;
    for (std::size_t i = 0; i + 1 < text.size(); ++i)
        if (text[i] == 'n' && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            const auto v = static_cast<std::uint32_t>(std::atoi(text.c_str() + i + 1));
            arity = std::max(arity, v);
        }
    return arity;
}

ShiftFamily parse_family(const json& j) {
    if (j.is_string()) {
        const auto text = j.get<std::string>();
        std::uint32_t arity = detect_arity(text);
        std::vector<IntPolynomial> polys;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) polys.push_back(IntPolynomial::parse(item, arity));
        if (polys.empty()) throw ValidationError("family: no polynomials in '" + text + "'");
        return ShiftFamily::polynomial(std::move(polys));
    }
    if (j.is_object() && j.contains("frac"))
        return ShiftFamily::fractional(j["frac"].get<std::vector<double>>());
    if (j.is_object() && j.contains("polys")) {
        const auto strs = j["polys"].get<std::vector<std::string>>();
        std::uint32_t arity = j.value("arity", 0u);
        if (arity == 0)
            for (const auto& s : strs) arity = std::max(arity, detect_arity(s));
        std::vector<IntPolynomial> polys;
        for (const auto& s : strs) polys.push_back(IntPolynomial::parse(s, arity));
        return ShiftFamily::polynomial(std::move(polys));
    }
    throw ValidationError("family: expected \"n,n^2\", {\"frac\":[...]}, or {\"polys\":[...]}");
}

LatticeBox parse_box(const json& j) {
    std::vector<std::int64_t> lo, hi;
    if (j.is_string()) {
        std::stringstream ss(j.get<std::string>());
        std::string dim;
        while (std::getline(ss, dim, 'x')) {
            const auto colon = dim.find(':');
            if (colon == std::string::npos)
                throw ValidationError("box: expected lo:hi, got '" + dim + "'");
            lo.push_back(std::stoll(dim.substr(0, colon)));
            hi.push_back(std::stoll(dim.substr(colon + 1)));
        }
    } else if (j.is_array()) {
        for (const auto& pair : j) {
            lo.push_back(pair.at(0).get<std::int64_t>());
            hi.push_back(pair.at(1).get<std::int64_t>());
        }
    } else {
        throw ValidationError("box: expected \"1:200\" or [[1,200],...]");
    }
    return LatticeBox::make(std::move(lo), std::move(hi));
}

FunctionSpec get_spec(const json& v) {
    return v.is_string() ? FunctionSpec::parse(v.get<std::string>()) : FunctionSpec::from_json(v);
}

std::vector<FunctionSpec> parse_functions(const json& j) {
    std::vector<FunctionSpec> out;
    if (j.is_string()) {
        // comma-separated shorthand names; JSON specs must use the array form
        std::stringstream ss(j.get<std::string>());
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(FunctionSpec::parse(item));
    } else if (j.is_array()) {
        for (const auto& e : j)
            out.push_back(e.is_string() ? FunctionSpec::parse(e.get<std::string>())
                                        : FunctionSpec::from_json(e));
    } else {
        out.push_back(FunctionSpec::from_json(j));
    }
    if (out.empty()) throw ValidationError("functions: none given");
    return out;
}

/// Config file merged under explicitly-set CLI flags. Accepts either a raw
/// config object or an artifact summary carrying {"config": {...}} so that
/// every artifact reproduces its own run.
json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ValidationError("config: malformed JSON in " + path);
    if (j.is_object() && j.contains("config") && j["config"].is_object()) return j["config"];
    if (!j.is_object()) throw ValidationError("config: expected a JSON object in " + path);
    return j;
}

struct Out {
    std::optional<std::string> prefix; // PREFIX.csv / PREFIX.json
    std::ofstream csv_file;
    std::ostream* csv = &std::cout;

    void open_csv() {
        if (!prefix) return;
        csv_file.open(*prefix + ".csv", std::ios::trunc);
        if (!csv_file) throw Error("cannot open " + *prefix + ".csv");
        csv = &csv_file;
    }
    void write_summary(const json& summary) {
        if (prefix) {
            std::ofstream js(*prefix + ".json", std::ios::trunc);
            if (!js) throw Error("cannot open " + *prefix + ".json");
            js << summary.dump(2) << "\n";
        } else {
            std::cout << summary.dump(2) << "\n";
        }
    }
};

/// CSV metadata header: the config echo excludes the thread count so that
/// runs differing only in threads emit byte-identical CSV.
void csv_header(std::ostream& os, const char* kind, json cfg) {
    cfg.erase("threads");
    os << "# mflab " << kVersion << " " << kind << "\n";
    os << "# config: " << cfg.dump() << "\n";
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

json base_summary(const char* kind, const json& cfg, const Timer& timer) {
    return json{{"tool", "mflab"},
                {"version", kVersion},
                {"kind", kind},
                {"config", cfg},
                {"threads", cfg.value("threads", 0)},
                {"wall_time_s", timer.seconds()}};
}

// --- per-command config plumbing ---------------------------------------------

/// Tracks which CLI flags were explicitly passed so they win over the file.
struct CfgBuilder {
    json file;       // from --config
    json flags;      // explicitly passed flags
    json defaults;   // per-command defaults

    json merged() const {
        json out = defaults;
        for (const auto& [k, v] : file.items()) out[k] = v;
        for (const auto& [k, v] : flags.items()) out[k] = v;
        return out;
    }
};

int thread_count(const json& cfg) {
    const int t = cfg.value("threads", 0);
    return t > 0 ? t : default_thread_count();
}

// --- commands -----------------------------------------------------------------

int cmd_sieve(const json& cfg, Out& out) {
    Timer timer;
    const std::uint64_t lo = get_count(cfg.at("lo"));
    const std::uint64_t hi = get_count(cfg.at("hi"));
    const std::uint64_t segment = get_count(cfg, "segment", kDefaultSegment);
    const SievedBlock block = build_range(lo, hi, segment);

    if (cfg.contains("cache")) {
        std::filesystem::path path = cfg["cache"].get<std::string>();
        if (const char* dir = std::getenv("MFLAB_CACHE_DIR"); dir && path.is_relative())
            path = std::filesystem::path(dir) / path;
        save_block(block, path);
    }
    out.open_csv();
    csv_header(*out.csv, "sieve", cfg);
    *out.csv << "n,lambda,mu,omega,big_omega,squarefree\n";
    const bool emit_rows = !cfg.value("summary_only", false);
    if (emit_rows)
        for (std::uint64_t n = lo; n < hi; ++n)
            *out.csv << n << "," << int(block.lambda_at(n)) << "," << int(block.mu_at(n)) << ","
                     << int(block.omega_at(n)) << "," << int(block.big_omega_at(n)) << ","
                     << int(block.squarefree(n)) << "\n";

    json summary = base_summary("sieve", cfg, timer);
    summary["lo"] = lo;
    summary["hi"] = hi;
    std::uint64_t squarefree_count = 0;
    for (std::uint64_t n = lo; n < hi; ++n)
        if (block.squarefree(n)) ++squarefree_count;
    summary["squarefree_count"] = squarefree_count;
    out.write_summary(summary);
    return 0;
}

int cmd_eval(const json& cfg, Out& out) {
    Timer timer;
    const auto spec = parse_functions(cfg.at("functions"))[0];
    const std::uint64_t lo = get_count(cfg, "lo", 1);
    const std::uint64_t hi = get_count(cfg.at("hi"));
    const SievedBlock block = build_range(lo, hi);
    const EvaluatedTable table = evaluate(spec, block);

    out.open_csv();
    csv_header(*out.csv, "eval", cfg);
    *out.csv << "n,re,im,expo,order\n";
    for (std::uint64_t n = lo; n < hi; ++n) {
        const cplx v = table.value_at_index(n - lo);
        *out.csv << n << "," << fmt17(v.real()) << "," << fmt17(v.imag());
        if (table.exact_form()) {
            const auto e = table.exponents()[n - lo];
            if (e == EvaluatedTable::kZero)
                *out.csv << ",zero," << table.order();
            else
                *out.csv << "," << e << "," << table.order();
        } else {
            *out.csv << ",,";
        }
        *out.csv << "\n";
    }
    json summary = base_summary("eval", cfg, timer);
    summary["exact_form"] = table.exact_form();
    if (table.exact_form()) summary["order"] = table.order();
    const auto report = verify_multiplicative(table, std::min<std::uint64_t>(500, table.size() / 4 + 1));
    summary["multiplicative_check"] = {{"samples", report.samples}, {"failures", report.failures}};
    out.write_summary(summary);
    return 0;
}

int cmd_distance(const json& cfg, Out& out) {
    Timer timer;
    const auto f = get_spec(cfg.at("f"));
    const auto cutoffs = get_count_list(cfg.at("N"));

    out.open_csv();
    csv_header(*out.csv, "distance", cfg);
    *out.csv << "q,chi_index,N,t_star,M_value\n";
    json rows = json::array();
    if (cfg.contains("g")) {
        const auto g = get_spec(cfg["g"]);
        for (std::uint64_t N : cutoffs) {
            const double v = distance_sq(f, g, N);
            *out.csv << "0,0," << N << "," << fmt17(0.0) << "," << fmt17(v) << "\n";
            rows.push_back({{"N", N}, {"value", v}});
        }
    } else {
        SearchConfig sc;
        sc.threads = thread_count(cfg);
        for (std::uint64_t N : cutoffs) {
            const auto r = min_distance(f, N, sc);
            *out.csv << "0,0," << N << "," << fmt17(r.t_star) << "," << fmt17(r.m_value) << "\n";
            rows.push_back({{"N", N}, {"t_star", r.t_star}, {"M", r.m_value}});
        }
    }
    json summary = base_summary("distance", cfg, timer);
    summary["rows"] = rows;
    out.write_summary(summary);
    return 0;
}

int cmd_aperiodicity(const json& cfg, Out& out) {
    Timer timer;
    const auto f = get_spec(cfg.at("f"));
    const auto q_max = static_cast<std::uint32_t>(get_count(cfg, "qmax", 4));
    const auto cutoffs = cfg.contains("cutoffs") ? get_count_list(cfg.at("cutoffs"))
                             : std::vector<std::uint64_t>{10000, 1000000};
    ScanConfig sc;
    sc.strong_increase = cfg.value("threshold", 0.2);
    sc.bounded_threshold = cfg.value("bound", 1.0);
    sc.search.threads = thread_count(cfg);

    const auto report = strong_aperiodicity_scan(f, q_max, cutoffs, sc);

    out.open_csv();
    csv_header(*out.csv, "aperiodicity", cfg);
    *out.csv << "q,chi_index,N,t_star,M_value\n";
    for (const auto& curve : report.curves)
        for (std::size_t k = 0; k < cutoffs.size(); ++k)
            *out.csv << curve.q << "," << curve.chi_index << "," << cutoffs[k] << ","
                     << fmt17(curve.t_stars[k]) << "," << fmt17(curve.m_values[k]) << "\n";

    json summary = base_summary("aperiodicity", cfg, timer);
    summary["verdict"] = to_string(report.verdict);
    summary["min_top_increase"] = report.min_top_increase;
    out.write_summary(summary);
    return 0;
}

CorrelatorOptions correlator_options(const json& cfg) {
    CorrelatorOptions o;
    o.threads = thread_count(cfg);
    o.allow_dependent = cfg.value("override_dependent", false);
    return o;
}

int cmd_correlate(const json& cfg, Out& out) {
    Timer timer;
    auto functions = parse_functions(cfg.at("functions"));
    auto family = parse_family(cfg.at("family"));
    auto box = parse_box(cfg.at("box"));
    auto window = EvaluationWindow::make(get_count_list(cfg.at("M")));
    const auto series =
        correlation_scan(std::move(functions), std::move(family), std::move(box), window,
                         correlator_options(cfg));

    out.open_csv();
    csv_header(*out.csv, "correlate", cfg);
    const std::size_t r = series.box.arity();
    for (std::size_t d = 1; d <= r; ++d) *out.csv << "n_" << d << ",";
    *out.csv << "M,re,im,abs\n";
    const std::uint64_t points = series.box.point_count();
    for (std::size_t k = 0; k < window.m_grid.size(); ++k)
        for (std::uint64_t rank = 0; rank < points; ++rank) {
            const auto point = series.box.point_at(rank);
            for (const auto c : point) *out.csv << c << ",";
            const cplx v = series.at(k, rank);
            *out.csv << window.m_grid[k] << "," << fmt17(v.real()) << "," << fmt17(v.imag()) << ","
                     << fmt17(std::abs(v)) << "\n";
        }

    json summary = base_summary("correlate", cfg, timer);
    summary["family"] = cfg.at("family");
    json fns = json::array();
    for (const auto& f : series.functions) fns.push_back(f.to_json());
    summary["functions"] = fns;
    summary["M_grid"] = window.m_grid;
    summary["ud_statistic"] = series.summary;
    summary["independence"] = series.family.independence == IndependenceStatus::Certified
                                  ? "certified"
                                  : series.family.independence == IndependenceStatus::Dependent
                                        ? "dependent"
                                        : "not-applicable";
    out.write_summary(summary);
    return 0;
}

int cmd_shortint(const json& cfg, Out& out, bool twisted) {
    Timer timer;
    const auto f = get_spec(cfg.at("f"));
    const std::uint64_t M = get_count(cfg.at("M"));
    const auto Ns = get_count_list(cfg.at("N"));
    const double t = cfg.value("t", 0.0);

    const EvaluatedTable table = evaluate(f, build_range(1, M + Ns.back() + 1));

    out.open_csv();
    csv_header(*out.csv, twisted ? "twisted-shortint" : "shortint", cfg);
    *out.csv << (twisted ? "M,N,t,value\n" : "M,N,value\n");
    json rows = json::array();
    for (std::uint64_t N : Ns) {
        const double v = twisted ? twisted_short_interval_stat(table, M, N, t)
                                 : short_interval_stat(table, M, N);
        if (twisted)
            *out.csv << M << "," << N << "," << fmt17(t) << "," << fmt17(v) << "\n";
        else
            *out.csv << M << "," << N << "," << fmt17(v) << "\n";
        rows.push_back({{"M", M}, {"N", N}, {"value", v}});
    }
    json summary = base_summary(twisted ? "twisted-shortint" : "shortint", cfg, timer);
    summary["rows"] = rows;
    out.write_summary(summary);
    return 0;
}

int cmd_mrt(const json& cfg, Out& out) {
    Timer timer;
    const auto f = get_spec(cfg.at("f"));
    const std::uint64_t M = get_count(cfg.at("M"));
    const auto Ns = get_count_list(cfg.at("N"));
    const EvaluatedTable table = evaluate(f, build_range(1, M + Ns.back() + 1));

    out.open_csv();
    csv_header(*out.csv, "mrt", cfg);
    *out.csv << "M,N,value\n";
    json rows = json::array();
    for (std::uint64_t N : Ns) {
        const double v = mrt_stat(table, M, N);
        *out.csv << M << "," << N << "," << fmt17(v) << "\n";
        rows.push_back({{"M", M}, {"N", N}, {"value", v}});
    }
    json summary = base_summary("mrt", cfg, timer);
    summary["rows"] = rows;
    out.write_summary(summary);
    return 0;
}

int cmd_fourier(const json& cfg, Out& out) {
    Timer timer;
    const auto f = get_spec(cfg.at("f"));
    const std::uint64_t M = get_count(cfg.at("M"));
    const auto Ns = get_count_list(cfg.at("N"));
    const auto oversample = static_cast<std::uint32_t>(get_count(cfg, "oversample", 8));
    const EvaluatedTable table = evaluate(f, build_range(1, M + Ns.back() + 1));

    out.open_csv();
    csv_header(*out.csv, "fourier", cfg);
    *out.csv << "M,N,oversample,value,gap,upper_bound\n";
    json rows = json::array();
    for (std::uint64_t N : Ns) {
        const auto r = local_fourier_sup(table, M, N, oversample);
        *out.csv << M << "," << N << "," << oversample << "," << fmt17(r.value) << ","
                 << fmt17(r.gap) << "," << fmt17(r.upper_bound) << "\n";
        rows.push_back({{"M", M}, {"N", N}, {"value", r.value}, {"gap", r.gap}});
    }
    json summary = base_summary("fourier", cfg, timer);
    summary["rows"] = rows;
    out.write_summary(summary);
    return 0;
}

int cmd_katai(const json& cfg, Out& out) {
    Timer timer;
    const std::uint64_t p = get_count(cfg, "p", 2);
    const std::uint64_t q = get_count(cfg, "q", 3);
    const std::uint64_t N = get_count(cfg.at("N"));
    const std::uint64_t need = std::max(p, q) * N;

    EvaluatedTable table = [&] {
        if (cfg.contains("alpha")) {
            // a(n) = e(n * alpha): the pure-phase test sequence
            const double alpha = cfg["alpha"].get<double>();
            std::vector<cplx> vals(need);
            for (std::uint64_t n = 1; n <= need; ++n) {
                const double x = alpha * static_cast<double>(n);
                vals[n - 1] = unit_phase(x - std::floor(x));
            }
            return EvaluatedTable::from_values(1, std::move(vals));
        }
        const auto f = get_spec(cfg.at("a"));
        return evaluate(f, build_range(1, need + 1));
    }();

    const cplx v = katai_pair_stat(table, p, q, N);
    out.open_csv();
    csv_header(*out.csv, "katai", cfg);
    *out.csv << "p,q,N,re,im,abs\n";
    *out.csv << p << "," << q << "," << N << "," << fmt17(v.real()) << "," << fmt17(v.imag()) << ","
             << fmt17(std::abs(v)) << "\n";
    json summary = base_summary("katai", cfg, timer);
    summary["value"] = {{"re", v.real()}, {"im", v.imag()}, {"abs", std::abs(v)}};
    out.write_summary(summary);
    return 0;
}

int cmd_patterns(const json& cfg, Out& out) {
    Timer timer;
    PatternQuery q;
    const auto mode = cfg.value("mode", std::string("sign"));
    if (mode == "sign")
        q.mode = PatternQuery::Mode::Sign;
    else if (mode == "residue")
        q.mode = PatternQuery::Mode::Residue;
    else
        throw ValidationError("patterns: mode must be sign or residue");

    const bool has_family = cfg.contains("family");
    if (has_family) q.family = parse_family(cfg["family"]);
    const std::size_t slots = has_family ? q.family.shift_count() + 1 : 1;

    std::optional<std::size_t> selected_pattern;
    if (q.mode == PatternQuery::Mode::Sign) {
        auto fs = parse_functions(cfg.at("functions"));
        if (fs.size() == 1 && slots > 1) fs.assign(slots, fs[0]);
        q.functions = std::move(fs);
        const auto eps_text = cfg.value("eps", std::string("all"));
        q.eps.assign(q.functions.size(), 1);
        if (eps_text != "all") {
            if (eps_text.size() != q.functions.size())
                throw ValidationError("patterns: eps length must match slot count");
            std::size_t idx = 0;
            for (std::size_t j = 0; j < eps_text.size(); ++j) {
                if (eps_text[j] == '-') {
                    q.eps[j] = -1;
                    idx |= std::size_t{1} << j;
                } else if (eps_text[j] != '+') {
                    throw ValidationError("patterns: eps must consist of + and -");
                }
            }
            selected_pattern = idx;
        }
    } else {
        const auto b_list = get_count_list(cfg.at("b"));
        for (auto b : b_list) q.moduli.push_back(static_cast<std::uint32_t>(b));
        if (q.moduli.size() != slots)
            throw ValidationError("patterns: need one modulus per slot");
        const auto counters_text = cfg.value("counters", std::string(slots, 'w'));
        if (counters_text.size() != slots)
            throw ValidationError("patterns: counters length must match slot count");
        for (char c : counters_text) {
            if (c == 'w')
                q.counters.push_back(CounterKind::SmallOmega);
            else if (c == 'W')
                q.counters.push_back(CounterKind::BigOmega);
            else
                throw ValidationError("patterns: counters must consist of w (omega) and W (Omega)");
        }
        const auto a_text = cfg.value("a", std::string("all"));
        q.residues.assign(slots, 0);
        if (a_text != "all") {
            const auto a_list = get_count_list(json(a_text));
            if (a_list.size() != slots) throw ValidationError("patterns: need one residue per slot");
            std::size_t idx = 0;
            std::uint64_t w = 1;
            for (std::size_t j = 0; j < slots; ++j) {
                q.residues[j] = static_cast<std::uint32_t>(a_list[j]);
                idx += q.residues[j] * w;
                w *= q.moduli[j];
            }
            selected_pattern = idx;
        }
    }

    const auto window = EvaluationWindow::make(get_count_list(cfg.at("M")));
    const LatticeBox box = has_family ? parse_box(cfg.at("box")) : LatticeBox::interval(1, 1);

    PatternScanOptions opts;
    opts.threads = thread_count(cfg);
    const auto scan = pattern_scan(q, box, window, opts);

    out.open_csv();
    csv_header(*out.csv, "patterns", cfg);
    const std::size_t r = box.arity();
    for (std::size_t d = 1; d <= r; ++d) *out.csv << "n_" << d << ",";
    *out.csv << "M,pattern,density,expansion_density,target\n";
    for (std::size_t k = 0; k < window.m_grid.size(); ++k)
        for (std::size_t p = 0; p < scan.labels.size(); ++p) {
            if (selected_pattern && p != *selected_pattern) continue;
            for (std::uint64_t rank = 0; rank < scan.point_count; ++rank) {
                const auto point = box.point_at(rank);
                for (const auto c : point) *out.csv << c << ",";
                const auto idx = scan.index(k, p, rank);
                *out.csv << window.m_grid[k] << "," << scan.labels[p] << ","
                         << fmt17(scan.density[idx]) << "," << fmt17(scan.expansion[idx]) << ","
                         << fmt17(scan.target) << "\n";
            }
        }

    json summary = base_summary("patterns", cfg, timer);
    summary["zeta_convention"] = "e(1/b)";
    summary["target"] = scan.target;
    summary["labels"] = scan.labels;
    json ud = json::array();
    for (std::size_t k = 0; k < window.m_grid.size(); ++k) {
        json per_pattern = json::object();
        for (std::size_t p = 0; p < scan.labels.size(); ++p)
            per_pattern[scan.labels[p]] = scan.ud_summary[k * scan.labels.size() + p];
        ud.push_back({{"M", window.m_grid[k]}, {"ud", per_pattern}});
    }
    summary["ud_statistic"] = ud;
    if (!scan.point_errors.empty()) summary["point_errors"] = scan.point_errors;
    out.write_summary(summary);
    return 0;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& data_dir) {
    // consolidated convergence tables from artifact summaries
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw ValidationError("report: cannot open " + path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ValidationError("report: malformed JSON in " + path);
        const auto kind = j.value("kind", std::string("?"));
        std::cout << "== " << path << " (" << kind << ")\n";

        if (!data_dir.empty()) {
            // plain x-y data files, one per artifact
            std::filesystem::create_directories(data_dir);
            const auto stem = std::filesystem::path(path).stem().string();
            std::ofstream dat(std::filesystem::path(data_dir) / (stem + ".dat"));
            if (!dat) throw Error("report: cannot write data file for " + path);
            if (kind == "correlate") {
                dat << "# M  ud_statistic\n";
                const auto grid = j.value("M_grid", std::vector<double>{});
                const auto ud = j.value("ud_statistic", std::vector<double>{});
                for (std::size_t k = 0; k < grid.size() && k < ud.size(); ++k)
                    dat << fmt17(grid[k]) << " " << fmt17(ud[k]) << "\n";
            } else if (kind == "patterns" && j.contains("ud_statistic")) {
                dat << "# M";
                for (const auto& label : j.value("labels", std::vector<std::string>{}))
                    dat << "  ud(" << label << ")";
                dat << "\n";
                for (const auto& row : j["ud_statistic"]) {
                    dat << fmt17(row.value("M", 0.0));
                    for (const auto& label : j.value("labels", std::vector<std::string>{}))
                        dat << " " << fmt17(row["ud"].value(label, 0.0));
                    dat << "\n";
                }
            } else if (j.contains("rows")) {
                dat << "# N  value\n";
                for (const auto& row : j["rows"])
                    dat << fmt17(row.value("N", row.value("M", 0.0))) << " "
                        << fmt17(row.value("value", row.value("M", 0.0))) << "\n";
            }
        }
        if (kind == "correlate") {
            const auto grid = j.value("M_grid", std::vector<double>{});
            const auto ud = j.value("ud_statistic", std::vector<double>{});
            std::cout << "  M          E_n |c(M;n)|   delta\n";
            for (std::size_t k = 0; k < grid.size() && k < ud.size(); ++k) {
                std::cout << "  " << fmt17(grid[k]) << "  " << fmt17(ud[k]);
                if (k > 0) std::cout << "  " << fmt17(ud[k] - ud[k - 1]);
                std::cout << "\n";
            }
        } else if (kind == "patterns" && j.contains("ud_statistic")) {
            for (const auto& row : j["ud_statistic"]) {
                std::cout << "  M=" << row.value("M", 0.0) << "\n";
                for (const auto& [label, v] : row["ud"].items())
                    std::cout << "    " << label << "  " << fmt17(v.get<double>()) << "\n";
            }
        } else if (j.contains("rows")) {
            for (const auto& row : j["rows"]) std::cout << "  " << row.dump() << "\n";
        } else if (kind == "aperiodicity") {
            std::cout << "  verdict: " << j.value("verdict", std::string("?")) << "\n";
        } else {
            std::cout << "  (no tabular view)\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mflab: correlation averages, pretentious distance and sign-pattern densities "
                 "for bounded multiplicative functions"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // shared state per subcommand
    struct Common {
        std::string config_path;
        std::string out_prefix;
        int threads = 0;
    };

    std::map<std::string, CfgBuilder> builders;
    std::map<std::string, Common> commons;

    auto add_common = [&](CLI::App* sub) {
        auto& common = commons[sub->get_name()];
        sub->add_option("--config", common.config_path, "JSON config file (flags override)");
        sub->add_option("--out", common.out_prefix, "artifact path prefix (PREFIX.csv, PREFIX.json)");
        sub->add_option("--threads", common.threads, "worker threads (default: all cores)");
    };
    auto add_str = [&](CLI::App* sub, const char* name, const char* key, const char* help) {
        auto& b = builders[sub->get_name()];
        sub->add_option_function<std::string>(
               name, [&b, key = std::string(key)](const std::string& v) { b.flags[key] = v; }, help)
            ->type_name("TEXT");
    };
    auto add_dbl = [&](CLI::App* sub, const char* name, const char* key, const char* help) {
        auto& b = builders[sub->get_name()];
        sub->add_option_function<double>(
               name, [&b, key = std::string(key)](double v) { b.flags[key] = v; }, help)
            ->type_name("REAL");
    };
    auto add_flag = [&](CLI::App* sub, const char* name, const char* key, const char* help) {
        auto& b = builders[sub->get_name()];
        sub->add_flag_function(
            name, [&b, key = std::string(key)](std::int64_t n) { b.flags[key] = n > 0; }, help);
    };

    CLI::App* sieve = app.add_subcommand("sieve", "sieve a range and emit lambda/mu/omega/Omega");
    add_common(sieve);
    add_str(sieve, "--lo", "lo", "range start (>= 1)");
    add_str(sieve, "--hi", "hi", "range end (exclusive)");
    add_str(sieve, "--segment", "segment", "segment size");
    add_str(sieve, "--cache", "cache", "write binary block cache (MFLAB_CACHE_DIR-relative)");
    add_flag(sieve, "--summary-only", "summary_only", "suppress per-n CSV rows");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a multiplicative function over a range");
    add_common(eval);
    add_str(eval, "--function", "functions", "function spec (name or JSON)");
    add_str(eval, "--lo", "lo", "range start");
    add_str(eval, "--hi", "hi", "range end (exclusive)");

    CLI::App* distance = app.add_subcommand("distance", "pretentious distance D^2(f,g;N) or M(f;N)");
    add_common(distance);
    add_str(distance, "--f", "f", "function spec");
    add_str(distance, "--g", "g", "second spec; omit to minimize over n^{it}");
    add_str(distance, "--N", "N", "cutoff list, e.g. 1e3,1e4");

    CLI::App* aper = app.add_subcommand("aperiodicity", "strong-aperiodicity evidence scan");
    add_common(aper);
    add_str(aper, "--f", "f", "function spec");
    add_str(aper, "--qmax", "qmax", "scan characters of modulus q <= qmax (default 4)");
    add_str(aper, "--cutoffs", "cutoffs", "N grid (default 1e4,1e6)");
    add_dbl(aper, "--threshold", "threshold", "strong-verdict increase threshold (default 0.2)");
    add_dbl(aper, "--bound", "bound", "bounded-curve threshold (default 1.0)");

    CLI::App* corr = app.add_subcommand("correlate", "multi-shift correlation averages over a box");
    add_common(corr);
    add_str(corr, "--functions", "functions", "spec or comma list (one spec fills all slots)");
    add_str(corr, "--family", "family", "polynomials \"n,n^2\" or JSON {\"frac\":[1.5,2.5]}");
    add_str(corr, "--box", "box", "lattice box, e.g. 1:200 or 1:50x1:50");
    add_str(corr, "--M", "M", "average length grid, e.g. 1e5,1e6,1e7");
    add_flag(corr, "--override-dependent", "override_dependent",
             "explore dependent / off-hypothesis families");

    CLI::App* shortint = app.add_subcommand("shortint", "short-interval statistic");
    add_common(shortint);
    add_str(shortint, "--f", "f", "function spec");
    add_str(shortint, "--M", "M", "outer length");
    add_str(shortint, "--N", "N", "inner length list");
    add_dbl(shortint, "--t", "t", "optional twist e(nt) (uses the twisted statistic)");

    CLI::App* mrt = app.add_subcommand("mrt", "single-correlation statistic E_n |E_m f(m+n) conj f(m)|");
    add_common(mrt);
    add_str(mrt, "--f", "f", "function spec");
    add_str(mrt, "--M", "M", "inner average length");
    add_str(mrt, "--N", "N", "outer shift range list");

    CLI::App* fourier = app.add_subcommand("fourier", "local Fourier uniformity sup over a t-grid");
    add_common(fourier);
    add_str(fourier, "--f", "f", "function spec");
    add_str(fourier, "--M", "M", "outer length");
    add_str(fourier, "--N", "N", "window length list");
    add_str(fourier, "--oversample", "oversample", "grid oversampling factor (default 8)");

    CLI::App* katai = app.add_subcommand("katai", "Katai pair average E_n a(pn) conj(a(qn))");
    add_common(katai);
    add_str(katai, "--a", "a", "sequence from a multiplicative spec");
    add_dbl(katai, "--alpha", "alpha", "use the phase sequence a(n)=e(n*alpha)");
    add_str(katai, "--p", "p", "first prime (default 2)");
    add_str(katai, "--q", "q", "second prime (default 3)");
    add_str(katai, "--N", "N", "average length");

    CLI::App* patterns = app.add_subcommand("patterns", "sign / prime-factor-count pattern densities");
    add_common(patterns);
    add_str(patterns, "--mode", "mode", "sign or residue");
    add_str(patterns, "--functions", "functions", "sign mode: specs (one fills all slots)");
    add_str(patterns, "--eps", "eps", "sign vector like +-+ or all");
    add_str(patterns, "--b", "b", "residue mode: moduli list, e.g. 2,3,2");
    add_str(patterns, "--a", "a", "residue vector like 0,1,0 or all");
    add_str(patterns, "--counters", "counters", "per slot: w=omega, W=Omega, e.g. wWw");
    add_str(patterns, "--family", "family", "shift family (omit for l=0)");
    add_str(patterns, "--box", "box", "lattice box for the shift parameter");
    add_str(patterns, "--M", "M", "average length grid");

    CLI::App* report = app.add_subcommand("report", "summarize artifact JSON files");
    std::vector<std::string> report_paths;
    std::string report_data_dir;
    report->add_option("paths", report_paths, "artifact summary files");
    report->add_option("--data-dir", report_data_dir, "also write gnuplot-style .dat files here");

    CLI11_PARSE(app, argc, argv);

    const auto run = [&](const std::string& name, auto&& fn) -> int {
        auto& b = builders[name];
        auto& common = commons[name];
        if (!common.config_path.empty()) b.file = load_config_file(common.config_path);
        if (common.threads > 0) b.flags["threads"] = common.threads;
        json cfg = b.merged();
        Out out;
        if (!common.out_prefix.empty()) out.prefix = common.out_prefix;
        return fn(cfg, out);
    };

    try {
        if (sieve->parsed()) return run("sieve", cmd_sieve);
        if (eval->parsed()) return run("eval", cmd_eval);
        if (distance->parsed()) return run("distance", cmd_distance);
        if (aper->parsed()) return run("aperiodicity", cmd_aperiodicity);
        if (corr->parsed()) return run("correlate", cmd_correlate);
        if (shortint->parsed())
            return run("shortint", [&](const json& cfg, Out& out) {
                return cmd_shortint(cfg, out, cfg.contains("t"));
            });
        if (mrt->parsed()) return run("mrt", cmd_mrt);
        if (fourier->parsed()) return run("fourier", cmd_fourier);
        if (katai->parsed()) return run("katai", cmd_katai);
        if (patterns->parsed()) return run("patterns", cmd_patterns);
        if (report->parsed()) return cmd_report(report_paths, report_data_dir);
    } catch (const ValidationError& e) {
        std::cerr << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump() << "\n";
        return kExitValidation;
    } catch (const CoverageError& e) {
        std::cerr << json{{"error", {{"type", "coverage"}, {"message", e.what()}}}}.dump() << "\n";
        return kExitCoverage;
    } catch (const OverflowError& e) {
        std::cerr << json{{"error", {{"type", "overflow"}, {"message", e.what()}}}}.dump() << "\n";
        return kExitCoverage;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump() << "\n";
        return kExitInternal;
    }
    return 0;
}
