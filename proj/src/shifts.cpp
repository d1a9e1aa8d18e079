#include "mflab/shifts.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace mflab {

namespace {

using i128 = __int128;

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* ctx) {
    std::int64_t out;
    if (__builtin_mul_overflow(a, b, &out))
        throw OverflowError(std::string(ctx) + ": integer overflow in " + std::to_string(a) +
                            " * " + std::to_string(b));
    return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b, const char* ctx) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out))
        throw OverflowError(std::string(ctx) + ": integer overflow in " + std::to_string(a) +
                            " + " + std::to_string(b));
    return out;
}

} // namespace

void IntPolynomial::add_term(Monomial mono, std::int64_t c) {
    if (mono.size() != arity_) throw ValidationError("IntPolynomial: monomial arity mismatch");
    if (c == 0) return;
    auto it = terms_.find(mono);
    if (it == terms_.end()) {
        terms_.emplace(std::move(mono), c);
    } else {
        it->second = checked_add(it->second, c, "add_term");
        if (it->second == 0) terms_.erase(it);
    }
}

std::int64_t IntPolynomial::eval(std::span<const std::int64_t> point) const {
    if (point.size() != arity_) throw ValidationError("IntPolynomial::eval: point arity mismatch");
    std::int64_t total = 0;
    for (const auto& [mono, c] : terms_) {
        std::int64_t term = c;
        for (std::uint32_t v = 0; v < arity_; ++v)
            for (std::uint32_t e = 0; e < mono[v]; ++e)
                term = checked_mul(term, point[v], "IntPolynomial::eval");
        total = checked_add(total, term, "IntPolynomial::eval");
    }
    return total;
}

namespace {

struct PolyLexer {
    const std::string& s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    std::int64_t integer() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) throw ValidationError("polynomial: expected integer at '" + s.substr(start) + "'");
        return std::stoll(s.substr(start, pos - start));
    }
};

} // namespace

IntPolynomial IntPolynomial::parse(const std::string& text, std::uint32_t arity) {
    if (arity < 1) throw ValidationError("polynomial: arity must be >= 1");
    IntPolynomial poly(arity);
    PolyLexer lex{text};
    bool first = true;
    while (!lex.eof()) {
        std::int64_t sign = 1;
        char c = lex.peek();
        if (c == '+' || c == '-') {
            sign = c == '-' ? -1 : 1;
            ++lex.pos;
        } else if (!first) {
            throw ValidationError("polynomial: expected '+' or '-' at '" + text.substr(lex.pos) + "'");
        }
        first = false;

        std::int64_t coeff = sign;
        Monomial mono(arity, 0);
        bool saw_factor = false;
        for (;;) {
            c = lex.peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                coeff = checked_mul(coeff, lex.integer(), "polynomial parse");
                saw_factor = true;
            } else if (c == 'n') {
                ++lex.pos;
                std::uint32_t var = 0;
                if (lex.pos < text.size() && std::isdigit(static_cast<unsigned char>(text[lex.pos]))) {
                    var = static_cast<std::uint32_t>(lex.integer());
                    if (var < 1 || var > arity)
                        throw ValidationError("polynomial: variable n" + std::to_string(var) +
                                              " out of range for arity " + std::to_string(arity));
                    var -= 1;
                } else if (arity != 1) {
                    throw ValidationError("polynomial: bare 'n' needs arity 1; use n1..n" +
                                          std::to_string(arity));
                }
                std::uint32_t exp = 1;
                if (lex.peek() == '^') {
                    ++lex.pos;
                    exp = static_cast<std::uint32_t>(lex.integer());
                }
                mono[var] += exp;
                saw_factor = true;
            } else {
                break;
            }
            if (lex.peek() == '*') {
                ++lex.pos;
                continue;
            }
            if (lex.peek() == 'n' || std::isdigit(static_cast<unsigned char>(lex.peek()))) continue;
            break;
        }
        if (!saw_factor)
            throw ValidationError("polynomial: empty term in '" + text + "'");
        poly.add_term(std::move(mono), coeff);
    }
    return poly;
}

std::string IntPolynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [mono, c] : terms_) {
        if (!out.empty()) out += c < 0 ? " - " : " + ";
        else if (c < 0) out += "-";
        const std::int64_t a = c < 0 ? -c : c;
        bool printed = false;
        if (a != 1) {
            out += std::to_string(a);
            printed = true;
        }
        for (std::uint32_t v = 0; v < arity_; ++v) {
            if (mono[v] == 0) continue;
            if (printed) out += "*";
            out += arity_ == 1 ? "n" : "n" + std::to_string(v + 1);
            if (mono[v] > 1) out += "^" + std::to_string(mono[v]);
            printed = true;
        }
        if (!printed) out += "1";
    }
    return out;
}

namespace {

i128 abs128(i128 x) { return x < 0 ? -x : x; }

i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

i128 checked_mul128(i128 a, i128 b) {
    i128 out;
    if (__builtin_mul_overflow(a, b, &out))
        throw OverflowError("check_independence: coefficient growth exceeded 128 bits");
    return out;
}

/// One row of the elimination state: polynomial coefficients plus the
/// combination of original rows it represents.
struct Row {
    std::vector<i128> a;   // coefficients in the monomial basis
    std::vector<i128> aug; // combination over {1, p_1, ..., p_l}

    void reduce_content() {
        i128 g = 0;
        for (i128 x : a) g = gcd128(g, x);
        for (i128 x : aug) g = gcd128(g, x);
        if (g > 1) {
            for (i128& x : a) x /= g;
            for (i128& x : aug) x /= g;
        }
    }
};

} // namespace

IndependenceResult check_independence(std::span<const IntPolynomial> polys) {
    if (polys.empty()) return {true, {}};
    const std::uint32_t arity = polys[0].arity();
    for (const auto& p : polys)
        if (p.arity() != arity)
            throw ValidationError("check_independence: mixed arities");

    // monomial basis: the constant monomial plus everything that appears
    std::map<IntPolynomial::Monomial, std::size_t> columns;
    columns.emplace(IntPolynomial::Monomial(arity, 0), 0);
    for (const auto& p : polys)
        for (const auto& [mono, c] : p.terms())
            columns.emplace(mono, columns.size());

    const std::size_t n_cols = columns.size();
    const std::size_t n_rows = polys.size() + 1;

    auto make_row = [&](std::size_t r) {
        Row row;
        row.a.assign(n_cols, 0);
        row.aug.assign(n_rows, 0);
        row.aug[r] = 1;
        if (r == 0) {
            row.a[0] = 1; // the constant polynomial 1
        } else {
            for (const auto& [mono, c] : polys[r - 1].terms()) row.a[columns.at(mono)] = c;
        }
        return row;
    };

    std::vector<Row> pivots;          // reduced rows
    std::vector<std::size_t> pivot_col;

    for (std::size_t r = 0; r < n_rows; ++r) {
        Row row = make_row(r);
        for (std::size_t k = 0; k < pivots.size(); ++k) {
            const std::size_t col = pivot_col[k];
            if (row.a[col] == 0) continue;
            const i128 pv = pivots[k].a[col];
            const i128 fv = row.a[col];
            for (std::size_t j = 0; j < n_cols; ++j)
                row.a[j] = checked_mul128(row.a[j], pv) - checked_mul128(pivots[k].a[j], fv);
            for (std::size_t j = 0; j < n_rows; ++j)
                row.aug[j] = checked_mul128(row.aug[j], pv) - checked_mul128(pivots[k].aug[j], fv);
            row.reduce_content();
        }
        std::size_t col = n_cols;
        for (std::size_t j = 0; j < n_cols; ++j)
            if (row.a[j] != 0) {
                col = j;
                break;
            }
        if (col == n_cols) {
            // dependent: the augmented part is an exact integer dependence
            IndependenceResult res;
            res.certified = false;
            res.witness.resize(n_rows);
            i128 lead = 0;
            for (i128 x : row.aug)
                if (x != 0) {
                    lead = x;
                    break;
                }
            const bool flip = lead < 0;
            for (std::size_t j = 0; j < n_rows; ++j) {
                i128 w = flip ? -row.aug[j] : row.aug[j];
                if (w > std::numeric_limits<std::int64_t>::max() ||
                    w < std::numeric_limits<std::int64_t>::min())
                    throw OverflowError("check_independence: witness exceeds 64 bits");
                res.witness[j] = static_cast<std::int64_t>(w);
            }
            return res;
        }
        pivots.push_back(std::move(row));
        pivot_col.push_back(col);
    }
    return {true, {}};
}

std::int64_t fractional_shift(double c, std::uint64_t n) {
    if (!(c > 0.0)) throw ValidationError("fractional_shift: exponent must be positive");
    if (n < 1) throw ValidationError("fractional_shift: n must be >= 1");
    const double y = std::pow(static_cast<double>(n), c);
    if (y > 9.0e18) throw OverflowError("fractional_shift: n^c exceeds 64-bit range");
    if (std::abs(y - std::nearbyint(y)) >= 1e-9)
        return static_cast<std::int64_t>(std::floor(y));
    // near-integer: redo in extended precision and snap
    const long double yl = std::pow(static_cast<long double>(n), static_cast<long double>(c));
    const long double rl = std::nearbyintl(yl);
    if (std::abs(static_cast<double>(yl - rl)) < 1e-9) return static_cast<std::int64_t>(rl);
    return static_cast<std::int64_t>(std::floor(yl));
}

ShiftFamily ShiftFamily::polynomial(std::vector<IntPolynomial> polys) {
    if (polys.empty()) throw ValidationError("ShiftFamily: need at least one polynomial");
    const std::uint32_t arity = polys[0].arity();
    for (const auto& p : polys)
        if (p.arity() != arity) throw ValidationError("ShiftFamily: mixed arities");
    ShiftFamily fam;
    fam.kind = Kind::Polynomial;
    const auto res = check_independence(polys);
    fam.polys = std::move(polys);
    fam.independence = res.certified ? IndependenceStatus::Certified : IndependenceStatus::Dependent;
    fam.witness = res.witness;
    return fam;
}

ShiftFamily ShiftFamily::fractional(std::vector<double> exponents) {
    if (exponents.empty()) throw ValidationError("ShiftFamily: need at least one exponent");
    for (double c : exponents)
        if (!(c > 0.0)) throw ValidationError("ShiftFamily: fractional exponents must be positive");
    ShiftFamily fam;
    fam.kind = Kind::Fractional;
    fam.exponents = std::move(exponents);
    fam.independence = IndependenceStatus::NotApplicable;
    return fam;
}

bool ShiftFamily::fractional_hypothesis_ok() const {
    if (kind != Kind::Fractional) return false;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (exponents[i] == std::nearbyint(exponents[i])) return false;
        for (std::size_t j = i + 1; j < exponents.size(); ++j)
            if (exponents[i] == exponents[j]) return false;
    }
    return true;
}

std::vector<std::int64_t> ShiftFamily::shifts_at(std::span<const std::int64_t> point) const {
    std::vector<std::int64_t> out;
    if (kind == Kind::Polynomial) {
        out.reserve(polys.size());
        for (const auto& p : polys) out.push_back(p.eval(point));
    } else {
        if (point.size() != 1)
            throw ValidationError("ShiftFamily: fractional shifts take a single coordinate");
        if (point[0] < 1) throw ValidationError("ShiftFamily: fractional shifts need n >= 1");
        out.reserve(exponents.size());
        for (double c : exponents)
            out.push_back(fractional_shift(c, static_cast<std::uint64_t>(point[0])));
    }
    return out;
}

LatticeBox LatticeBox::make(std::vector<std::int64_t> lo, std::vector<std::int64_t> hi) {
    if (lo.empty() || lo.size() != hi.size())
        throw ValidationError("LatticeBox: lo/hi must be non-empty and equally sized");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] < 1) throw ValidationError("LatticeBox: coordinates start at 1");
        if (hi[i] < lo[i]) throw ValidationError("LatticeBox: hi < lo in coordinate " + std::to_string(i + 1));
    }
    LatticeBox b;
    b.lo = std::move(lo);
    b.hi = std::move(hi);
    return b;
}

LatticeBox LatticeBox::interval(std::int64_t a, std::int64_t b) { return make({a}, {b}); }

std::uint64_t LatticeBox::point_count() const {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const auto side = static_cast<std::uint64_t>(hi[i] - lo[i] + 1);
        if (side != 0 && total > std::numeric_limits<std::uint64_t>::max() / side)
            throw OverflowError("LatticeBox: point count overflow");
        total *= side;
    }
    return total;
}

std::vector<std::int64_t> LatticeBox::point_at(std::uint64_t rank) const {
    std::vector<std::int64_t> p(lo.size());
    for (std::size_t i = lo.size(); i-- > 0;) {
        const auto side = static_cast<std::uint64_t>(hi[i] - lo[i] + 1);
        p[i] = lo[i] + static_cast<std::int64_t>(rank % side);
        rank /= side;
    }
    return p;
}

std::optional<std::vector<std::int64_t>> BoxPointStream::next() {
    if (rank_ >= box_.point_count()) return std::nullopt;
    return box_.point_at(rank_++);
}

} // namespace mflab
