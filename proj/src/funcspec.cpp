#include "mflab/funcspec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mflab/sieve.hpp"

namespace mflab {

namespace {

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
    if (mod == 1) return 0;
    unsigned __int128 acc = 1;
    unsigned __int128 b = base % mod;
    while (exp > 0) {
        if (exp & 1) acc = acc * b % mod;
        b = b * b % mod;
        exp >>= 1;
    }
    return static_cast<std::uint64_t>(acc);
}

/// Smallest primitive root mod the odd prime p.
std::uint32_t primitive_root_mod_p(std::uint32_t p) {
    const auto phi_factors = factor(p - 1).factors;
    for (std::uint32_t g = 2; g < p; ++g) {
        bool ok = true;
        for (const auto& [f, e] : phi_factors) {
            if (powmod(g, (p - 1) / f, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    throw Error("primitive_root_mod_p: none found (p not prime?)");
}

/// Generator of (Z/p^k Z)* for odd prime p: a primitive root mod p that
/// stays primitive mod p^2 lifts to all k.
std::uint64_t primitive_root_mod_pk(std::uint32_t p, std::uint32_t k) {
    std::uint64_t g = primitive_root_mod_p(p);
    if (k >= 2) {
        const std::uint64_t p2 = std::uint64_t{p} * p;
        if (powmod(g, p - 1, p2) == 1) g += p;
    }
    return g;
}

std::uint32_t gcd_u32(std::uint32_t a, std::uint32_t b) { return std::gcd(a, b); }

std::uint32_t lcm_u32(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t l = std::uint64_t{a} / gcd_u32(a, b) * b;
    if (l > 0xFFFFFFFFull) throw OverflowError("character order lcm overflow");
    return static_cast<std::uint32_t>(l);
}

} // namespace

CharacterGroup::CharacterGroup(std::uint32_t q) : q_(q) {
    if (q < 1) throw ValidationError("CharacterGroup: modulus must be >= 1");

    struct LocalGen {
        std::uint64_t pk;    // local modulus
        std::uint64_t g;     // generator mod pk
        std::uint32_t order; // order of g
    };
    std::vector<LocalGen> gens;
    for (const auto& [p, k] : factor(q).factors) {
        std::uint64_t pk = 1;
        for (std::uint32_t i = 0; i < k; ++i) pk *= p;
        if (p == 2) {
            if (k == 1) continue; // trivial group
            if (k == 2) {
                gens.push_back({4, 3, 2});
            } else {
                gens.push_back({pk, pk - 1, 2}); // -1
                gens.push_back({pk, 5, static_cast<std::uint32_t>(pk / 4)});
            }
        } else {
            const std::uint32_t ord = static_cast<std::uint32_t>(pk / p * (p - 1));
            gens.push_back({pk, primitive_root_mod_pk(static_cast<std::uint32_t>(p), k), ord});
        }
    }

    gen_orders_.reserve(gens.size());
    group_size_ = 1;
    for (const auto& g : gens) {
        gen_orders_.push_back(g.order);
        group_size_ *= g.order;
    }

    const std::size_t ng = gens.size();
    dlogs_.assign(std::size_t{q_} * ng, kNoDlog);
    for (std::size_t i = 0; i < ng; ++i) {
        // dlogs within the local factor, then spread to all residues mod q
        // that reduce to each local residue.
        const auto& gen = gens[i];
        std::vector<std::uint32_t> local(gen.pk, kNoDlog);
        std::uint64_t pow = 1;
        for (std::uint32_t x = 0; x < gen.order; ++x) {
            if (local[pow] == kNoDlog) local[pow] = x;
            pow = pow * gen.g % gen.pk;
        }
        // residues mod pk reached by powers of g alone may miss the -1 coset
        // for 2^k (k >= 3); combine both generators there instead.
        if (gen.pk % 2 == 0 && gen.pk >= 8 && gen.g == 5) {
            // handled jointly with the -1 generator below
        }
        for (std::uint64_t r = 0; r < q_; ++r) {
            if (std::gcd(r, std::uint64_t{q_}) != 1) continue;
            dlogs_[r * ng + i] = local[r % gen.pk];
        }
    }

    // For 2^k (k >= 3) the two generators must be solved jointly:
    // every odd residue mod 2^k is (-1)^s * 5^x.
    for (std::size_t i = 0; i < ng; ++i) {
        if (gens[i].g != gens[i].pk - 1 || gens[i].pk < 8) continue;
        const std::uint64_t pk = gens[i].pk;
        std::vector<std::uint32_t> sign(pk, kNoDlog), exp5(pk, kNoDlog);
        std::uint64_t pow = 1;
        for (std::uint32_t x = 0; x < pk / 4; ++x) {
            sign[pow] = 0;
            exp5[pow] = x;
            sign[pk - pow] = 1;
            exp5[pk - pow] = x;
            pow = pow * 5 % pk;
        }
        for (std::uint64_t r = 0; r < q_; ++r) {
            if (std::gcd(r, std::uint64_t{q_}) != 1) continue;
            dlogs_[r * ng + i] = sign[r % pk];
            dlogs_[r * ng + i + 1] = exp5[r % pk];
        }
    }

    // sanity: every coprime residue got a full dlog vector
    for (std::uint64_t r = 0; r < q_; ++r) {
        if (std::gcd(r, std::uint64_t{q_}) != 1) continue;
        for (std::size_t i = 0; i < ng; ++i)
            if (dlogs_[r * ng + i] == kNoDlog)
                throw Error("CharacterGroup: incomplete discrete log table");
    }
}

Character CharacterGroup::character(std::span<const std::uint32_t> exponents) const {
    const std::size_t ng = gen_orders_.size();
    if (exponents.size() != ng)
        throw ValidationError("character: exponent vector length must equal generator count");

    Character chi;
    chi.modulus = q_;
    chi.exponents.assign(exponents.begin(), exponents.end());
    for (std::size_t i = 0; i < ng; ++i) chi.exponents[i] %= gen_orders_[i];

    std::uint32_t big = 1; // lcm of generator orders
    for (std::uint32_t d : gen_orders_) big = lcm_u32(big, d);
    std::uint32_t order = 1;
    for (std::size_t i = 0; i < ng; ++i) {
        const std::uint32_t d = gen_orders_[i];
        order = lcm_u32(order, d / gcd_u32(d, chi.exponents[i] == 0 ? d : chi.exponents[i]));
    }
    chi.order = order;
    chi.principal = std::all_of(chi.exponents.begin(), chi.exponents.end(),
                                [](std::uint32_t e) { return e == 0; });

    chi.expo_table.assign(q_, Character::kNoValue);
    for (std::uint64_t r = 0; r < q_; ++r) {
        if (q_ > 1 && std::gcd(r, std::uint64_t{q_}) != 1) continue;
        std::uint64_t e_big = 0; // exponent in units of 1/big
        for (std::size_t i = 0; i < ng; ++i)
            e_big += std::uint64_t{chi.exponents[i]} * dlogs_[r * ng + i] * (big / gen_orders_[i]);
        e_big %= big;
        const std::uint64_t scaled = e_big * order;
        if (scaled % big != 0) throw Error("character: exponent not a multiple of 1/order");
        chi.expo_table[r] = static_cast<std::uint16_t>(scaled / big);
    }
    return chi;
}

Character CharacterGroup::character_by_index(std::size_t index) const {
    if (index >= group_size_) throw ValidationError("character_by_index: index out of range");
    std::vector<std::uint32_t> exps(gen_orders_.size(), 0);
    std::size_t k = index;
    for (std::size_t i = 0; i < gen_orders_.size(); ++i) {
        exps[i] = static_cast<std::uint32_t>(k % gen_orders_[i]);
        k /= gen_orders_[i];
    }
    return character(exps);
}

std::vector<Character> CharacterGroup::all() const {
    std::vector<Character> out;
    out.reserve(group_size_);
    for (std::size_t k = 0; k < group_size_; ++k) out.push_back(character_by_index(k));
    return out;
}

std::vector<Character> character_group(std::uint32_t q) {
    CharacterGroup group(q);
    auto chars = group.all();

    // orthogonality self-check, skipped when quadratic cost would bite
    const std::size_t n = chars.size();
    if (n * n * q <= 2'000'000) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                cplx s{0.0, 0.0};
                for (std::uint64_t r = 0; r < q; ++r) s += chars[i].value(r) * std::conj(chars[j].value(r));
                if (std::abs(s) > 1e-9 * static_cast<double>(q))
                    throw Error("character_group: orthogonality check failed");
            }
        }
    }
    return chars;
}

// --- FunctionSpec ---

namespace {

constexpr std::uint32_t kMaxRootOrder = 4096;

void check_unit_disc(cplx v, const char* what) {
    if (!(std::abs(v) <= 1.0 + 1e-12))
        throw ValidationError(std::string(what) + ": value leaves the unit disc");
}

} // namespace

FunctionSpec FunctionSpec::one() { return FunctionSpec{}; }

FunctionSpec FunctionSpec::liouville() {
    FunctionSpec s;
    s.kind_ = SpecKind::Liouville;
    return s;
}

FunctionSpec FunctionSpec::mobius() {
    FunctionSpec s;
    s.kind_ = SpecKind::Mobius;
    return s;
}

FunctionSpec FunctionSpec::character(std::uint32_t q, std::vector<std::uint32_t> exponents) {
    CharacterGroup group(q); // validates q and the exponent length
    Character chi = group.character(exponents);
    FunctionSpec s;
    s.kind_ = SpecKind::Character;
    s.modulus_ = q;
    s.chi_exponents_ = std::move(chi.exponents);
    return s;
}

FunctionSpec FunctionSpec::character(const Character& chi) {
    FunctionSpec s;
    s.kind_ = SpecKind::Character;
    s.modulus_ = chi.modulus;
    s.chi_exponents_ = chi.exponents;
    return s;
}

FunctionSpec FunctionSpec::root_of_unity(std::uint32_t b) {
    if (b < 1 || b > kMaxRootOrder) throw ValidationError("root_of_unity: order out of range");
    FunctionSpec s;
    s.kind_ = SpecKind::RootOfUnity;
    s.b_ = b;
    return s;
}

FunctionSpec FunctionSpec::complete_root_of_unity(std::uint32_t b) {
    if (b < 1 || b > kMaxRootOrder) throw ValidationError("complete_root_of_unity: order out of range");
    FunctionSpec s;
    s.kind_ = SpecKind::CompleteRootOfUnity;
    s.b_ = b;
    return s;
}

FunctionSpec FunctionSpec::archimedean(double t) {
    if (!std::isfinite(t)) throw ValidationError("archimedean: t must be finite");
    FunctionSpec s;
    s.kind_ = SpecKind::Archimedean;
    s.t_ = t;
    return s;
}

FunctionSpec FunctionSpec::prime_table(std::vector<std::pair<std::uint64_t, cplx>> values,
                                       cplx default_value, bool complete) {
    std::sort(values.begin(), values.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& [p, v] = values[i];
        if (i > 0 && values[i - 1].first == p)
            throw ValidationError("prime_table: duplicate prime " + std::to_string(p));
        const auto f = factor(p);
        if (f.factors.size() != 1 || f.factors[0].second != 1)
            throw ValidationError("prime_table: " + std::to_string(p) + " is not prime");
        check_unit_disc(v, "prime_table");
    }
    check_unit_disc(default_value, "prime_table default");
    FunctionSpec s;
    s.kind_ = SpecKind::PrimeTable;
    s.prime_values_ = std::move(values);
    s.default_value_ = default_value;
    s.complete_ = complete;
    return s;
}

FunctionSpec FunctionSpec::product(std::vector<FunctionSpec> factors) {
    if (factors.empty()) return one();
    if (factors.size() == 1) return std::move(factors[0]);
    FunctionSpec s;
    s.kind_ = SpecKind::Product;
    s.children_ = std::move(factors);
    return s;
}

FunctionSpec FunctionSpec::power(FunctionSpec base, std::uint32_t r) {
    if (r < 1) throw ValidationError("power: exponent must be >= 1");
    if (r == 1) return base;
    FunctionSpec s;
    s.kind_ = SpecKind::Power;
    s.power_ = r;
    s.children_.push_back(std::move(base));
    return s;
}

FunctionSpec FunctionSpec::conjugate(FunctionSpec inner) {
    FunctionSpec s;
    s.kind_ = SpecKind::Conjugate;
    s.children_.push_back(std::move(inner));
    return s;
}

cplx FunctionSpec::prime_power_value(std::uint64_t p, std::uint32_t e) const {
    switch (kind_) {
    case SpecKind::One:
        return {1.0, 0.0};
    case SpecKind::Liouville:
        return {(e & 1) ? -1.0 : 1.0, 0.0};
    case SpecKind::Mobius:
        return {e == 1 ? -1.0 : 0.0, 0.0};
    case SpecKind::Character: {
        const Character chi = CharacterGroup(modulus_).character(chi_exponents_);
        return chi.value(powmod(p, e, modulus_ == 0 ? 1 : modulus_));
    }
    case SpecKind::RootOfUnity:
        return root_of_unity_value(1, b_);
    case SpecKind::CompleteRootOfUnity:
        return root_of_unity_value(e, b_);
    case SpecKind::Archimedean:
        return std::polar(1.0, t_ * static_cast<double>(e) * std::log(static_cast<double>(p)));
    case SpecKind::PrimeTable: {
        cplx v = default_value_;
        auto it = std::lower_bound(prime_values_.begin(), prime_values_.end(), p,
                                   [](const auto& pv, std::uint64_t key) { return pv.first < key; });
        if (it != prime_values_.end() && it->first == p) v = it->second;
        if (!complete_ || e == 1) return v;
        if (v == cplx{0.0, 0.0}) return v;
        return std::polar(std::pow(std::abs(v), static_cast<double>(e)),
                          std::arg(v) * static_cast<double>(e));
    }
    case SpecKind::Product: {
        cplx acc{1.0, 0.0};
        for (const auto& c : children_) acc *= c.prime_power_value(p, e);
        return acc;
    }
    case SpecKind::Power: {
        const cplx v = children_[0].prime_power_value(p, e);
        if (v == cplx{0.0, 0.0}) return v;
        return std::polar(std::pow(std::abs(v), static_cast<double>(power_)),
                          std::arg(v) * static_cast<double>(power_));
    }
    case SpecKind::Conjugate:
        return std::conj(children_[0].prime_power_value(p, e));
    }
    throw Error("prime_power_value: unreachable");
}

cplx FunctionSpec::value_by_factorization(std::int64_t n) const {
    if (n == 0) return {0.0, 0.0};
    const auto m = static_cast<std::uint64_t>(n < 0 ? -n : n);
    cplx acc{1.0, 0.0};
    for (const auto& [p, e] : factor(m).factors) acc *= prime_power_value(p, e);
    return acc;
}

// --- JSON serialization ---

using nlohmann::json;

namespace {

json cplx_to_json(cplx v) { return json::array({v.real(), v.imag()}); }

cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ValidationError("spec json: complex must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

json FunctionSpec::to_json() const {
    switch (kind_) {
    case SpecKind::One:
        return json("one");
    case SpecKind::Liouville:
        return json("liouville");
    case SpecKind::Mobius:
        return json("mobius");
    case SpecKind::Character:
        return json{{"character", json::array({modulus_, chi_exponents_})}};
    case SpecKind::RootOfUnity:
        return json{{"root_of_unity", b_}};
    case SpecKind::CompleteRootOfUnity:
        return json{{"complete_root_of_unity", b_}};
    case SpecKind::Archimedean:
        return json{{"archimedean", t_}};
    case SpecKind::PrimeTable: {
        json primes = json::array();
        for (const auto& [p, v] : prime_values_) primes.push_back(json::array({p, v.real(), v.imag()}));
        return json{{"prime_table",
                     {{"primes", primes}, {"default", cplx_to_json(default_value_)}, {"complete", complete_}}}};
    }
    case SpecKind::Product: {
        json arr = json::array();
        for (const auto& c : children_) arr.push_back(c.to_json());
        return json{{"product", arr}};
    }
    case SpecKind::Power:
        return json{{"power", json::array({children_[0].to_json(), power_})}};
    case SpecKind::Conjugate:
        return json{{"conjugate", children_[0].to_json()}};
    }
    throw Error("to_json: unreachable");
}

FunctionSpec FunctionSpec::from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "one") return one();
        if (s == "liouville") return liouville();
        if (s == "mobius") return mobius();
        throw ValidationError("spec json: unknown atom '" + s + "'");
    }
    if (!j.is_object() || j.size() != 1) throw ValidationError("spec json: expected a single-key object");
    const auto it = j.begin();
    const std::string& key = it.key();
    const nlohmann::json& val = it.value();
    if (key == "character") {
        if (!val.is_array() || val.size() != 2) throw ValidationError("spec json: character wants [q, [exponents]]");
        return character(val[0].get<std::uint32_t>(), val[1].get<std::vector<std::uint32_t>>());
    }
    if (key == "root_of_unity") return root_of_unity(val.get<std::uint32_t>());
    if (key == "complete_root_of_unity") return complete_root_of_unity(val.get<std::uint32_t>());
    if (key == "archimedean") return archimedean(val.get<double>());
    if (key == "prime_table") {
        std::vector<std::pair<std::uint64_t, cplx>> values;
        for (const auto& row : val.at("primes"))
            values.emplace_back(row[0].get<std::uint64_t>(), cplx{row[1].get<double>(), row[2].get<double>()});
        const cplx dflt = val.contains("default") ? cplx_from_json(val["default"]) : cplx{1.0, 0.0};
        return prime_table(std::move(values), dflt, val.value("complete", false));
    }
    if (key == "product") {
        std::vector<FunctionSpec> ch;
        for (const auto& c : val) ch.push_back(from_json(c));
        return product(std::move(ch));
    }
    if (key == "power") {
        if (!val.is_array() || val.size() != 2) throw ValidationError("spec json: power wants [base, r]");
        return power(from_json(val[0]), val[1].get<std::uint32_t>());
    }
    if (key == "conjugate") return conjugate(from_json(val));
    throw ValidationError("spec json: unknown key '" + key + "'");
}

FunctionSpec FunctionSpec::parse(const std::string& text) {
    std::string s = text;
    s.erase(0, s.find_first_not_of(" \t\n"));
    s.erase(s.find_last_not_of(" \t\n") + 1);
    if (s.empty()) throw ValidationError("spec: empty string");
    if (s.front() == '{' || s.front() == '[' || s.front() == '"') {
        json j = json::parse(s, nullptr, false);
        if (j.is_discarded()) throw ValidationError("spec: malformed JSON '" + s + "'");
        return from_json(j);
    }
    if (s == "liouville" || s == "lambda") return liouville();
    if (s == "mobius" || s == "mu") return mobius();
    if (s == "one") return one();
    auto split = [&](const std::string& str) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= str.size()) {
            const auto colon = str.find(':', start);
            if (colon == std::string::npos) {
                parts.push_back(str.substr(start));
                break;
            }
            parts.push_back(str.substr(start, colon - start));
            start = colon + 1;
        }
        return parts;
    };
    const auto parts = split(s);
    try {
        if (parts.size() == 2 && parts[0] == "rou") return root_of_unity(std::stoul(parts[1]));
        if (parts.size() == 2 && parts[0] == "crou") return complete_root_of_unity(std::stoul(parts[1]));
        if (parts.size() == 2 && parts[0] == "arch") return archimedean(std::stod(parts[1]));
        if (parts.size() == 3 && parts[0] == "chi") {
            const auto q = static_cast<std::uint32_t>(std::stoul(parts[1]));
            const auto index = static_cast<std::size_t>(std::stoul(parts[2]));
            return character(CharacterGroup(q).character_by_index(index));
        }
    } catch (const std::logic_error&) {
        throw ValidationError("spec: malformed shorthand '" + s + "'");
    }
    throw ValidationError("spec: unrecognized '" + s + "'");
}

std::string FunctionSpec::to_string() const { return to_json().dump(); }

bool FunctionSpec::operator==(const FunctionSpec& other) const {
    return to_json() == other.to_json();
}

} // namespace mflab
