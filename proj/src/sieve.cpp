#include "mflab/sieve.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mflab/parallel.hpp"

namespace mflab {

std::uint64_t isqrt(std::uint64_t n) {
    if (n == 0) return 0;
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r > n / r) --r;
    while ((r + 1) <= n / (r + 1)) ++r;
    return r;
}

Factorization factor(std::uint64_t n) {
    if (n == 0) throw ValidationError("factor: 0 has no prime factorization");
    Factorization out;
    out.n = n;
    std::uint64_t m = n;
    auto strip = [&](std::uint64_t p) {
        std::uint32_t e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        if (e > 0) out.factors.emplace_back(p, e);
    };
    strip(2);
    strip(3);
    for (std::uint64_t d = 5; d <= m / d;) {
        strip(d);
        d += 2;
        if (d > m / d) break;
        strip(d);
        d += 4;
    }
    if (m > 1) out.factors.emplace_back(m, 1);
    return out;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
    std::vector<std::uint64_t> primes;
    if (n < 2) return primes;
    std::vector<std::uint8_t> composite(n + 1, 0);
    for (std::uint64_t i = 2; i * i <= n; ++i)
        if (!composite[i])
            for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = 1;
    primes.reserve(static_cast<std::size_t>(n > 16 ? 1.3 * n / std::log(static_cast<double>(n)) : 8));
    for (std::uint64_t i = 2; i <= n; ++i)
        if (!composite[i]) primes.push_back(i);
    return primes;
}

void ensure_prime_coverage(std::span<const std::uint64_t> primes, std::uint64_t bound,
                           const char* what) {
    if (bound < 2) return;
    const std::uint64_t have = primes.empty() ? 1 : primes.back();
    if (have >= bound) return;
    // the list may still be complete when (have, bound] holds no prime
    const std::uint64_t probe_limit = 2000;
    if (bound - have <= probe_limit) {
        bool missing = false;
        for (std::uint64_t c = have + 1; c <= bound; ++c) {
            const auto f = factor(c);
            if (f.factors.size() == 1 && f.factors[0].second == 1) {
                missing = true;
                break;
            }
        }
        if (!missing) return;
    }
    throw CoverageError(std::string(what) + ": prime list must contain all primes up to " +
                        std::to_string(bound));
}

SievedBlock build_block(std::uint64_t lo, std::uint64_t hi, std::span<const std::uint64_t> primes) {
    if (lo < 1) throw ValidationError("build_block: lo must be >= 1");
    if (hi <= lo) throw ValidationError("build_block: hi must exceed lo");
    const std::uint64_t n = hi - lo;
    ensure_prime_coverage(primes, isqrt(hi - 1), "build_block");

    SievedBlock b;
    b.lo = lo;
    b.hi = hi;
    b.omega.assign(n, 0);
    b.big_omega.assign(n, 0);
    b.squarefree_bits.assign((n + 63) / 64, ~std::uint64_t{0});

    factor_sweep(lo, hi, primes, [&](std::uint64_t i, std::uint64_t, std::uint32_t e) {
        b.omega[i] += 1;
        b.big_omega[i] += static_cast<std::uint8_t>(e);
        if (e >= 2) b.squarefree_bits[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    });

    b.mu.resize(n);
    b.lambda.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        b.lambda[i] = (b.big_omega[i] & 1) ? -1 : 1;
        const bool sqf = (b.squarefree_bits[i >> 6] >> (i & 63)) & 1u;
        b.mu[i] = sqf ? ((b.omega[i] & 1) ? -1 : 1) : 0;
    }
    return b;
}

SievedBlock build_range(std::uint64_t lo, std::uint64_t hi, std::uint64_t segment) {
    if (lo < 1) throw ValidationError("build_range: lo must be >= 1");
    if (hi <= lo) throw ValidationError("build_range: hi must exceed lo");
    if (segment == 0) throw ValidationError("build_range: segment must be positive");
    const auto primes = primes_up_to(isqrt(hi - 1));

    SievedBlock whole;
    whole.lo = lo;
    whole.hi = hi;
    const std::uint64_t n = hi - lo;
    whole.omega.resize(n);
    whole.big_omega.resize(n);
    whole.mu.resize(n);
    whole.lambda.resize(n);
    whole.squarefree_bits.resize((n + 63) / 64);

    // segment starts are aligned to 64 entries, so every squarefree word
    // belongs to exactly one segment and segments may be sieved concurrently
    const std::uint64_t seg = (segment + 63) / 64 * 64;
    const std::uint64_t n_segments = (n + seg - 1) / seg;
    parallel_for_chunks(static_cast<std::int64_t>(n_segments), default_thread_count(),
                        [&](std::int64_t s) {
        const std::uint64_t seg_lo = lo + static_cast<std::uint64_t>(s) * seg;
        const std::uint64_t seg_hi = std::min(hi, seg_lo + seg);
        SievedBlock part = build_block(seg_lo, seg_hi, primes);
        const std::uint64_t off = seg_lo - lo;
        std::memcpy(whole.omega.data() + off, part.omega.data(), part.size());
        std::memcpy(whole.big_omega.data() + off, part.big_omega.data(), part.size());
        std::memcpy(whole.mu.data() + off, part.mu.data(), part.size());
        std::memcpy(whole.lambda.data() + off, part.lambda.data(), part.size());
        std::memcpy(whole.squarefree_bits.data() + off / 64, part.squarefree_bits.data(),
                    part.squarefree_bits.size() * sizeof(std::uint64_t));
    });
    return whole;
}

namespace {

constexpr std::uint64_t kCacheMagic = 0x4d464c4232ULL; // "MFLB2"
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_raw(std::ifstream& in, T* data, std::size_t count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

} // namespace

void save_block(const SievedBlock& block, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("save_block: cannot open " + path.string());
    write_raw(out, &kCacheMagic, 1);
    write_raw(out, &kCacheVersion, 1);
    write_raw(out, &block.lo, 1);
    write_raw(out, &block.hi, 1);
    write_raw(out, block.omega.data(), block.omega.size());
    write_raw(out, block.big_omega.data(), block.big_omega.size());
    write_raw(out, block.mu.data(), block.mu.size());
    write_raw(out, block.lambda.data(), block.lambda.size());
    write_raw(out, block.squarefree_bits.data(), block.squarefree_bits.size());
    if (!out) throw Error("save_block: short write to " + path.string());
}

SievedBlock load_block(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_block: cannot open " + path.string());
    std::uint64_t magic = 0;
    std::uint32_t version = 0;
    read_raw(in, &magic, 1);
    read_raw(in, &version, 1);
    if (magic != kCacheMagic) throw Error("load_block: bad magic in " + path.string());
    if (version != kCacheVersion)
        throw Error("load_block: unsupported cache version " + std::to_string(version));
    SievedBlock b;
    read_raw(in, &b.lo, 1);
    read_raw(in, &b.hi, 1);
    if (b.hi <= b.lo) throw Error("load_block: corrupt header in " + path.string());
    const std::uint64_t n = b.hi - b.lo;
    b.omega.resize(n);
    b.big_omega.resize(n);
    b.mu.resize(n);
    b.lambda.resize(n);
    b.squarefree_bits.resize((n + 63) / 64);
    read_raw(in, b.omega.data(), n);
    read_raw(in, b.big_omega.data(), n);
    read_raw(in, b.mu.data(), n);
    read_raw(in, b.lambda.data(), n);
    read_raw(in, b.squarefree_bits.data(), b.squarefree_bits.size());
    if (!in) throw Error("load_block: truncated file " + path.string());
    return b;
}

} // namespace mflab
