#pragma once

#include <cstdint>
#include <vector>

#include "mflab/common.hpp"
#include "mflab/funcspec.hpp"

namespace mflab {

/// t-search strategy for M(f;N) = min_{|t|<=N} D(f, n^{it}; N)^2.
/// Coarse uniform pass on |t| <= 1 (step ~ 1/(4 log^2 N), where the distance
/// varies on scale 1/log N), a multiplicative grid out to |t| = N, then
/// golden-section refinement around the best bracket.
struct SearchConfig {
    double coarse_step_factor = 0.25; // step = factor / log^2(N)
    double geometric_delta = 0.05;    // grid t = +-exp(k * delta) for 1 <= |t| <= N
    double refine_width = 1e-6;
    int threads = 0; // 0: default_thread_count()
};

struct MinDistanceResult {
    double t_star = 0.0;
    double m_value = 0.0;
};

struct DistanceProfile {
    FunctionSpec f;
    FunctionSpec twist;
    std::vector<std::uint64_t> cutoffs;
    std::vector<double> values; // D^2(f, twist; N) per cutoff
};

/// D(f,g;N)^2 = sum_{p <= N} (1 - Re(f(p) conj(g(p)))) / p.
double distance_sq(const FunctionSpec& f, const FunctionSpec& g, std::uint64_t N);

/// D(f, n^{it}; N)^2.
double distance_to_archimedean(const FunctionSpec& f, double t, std::uint64_t N);

DistanceProfile distance_profile(const FunctionSpec& f, const FunctionSpec& g,
                                 std::vector<std::uint64_t> cutoffs);

MinDistanceResult min_distance(const FunctionSpec& f, std::uint64_t N,
                               const SearchConfig& config = {});

/// (1/N) sum_{n <= N} f(a n + b); the arithmetic-progression mean whose decay
/// defines aperiodicity.
cplx aperiodicity_mean(const FunctionSpec& f, std::uint64_t a, std::uint64_t b, std::uint64_t N);

enum class AperiodicityVerdict { EvidenceStrongAperiodic, EvidenceNot, Inconclusive };

const char* to_string(AperiodicityVerdict v);

struct AperiodicityReport {
    struct Curve {
        std::uint32_t q = 1;
        std::size_t chi_index = 0;
        std::vector<double> m_values; // M(f * chi; N) per cutoff
        std::vector<double> t_stars;
    };
    FunctionSpec f;
    std::vector<std::uint64_t> cutoffs;
    std::vector<Curve> curves;
    AperiodicityVerdict verdict = AperiodicityVerdict::Inconclusive;
    double min_top_increase = 0.0; // min over curves of M[last] - M[last-1]
};

/// Any finite verdict is evidence, not proof; the thresholds are declared
/// conventions. "Strong" needs every M(f*chi;N) curve to climb by at least
/// strong_increase between the top two cutoffs; a flat-or-falling curve, or
/// one pinned below bounded_threshold, votes "not".
struct ScanConfig {
    double strong_increase = 0.2;
    double bounded_threshold = 1.0;
    SearchConfig search;
};

AperiodicityReport strong_aperiodicity_scan(const FunctionSpec& f, std::uint32_t q_max,
                                            std::vector<std::uint64_t> cutoffs,
                                            const ScanConfig& config = {});

} // namespace mflab
