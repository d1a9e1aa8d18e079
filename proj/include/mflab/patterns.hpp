#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mflab/common.hpp"
#include "mflab/correlator.hpp"
#include "mflab/funcspec.hpp"
#include "mflab/shifts.hpp"

namespace mflab {

enum class CounterKind : std::uint8_t { SmallOmega, BigOmega }; // omega / Omega

struct PatternQuery {
    enum class Mode { Sign, Residue };

    Mode mode = Mode::Sign;

    // sign mode: f_j(m + p_j(n)) = eps_j, eps_j in {-1, +1}
    std::vector<FunctionSpec> functions;
    std::vector<int> eps;

    // residue mode: [counter_j(m + p_j(n))]_{b_j} = a_j
    std::vector<std::uint32_t> moduli;
    std::vector<std::uint32_t> residues;
    std::vector<CounterKind> counters;

    ShiftFamily family;              // p_1, ..., p_l (p_0 = 0 implicitly)
    std::vector<std::int64_t> point; // the shift parameter n
    std::uint64_t m_length = 0;      // M

    std::size_t slots() const {
        return mode == Mode::Sign ? functions.size() : moduli.size();
    }
    void validate() const;
};

struct PatternDensityResult {
    std::uint64_t count = 0; // matching m <= M, exact
    std::uint64_t m_length = 0;
    double density = 0.0;           // count / M
    double expansion_density = 0.0; // via the root-of-unity indicator identity
    double target = 0.0;            // 2^{-(l+1)} resp. prod(1/b_j)
};

/// Density of {m <= M : f_0(m) = eps_0, f_j(m + p_j(n)) = eps_j} by direct
/// counting, cross-checked through the correlator with the expansion of
/// prod (1 + eps_j f_j)/2.
PatternDensityResult sign_pattern_density(const PatternQuery& query);

/// Density of {m <= M : [counter_j(m + p_j(n))]_{b_j} = a_j}; the expansion
/// route goes through the f_b / f'_b indicator identity.
PatternDensityResult residue_pattern_density(const PatternQuery& query);

struct PatternScanOptions {
    int threads = 0;
};

/// Scan over every pattern (all eps vectors resp. all residue vectors), all
/// box points and all window checkpoints. Per-point failures are recorded
/// and the scan continues.
struct PatternScanResult {
    PatternQuery::Mode mode = PatternQuery::Mode::Sign;
    LatticeBox box;
    EvaluationWindow window;
    std::vector<std::string> labels; // one per pattern, slot 0 first
    double target = 0.0;             // common limit value for every pattern
    std::uint64_t point_count = 0;
    // layout: value(k, pattern, rank) = data[(k * labels.size() + pattern) * point_count + rank]
    std::vector<std::uint64_t> counts;
    std::vector<double> density;
    std::vector<double> expansion;
    /// ud_summary[k * labels.size() + pattern] = E_{n in box} |density - target|.
    std::vector<double> ud_summary;
    std::vector<std::string> point_errors;

    std::size_t index(std::size_t m_index, std::size_t pattern, std::uint64_t rank) const {
        return (m_index * labels.size() + pattern) * point_count + rank;
    }
};

PatternScanResult pattern_scan(const PatternQuery& query_template, const LatticeBox& box,
                               const EvaluationWindow& window,
                               const PatternScanOptions& options = {});

} // namespace mflab
