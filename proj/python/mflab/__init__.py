"""Correlation averages, pretentious distance and sign-pattern densities for
bounded multiplicative functions, backed by the C++ core."""

from ._core import (  # noqa: F401
    CoverageError,
    OverflowError,
    ValidationError,
    __version__,
    aperiodicity_mean,
    check_independence,
    correlation,
    correlation_scan,
    distance_sq,
    distance_to_archimedean,
    eval_poly,
    evaluate,
    factor,
    fractional_shift,
    katai_pair_stat,
    katai_pair_stat_phase,
    local_fourier_sup,
    min_distance,
    mrt_stat,
    primes_up_to,
    residue_pattern_density,
    short_interval_stat,
    sieve,
    sign_pattern_density,
    spec_json,
    strong_aperiodicity_scan,
    twisted_short_interval_stat,
)
