"""Exact pressures, variational bounds and cascade checks for random energy models."""

from ._remkit import (
    CapacityError,
    CheckReport,
    DegenerateError,
    FDistribution,
    GremParams,
    InvarianceReport,
    PressureEstimate,
    TailTooLargeError,
    __version__,
    beta_c,
    concentration_bound,
    concentration_check,
    critical_temperatures,
    derivative_check,
    grem_decomposition,
    grem_lower_check,
    grem_objective,
    invariance_test,
    lipschitz_constant,
    log_partition,
    numeric_optimize,
    optimize,
    overlap_decay_check,
    overlap_expectation,
    overlap_ratio,
    q_grem,
    q_rem,
    quenched_pressure,
    quenched_pressure_sweep,
    rem_stability_constant,
    sample_ppp,
    stability_constant,
    sum_rule_check,
    upper_bound_check,
    weight_sum,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
