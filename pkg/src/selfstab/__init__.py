"""Simulation and Monte Carlo verification of self-stabilizing jump processes."""

from .bounds import (
    BoundReport,
    cauchy_bound,
    limit_tail_bound,
    rate_bound,
    stable_integral,
    stable_norm_constant,
    tail_sum_expectation,
)
from .construction import (
    ConvergenceTrace,
    build_limit,
    build_local_companion,
    build_multistable,
    build_stable,
    build_subordinator,
    build_truncated,
)
from .core import (
    AlphaFunction,
    PathFunction,
    ProcessConfig,
    ab_power,
    evaluate_path,
    parse_alpha,
    signed_power,
    sup_distance,
)
from .diagnostics import (
    DiagnosticsReport,
    check_convergence_rate,
    check_holder,
    check_local_form,
    check_sign_martingale,
    enumerate_sign_moments,
    stable_oracle_sample,
)
from .points import (
    SignedPointSet,
    TruncationSchedule,
    extend_window,
    freeze_prefix,
    restrict,
    sample_half_plane,
    sample_nested,
)

__version__ = "0.1.0"
