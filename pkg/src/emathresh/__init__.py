"""Critical-threshold toolkit for the damped radial Euler-Monge-Ampere system.

Closed-form phase-plane solutions, sharp subcritical/supercritical
classification (explicit inequalities, Lyapunov comparison functions, and
direct simulation), blow-up-time prediction, a method-of-characteristics
simulator of the full radial system, and exponential decay-rate estimation.
"""

from .analyze import (
    CrossValidation,
    DecayReport,
    classify_by_simulation,
    cross_validate,
    decay_report,
    expected_rate,
    fit_rate,
)
from .closedform import (
    ExtremumKind,
    StrongCoefficients,
    WeakPolar,
    eval_critical,
    eval_strong,
    eval_trajectory,
    eval_weak,
    extremum_time,
    first_min_weak,
    strong_coefficients,
    weak_polar,
)
from .core import (
    DampingRegime,
    Parameters,
    SingularStateError,
    SpectralConstants,
    SpectralPoint,
    TransformedPoint,
    VacuousStateError,
    from_transformed,
    make_params,
    regime,
    spectral_constants,
    to_transformed,
)
from .lyapunov import (
    LyapunovTable,
    TableDomainError,
    TableKind,
    build_tables,
    classify_lyapunov,
    lyapunov_value,
    s_star,
    solve_N,
    solve_P,
)
from .odeint import (
    EventKind,
    TerminalEvent,
    Trajectory,
    integrate,
    simulate_pmu,
    simulate_ws,
)
from .radial import (
    Diagnostics,
    InitialProfile,
    RadialSolution,
    RayState,
    Shock,
    density_along_ray,
    diagnostics,
    evolve,
    init_from_density,
    init_from_potential,
    ray_state,
    regularity_integral,
)
from .thresholds import (
    BoundaryPoint,
    Classification,
    Method,
    Verdict,
    blowup_time,
    classify_explicit,
    classify_vacuous,
    is_supercritical_explicit,
    threshold_boundary,
    weak_density_bound,
)

__version__ = "0.1.0"
