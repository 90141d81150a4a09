"""Large-time decay-rate estimation and classifier cross-validation.

Subcritical solutions converge to equilibrium exponentially; the rate is
lambda1 (strong damping, generic data), lambda2 on the exceptional set
(p0 + lambda2 mu0)/(1 - mu0) = 0, and beta/2 under critical/weak damping
(critical generic data carry a t e^{-beta t/2} factor, accounted for by an
arbitrarily small rate deduction eps).  Rates are estimated by linear
regression of log|quantity| against time; oscillatory weak-regime signals
are reduced to their peak-envelope first, since the decay bound controls
the envelope, not the raw signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import DampingRegime, Parameters, regime, spectral_constants
from .lyapunov import LyapunovTable, classify_lyapunov
from .odeint import EventKind, Trajectory, simulate_pmu
from .thresholds import (
    Classification,
    Method,
    Verdict,
    classify_explicit,
)

__all__ = [
    "DecayReport",
    "expected_rate",
    "fit_rate",
    "decay_report",
    "slowest_rate",
    "classify_by_simulation",
    "cross_validate",
    "CrossValidation",
]


@dataclass(frozen=True)
class DecayReport:
    gamma_fit: float
    gamma_expected: float
    window: Tuple[float, float]
    residual: float          # RMS of the log-space regression residuals
    generic_branch: bool

    def __post_init__(self) -> None:
        t_lo, t_hi = self.window
        if not (t_lo < t_hi):
            raise ValueError("window must satisfy t_lo < t_hi")
        if not math.isfinite(self.residual):
            raise ValueError("residual must be finite")


def expected_rate(
    params: Parameters, p0: float, mu0: float, eps: float = 0.05
) -> Tuple[float, bool]:
    """Decay rate gamma and whether the generic (slow) branch applies.

    Strong: gamma = lambda1 generically, lambda2 when (p0+lambda2 mu0) = 0.
    Critical: gamma = beta/2 - eps generically (the t-factor), beta/2 on
    the exceptional set (p0 + alpha mu0) = 0.  Weak: gamma = beta/2.
    """
    con = spectral_constants(params)
    reg = regime(params)
    if reg is DampingRegime.STRONG:
        generic = (p0 + con.lambda2 * mu0) / (1.0 - mu0) != 0.0
        return (con.lambda1 if generic else con.lambda2), generic
    if reg is DampingRegime.CRITICAL:
        generic = (p0 + con.alpha * mu0) / (1.0 - mu0) != 0.0
        return (con.alpha - eps if generic else con.alpha), generic
    return con.alpha, True


def slowest_rate(params: Parameters) -> float:
    """Slowest decay rate of the regime (lambda1, or beta/2)."""
    con = spectral_constants(params)
    if regime(params) is DampingRegime.STRONG:
        return con.lambda1
    return con.alpha


def _peak_envelope(t: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Times and magnitudes of the strict local maxima of y."""
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])
    idx = np.where(inner)[0] + 1
    return t[idx], y[idx]


def fit_rate(
    trajectory: Trajectory,
    quantity_selector: Callable[[np.ndarray], np.ndarray],
    window: Tuple[float, float],
    envelope: bool = False,
    gamma_expected: float = math.nan,
    generic_branch: bool = True,
    n_samples: int = 2001,
) -> DecayReport:
    """Least-squares slope of log|quantity| over the window, sign-flipped.

    quantity_selector maps the (n_samples, dim) state array to a positive
    scalar series.  With envelope=True the regression runs on the local
    maxima of the series instead of the raw samples.  Raw nonpositive or
    vanishing samples inside the window (possible when a strong/critical
    signal crosses zero) abort the fit with a diagnostic: widen or shift
    the window.
    """
    t_lo, t_hi = window
    if not (t_lo < t_hi):
        raise ValueError("fit window must satisfy t_lo < t_hi")
    if t_hi > trajectory.t_end + 1e-12:
        raise ValueError(
            f"window [{t_lo}, {t_hi}] exceeds the trajectory end {trajectory.t_end}"
        )
    ts = np.linspace(t_lo, t_hi, n_samples)
    ys = np.asarray(quantity_selector(trajectory.sample(ts).T), dtype=float)
    if envelope:
        ts, ys = _peak_envelope(ts, ys)
        if len(ts) < 3:
            raise ValueError("fewer than 3 envelope peaks in the window; widen it")
    if np.any(ys <= 0.0) or not np.all(np.isfinite(np.log(ys))):
        raise ValueError(
            "selected quantity is nonpositive inside the window (signal zero "
            "crossing); widen or shift the window"
        )
    logs = np.log(ys)
    slope, intercept = np.polyfit(ts, logs, 1)
    resid = logs - (slope * ts + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return DecayReport(
        gamma_fit=-float(slope),
        gamma_expected=gamma_expected,
        window=(float(t_lo), float(t_hi)),
        residual=rms,
        generic_branch=generic_branch,
    )


def default_quantity(params: Parameters) -> Callable[[np.ndarray], np.ndarray]:
    """Elliptic norm sqrt(p^2 + kappa mu^2): positive away from equilibrium
    and decaying at the theorem's rate."""
    kappa = params.kappa

    def q(states: np.ndarray) -> np.ndarray:
        return np.hypot(states[:, 0], math.sqrt(kappa) * states[:, 1])

    return q


def decay_report(
    params: Parameters,
    p0: float,
    mu0: float,
    eps: float = 0.05,
    window: Optional[Tuple[float, float]] = None,
    rel_tol: float = 1e-11,
) -> DecayReport:
    """Simulate subcritical data and fit the decay rate.

    Strong/critical damping fit log of the zero-free elliptic norm
    sqrt(p^2 + kappa mu^2).  Weak damping fits the peak envelope of |p|,
    which oscillates through zero at frequency omega.  The default window
    starts at 3/gamma (past the transient) and spans 10/gamma, extended to
    cover at least eight oscillation periods under weak damping.
    """
    gamma, generic = expected_rate(params, p0, mu0, eps)
    reg = regime(params)
    weak = reg is DampingRegime.WEAK
    if window is None:
        t_lo = 3.0 / gamma
        span = 10.0 / gamma
        if weak:
            con = spectral_constants(params)
            span = max(span, 8.0 * math.pi / con.omega)
        window = (t_lo, t_lo + span)
    traj = simulate_pmu(params, p0, mu0, t_max=window[1], rel_tol=rel_tol,
                        abs_tol=rel_tol * 1e-2)
    if traj.terminal_event is not None:
        raise ValueError("decay_report requires subcritical data; trajectory blew up")
    quantity = (lambda states: np.abs(states[:, 0])) if weak \
        else default_quantity(params)
    return fit_rate(
        traj,
        quantity,
        window,
        envelope=weak,
        gamma_expected=gamma,
        generic_branch=generic,
    )


def classify_by_simulation(
    params: Parameters,
    p0: float,
    mu0: float,
    t_end: Optional[float] = None,
    rel_tol: float = 1e-10,
) -> Classification:
    """Classify by direct integration of the (p, mu) system: supercritical
    iff the |p| >= 1e8 guard fires before t_end (default 50 over the
    regime's slowest decay rate)."""
    if t_end is None:
        t_end = 50.0 / slowest_rate(params)
    traj = simulate_pmu(params, p0, mu0, t_max=t_end, rel_tol=rel_tol,
                        abs_tol=rel_tol * 1e-2)
    blew_up = traj.terminal_event is not None and traj.terminal_event.kind is EventKind.BLOW_UP
    if not blew_up and traj.failure is not None:
        # step-size underflow with the guard nearly engaged is a blow-up
        blew_up = abs(traj.states[-1, 0]) > 0.1 * 1e8
    if blew_up:
        t_c = traj.terminal_event.time if traj.terminal_event else traj.t_end
        return Classification(Verdict.SUPERCRITICAL, t_blowup=t_c,
                              method=Method.SIMULATION)
    return Classification(Verdict.SUBCRITICAL, method=Method.SIMULATION)


@dataclass(frozen=True)
class Disagreement:
    p0: float
    mu0: float
    explicit: Verdict
    lyapunov: Verdict
    simulation: Verdict


@dataclass(frozen=True)
class CrossValidation:
    n_total: int
    n_agree: int
    disagreements: Tuple[Disagreement, ...]


def cross_validate(
    params: Parameters,
    samples: Sequence[Tuple[float, float]],
    margin: float = 1e-3,
    table_p: Optional[LyapunovTable] = None,
    table_n: Optional[LyapunovTable] = None,
    sim_rel_tol: float = 1e-10,
) -> CrossValidation:
    """Run the explicit, Lyapunov and simulation classifiers on every
    (p0, mu0) sample and report agreement.

    The caller is responsible for excluding a relative margin band around
    the threshold boundary from the samples (margin is recorded only).
    Tables are built on demand, sized to the largest sampled s0.
    """
    if table_p is None:
        from .lyapunov import build_tables

        s_needed = max((1.0 / (1.0 - mu0) for _, mu0 in samples), default=2.0)
        table_p, table_n = build_tables(params, s_needed=s_needed)
    disagreements: List[Disagreement] = []
    for p0, mu0 in samples:
        v_exp = classify_explicit(params, p0, mu0).verdict
        v_lya = classify_lyapunov(params, p0, mu0, table_p, table_n).verdict
        v_sim = classify_by_simulation(params, p0, mu0, rel_tol=sim_rel_tol).verdict
        if not (v_exp == v_lya == v_sim):
            disagreements.append(Disagreement(p0, mu0, v_exp, v_lya, v_sim))
    n = len(samples)
    return CrossValidation(
        n_total=n,
        n_agree=n - len(disagreements),
        disagreements=tuple(disagreements),
    )
