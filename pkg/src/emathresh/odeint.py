"""Adaptive ODE integration with dense output and terminal event detection.

This is the numerical oracle the rest of the library is checked against:
closed forms, classifiers and blow-up times are all validated by integrating
the underlying systems directly.  Stepping is delegated to scipy's embedded
Runge-Kutta pairs (DOP853 by default); events are located by sign change on
the pair's dense interpolant and refined to root-finder precision, and
integration halts at the first event.

Default tolerances are tight (rel 1e-10, abs 1e-12) because the integrator
serves as a reference, not as a production solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .core import Parameters, to_transformed

__all__ = [
    "EventKind",
    "TerminalEvent",
    "Trajectory",
    "integrate",
    "simulate_pmu",
    "simulate_ws",
    "BLOWUP_GUARD",
]

# Riccati blow-up reaches |p| = 1e8 within O(1e-8) of the true singular
# time, far inside every acceptance tolerance.
BLOWUP_GUARD = 1e8

DEFAULT_REL_TOL = 1e-10
DEFAULT_ABS_TOL = 1e-12


class EventKind(Enum):
    BLOW_UP = "blow_up"
    S_ZERO = "s_zero"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TerminalEvent:
    kind: EventKind
    time: float
    state: np.ndarray


@dataclass
class Trajectory:
    """Time samples of one integration, plus the dense interpolant.

    times is strictly increasing; states has one row per sample.  When a
    terminal event fired, the last sample sits at the event time.  failure
    carries the solver message on step-size underflow (the last valid state
    is retained; upstream interprets it as blow-up when the guard quantity
    is already large).
    """

    times: np.ndarray
    states: np.ndarray
    terminal_event: Optional[TerminalEvent] = None
    failure: Optional[str] = None
    _sol: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def sample(self, t):
        """Evaluate the dense interpolant at scalar or array times."""
        if self._sol is None:
            raise ValueError("trajectory carries no dense output")
        return self._sol(t)


def integrate(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    y0: Sequence[float],
    t0: float,
    t1: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    events: Sequence[Callable[[float, np.ndarray], float]] = (),
    event_kinds: Sequence[EventKind] = (),
    method: str = "DOP853",
    max_step: float = np.inf,
    first_step: Optional[float] = None,
    t_eval: Optional[np.ndarray] = None,
) -> Trajectory:
    """Integrate y' = rhs(t, y) from t0 to t1, halting at the first event.

    Every event function is treated as terminal; its root is refined on the
    dense interpolant.  event_kinds optionally labels the events (defaults
    to CUSTOM).
    """
    wrapped = []
    for ev in events:
        def _ev(t, y, _f=ev):
            return _f(t, y)

        _ev.terminal = True
        _ev.direction = getattr(ev, "direction", 0)
        wrapped.append(_ev)

    sol = solve_ivp(
        rhs,
        (t0, t1),
        np.asarray(y0, dtype=float),
        method=method,
        rtol=rel_tol,
        atol=abs_tol,
        events=wrapped or None,
        dense_output=True,
        max_step=max_step,
        first_step=first_step,
        t_eval=t_eval,
    )

    times = sol.t
    states = sol.y.T
    terminal: Optional[TerminalEvent] = None
    failure: Optional[str] = None

    if sol.status == 1 and sol.t_events is not None:
        fired = [i for i, te in enumerate(sol.t_events) if len(te) > 0]
        idx = min(fired, key=lambda i: sol.t_events[i][0])
        kind = event_kinds[idx] if idx < len(event_kinds) else EventKind.CUSTOM
        t_ev = float(sol.t_events[idx][0])
        y_ev = sol.y_events[idx][0]
        terminal = TerminalEvent(kind=kind, time=t_ev, state=np.asarray(y_ev))
        if len(times) == 0 or times[-1] != t_ev:
            times = np.append(times, t_ev)
            states = np.vstack([states, y_ev])
    elif sol.status == -1:
        failure = sol.message

    return Trajectory(times=times, states=states, terminal_event=terminal,
                      failure=failure, _sol=sol.sol)


def _pmu_rhs(params: Parameters):
    kappa, beta = params.kappa, params.beta

    def rhs(t, y):
        p, mu = y
        return (-p * p - kappa * mu - beta * p, p * (1.0 - mu))

    return rhs


def _ws_rhs(params: Parameters):
    kappa, beta = params.kappa, params.beta

    def rhs(t, y):
        w, s = y
        return (-beta * w + kappa * (1.0 - s), w)

    return rhs


def simulate_pmu(
    params: Parameters,
    p0: float,
    mu0: float,
    t_max: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    t_eval: Optional[np.ndarray] = None,
) -> Trajectory:
    """Trajectory of p' = -p^2 - kappa mu - beta p, mu' = p (1 - mu),
    with terminal blow-up guard |p| >= 1e8.

    mu0 = 1 is an invariant manifold: mu' vanishes identically there, so the
    integration reduces to the autonomous Riccati equation for p.
    """
    guard = lambda t, y: BLOWUP_GUARD - abs(y[0])
    return integrate(
        _pmu_rhs(params),
        (p0, mu0),
        0.0,
        t_max,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        events=(guard,),
        event_kinds=(EventKind.BLOW_UP,),
        t_eval=t_eval,
    )


def simulate_ws(
    params: Parameters,
    w0: float,
    s0: float,
    t_max: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    t_eval: Optional[np.ndarray] = None,
) -> Trajectory:
    """Trajectory of the linear (w, s) system with terminal event at s = 0."""
    s_zero = lambda t, y: y[1]
    return integrate(
        _ws_rhs(params),
        (w0, s0),
        0.0,
        t_max,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        events=(s_zero,),
        event_kinds=(EventKind.S_ZERO,),
        t_eval=t_eval,
    )


def simulate_ws_from_pmu(
    params: Parameters, p0: float, mu0: float, t_max: float, **kwargs
) -> Trajectory:
    """Convenience: simulate (w, s) started from the image of (p0, mu0)."""
    tp = to_transformed(p0, mu0)
    return simulate_ws(params, tp.w, tp.s, t_max, **kwargs)
