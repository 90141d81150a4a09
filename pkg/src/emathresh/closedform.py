"""Closed-form trajectories of the damped linear (w, s) system.

The system  w' = -beta*w + kappa*(1 - s),  s' = w  is solved exactly in all
three damping regimes.  The evaluators also expose the extremum structure of
s(t), which is what decides whether a trajectory reaches the blow-up set
{s = 0}: s can only vanish at t > 0 if it possesses a positive-time local
minimum with nonpositive value.

Formulas are hard-coded per regime; no symbolic manipulation is performed.
Evaluators accept scalar or ndarray time arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from .core import (
    DampingRegime,
    Parameters,
    TransformedPoint,
    regime,
    spectral_constants,
)

__all__ = [
    "StrongCoefficients",
    "WeakPolar",
    "ExtremumKind",
    "strong_coefficients",
    "weak_polar",
    "eval_strong",
    "eval_critical",
    "eval_weak",
    "eval_trajectory",
    "extremum_time",
    "first_min_weak",
]

TimeLike = Union[float, np.ndarray]

# exp(x) underflows to subnormals below roughly -745; values there are
# indistinguishable from 0 at double precision.
_EXP_FLOOR = -745.0


def _exp(x: TimeLike) -> TimeLike:
    if isinstance(x, np.ndarray):
        return np.where(x < _EXP_FLOOR, 0.0, np.exp(np.maximum(x, _EXP_FLOOR)))
    return 0.0 if x < _EXP_FLOOR else math.exp(x)


class ExtremumKind(Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class StrongCoefficients:
    """Modal coefficients of the strongly damped solution:
    s(t) - 1 = a1*exp(-lambda1*t) + a2*exp(-lambda2*t)."""

    a1: float
    a2: float


@dataclass(frozen=True)
class WeakPolar:
    """Polar form of the weakly damped solution:
    s(t) = 1 + r_amp * exp(-alpha*t) * cos(omega*t - psi).

    beta0 is the branch offset (0, pi or 2*pi) selecting the first local
    minimum of s; see ``first_min_weak``.
    """

    r_amp: float
    psi: float
    beta0: float


def strong_coefficients(params: Parameters, w0: float, s0: float) -> StrongCoefficients:
    """Coefficients determined by the initial data (w0, s0)."""
    con = spectral_constants(params)
    lam1, lam2 = con.lambda1, con.lambda2
    assert lam1 is not None and lam2 is not None
    gap = lam2 - lam1
    a1 = (w0 + lam2 * (s0 - 1.0)) / gap
    a2 = -(w0 + lam1 * (s0 - 1.0)) / gap
    return StrongCoefficients(a1=a1, a2=a2)


def weak_polar(params: Parameters, w0: float, s0: float) -> WeakPolar:
    """Amplitude, phase and first-minimum branch offset of the weak solution."""
    con = spectral_constants(params)
    alpha, omega = con.alpha, con.omega
    assert omega is not None and omega > 0.0
    c = s0 - 1.0
    d = (w0 + alpha * c) / omega
    r_amp = math.hypot(c, d)
    psi = math.atan2(d, c) if r_amp > 0.0 else 0.0
    return WeakPolar(r_amp=r_amp, psi=psi, beta0=_weak_branch_offset(params, w0, s0)[0])


def eval_strong(params: Parameters, w0: float, s0: float, t: TimeLike) -> TransformedPoint:
    """Strong damping: s(t) = 1 + A1 e^{-l1 t} + A2 e^{-l2 t}, w = s'."""
    con = spectral_constants(params)
    lam1, lam2 = con.lambda1, con.lambda2
    if lam1 is None or lam2 is None:
        raise ValueError("eval_strong requires the strong damping regime")
    coef = strong_coefficients(params, w0, s0)
    e1 = _exp(-lam1 * t)
    e2 = _exp(-lam2 * t)
    s = 1.0 + coef.a1 * e1 + coef.a2 * e2
    w = -coef.a1 * lam1 * e1 - coef.a2 * lam2 * e2
    return TransformedPoint(w=w, s=s)


def eval_critical(params: Parameters, w0: float, s0: float, t: TimeLike) -> TransformedPoint:
    """Critical damping: repeated rate alpha = beta/2 with a t e^{-alpha t} mode."""
    alpha = 0.5 * params.beta
    c = s0 - 1.0
    b = w0 + alpha * c
    e = _exp(-alpha * t)
    s = 1.0 + (c + b * t) * e
    w = (w0 - alpha * b * t) * e
    return TransformedPoint(w=w, s=s)


def eval_weak(params: Parameters, w0: float, s0: float, t: TimeLike) -> TransformedPoint:
    """Weak damping: oscillation at frequency omega under envelope e^{-alpha t}."""
    con = spectral_constants(params)
    alpha, omega = con.alpha, con.omega
    if omega is None or omega <= 0.0:
        raise ValueError("eval_weak requires the weak damping regime (omega > 0)")
    kappa = params.kappa
    c = s0 - 1.0
    e = _exp(-alpha * t)
    cos = np.cos(omega * t)
    sin = np.sin(omega * t)
    s = 1.0 + e * (c * cos + (w0 + alpha * c) / omega * sin)
    w = e * (w0 * cos - (alpha * w0 + kappa * c) / omega * sin)
    return TransformedPoint(w=w, s=s)


def eval_trajectory(params: Parameters, w0: float, s0: float, t: TimeLike) -> TransformedPoint:
    """Dispatch to the closed form of the regime of ``params``."""
    reg = regime(params)
    if reg is DampingRegime.STRONG:
        return eval_strong(params, w0, s0, t)
    if reg is DampingRegime.CRITICAL:
        return eval_critical(params, w0, s0, t)
    return eval_weak(params, w0, s0, t)


def extremum_time(
    params: Parameters, w0: float, s0: float
) -> Optional[Tuple[float, ExtremumKind]]:
    """Time and kind of the unique extremum of s(t), strong/critical regimes.

    Strong: an extremum exists iff A1 and A2 have strictly opposite signs,
    at t* = ln(-A2 l2 / (A1 l1)) / (l2 - l1); a minimum iff A1 < 0 < A2.
    The returned t* may be <= 0, in which case s is monotone on t >= 0 and
    downstream classification treats the data as the monotone case.

    Critical: an extremum exists iff w0 and w0 + alpha*(s0 - 1) share a
    strict sign, at t* = w0 / (alpha*(w0 + alpha*(s0 - 1))); a minimum iff
    both are negative.  The boundary case w0 = 0 (s0 != 1) is reported as
    the extremum t* = 0.

    Returns None when no extremum exists.
    """
    reg = regime(params)
    if reg is DampingRegime.STRONG:
        con = spectral_constants(params)
        lam1, lam2 = con.lambda1, con.lambda2
        coef = strong_coefficients(params, w0, s0)
        a1, a2 = coef.a1, coef.a2
        if a1 == 0.0 or a2 == 0.0:
            if a1 == 0.0 and a2 == 0.0:
                return None  # equilibrium
            # single-mode data: monotone; boundary reported at t* = 0
            kind = ExtremumKind.MIN if (a1 < 0.0 or a2 > 0.0) else ExtremumKind.MAX
            return 0.0, kind
        if (a1 < 0.0) == (a2 < 0.0):
            return None
        t_star = math.log(-(a2 * lam2) / (a1 * lam1)) / (lam2 - lam1)
        kind = ExtremumKind.MIN if a1 < 0.0 else ExtremumKind.MAX
        return t_star, kind
    if reg is DampingRegime.CRITICAL:
        alpha = 0.5 * params.beta
        b = w0 + alpha * (s0 - 1.0)
        if w0 == 0.0:
            if s0 == 1.0:
                return None  # equilibrium
            return 0.0, (ExtremumKind.MIN if s0 < 1.0 else ExtremumKind.MAX)
        if b == 0.0 or (w0 < 0.0) != (b < 0.0):
            return None
        t_star = w0 / (alpha * b)
        kind = ExtremumKind.MIN if w0 < 0.0 else ExtremumKind.MAX
        return t_star, kind
    raise ValueError("extremum_time applies to the strong and critical regimes only")


def _weak_branch_offset(params: Parameters, w0: float, s0: float) -> Tuple[float, float]:
    """Branch offset beta0 and arctan angle for the first local minimum of s.

    The minima of s(t) solve tan(omega t) = omega*w0 / (alpha*w0 + kappa*(s0-1))
    with cos(omega t) opposing the sign of the denominator; the first one is
    selected by beta0 = 0, pi or 2*pi according to the signs of the
    denominator and of w0.  A vanishing denominator is handled by the arctan
    limit +-pi/2, continuously matching both adjacent branches.
    """
    con = spectral_constants(params)
    alpha, omega = con.alpha, con.omega
    assert omega is not None and omega > 0.0
    den = alpha * w0 + params.kappa * (s0 - 1.0)
    if den > 0.0:
        return math.pi, math.atan(omega * w0 / den)
    if den < 0.0:
        if w0 < 0.0:
            return 0.0, math.atan(omega * w0 / den)
        if w0 > 0.0:
            return 2.0 * math.pi, math.atan(omega * w0 / den)
        return 0.0, 0.0  # w0 = 0, s0 < 1: s starts at its minimum
    # den == 0: arctan limit, branch chosen by the sign of w0
    return math.pi, math.copysign(0.5 * math.pi, w0)


def first_min_weak(params: Parameters, w0: float, s0: float) -> Tuple[float, float]:
    """Time and value of the first local minimum of s(t), weak regime.

    omega*t* = beta0 + arctan(omega*w0 / (alpha*w0 + kappa*(s0-1))) and
    s(t*) = 1 - (omega/sqrt(kappa)) * R * exp(-alpha*t*), with R the polar
    amplitude.  Since the minima values increase in time, s(t*) is the
    infimum of s over t >= 0 (together with s0 when t* = 0).
    """
    if regime(params) is not DampingRegime.WEAK:
        raise ValueError("first_min_weak applies to the weak damping regime only")
    if w0 == 0.0 and s0 == 1.0:
        raise ValueError("(w0, s0) = (0, 1) is the equilibrium; s has no minimum")
    con = spectral_constants(params)
    alpha, omega = con.alpha, con.omega
    assert omega is not None
    beta0, theta = _weak_branch_offset(params, w0, s0)
    t_star = (beta0 + theta) / omega
    c = s0 - 1.0
    r_amp = math.hypot(c, (w0 + alpha * c) / omega)
    s_min = 1.0 - (omega / math.sqrt(params.kappa)) * r_amp * _exp(-alpha * t_star)
    return t_star, s_min
