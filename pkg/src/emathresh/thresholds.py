"""Sharp subcritical/supercritical classification and blow-up times.

Vacuous branch (mu0 = 1): the density vanishes and p obeys the autonomous
Riccati equation p' = -p^2 - beta p - kappa.  With strong or critical
damping, data above the smaller root of p^2 + beta p + kappa stay bounded;
everything else escapes to -infinity at an explicitly integrable time T_c.
Under weak damping every initial slope blows up.

Non-vacuous branch (mu0 < 1): in the (w, s) chart the solution is linear
and blow-up means s(T_c) = 0, which can only happen at a positive-time
local minimum of s.  Writing out "minimum value <= 0" per regime gives the
explicit threshold inequalities implemented here.  Points exactly on the
threshold are supercritical (the blow-up inequalities are inclusive).

Vacuous detection is explicit and opt-in: |1 - mu0| small is still
non-vacuous, because the dichotomy is discontinuous at mu0 = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

from scipy.optimize import brentq

from .closedform import (
    ExtremumKind,
    eval_trajectory,
    extremum_time,
    first_min_weak,
)
from .core import (
    DampingRegime,
    Parameters,
    regime,
    spectral_constants,
    to_transformed,
)

__all__ = [
    "Verdict",
    "Method",
    "Classification",
    "BoundaryPoint",
    "classify_vacuous",
    "classify_explicit",
    "is_supercritical_explicit",
    "blowup_time",
    "threshold_boundary",
    "weak_density_bound",
]


class Verdict(Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"


class Method(Enum):
    EXPLICIT_PHASE_PLANE = "explicit_phase_plane"
    LYAPUNOV = "lyapunov"
    SIMULATION = "simulation"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    t_blowup: Optional[float] = None
    method: Method = Method.EXPLICIT_PHASE_PLANE

    def __post_init__(self) -> None:
        if self.t_blowup is not None:
            if not (math.isfinite(self.t_blowup) and self.t_blowup > 0.0):
                raise ValueError("t_blowup must be finite and positive when present")


def classify_vacuous(params: Parameters, p0: float) -> Classification:
    """Classify vacuous data (the caller asserts mu0 = 1 exactly).

    Strong: subcritical iff p0 >= p_- = (-beta - sqrt(beta^2-4kappa))/2,
    otherwise T_c = ln|(p0-p_+)/(p0-p_-)| / (p_+ - p_-).
    Critical: subcritical iff p0 >= -sqrt(kappa), otherwise
    T_c = -1/(p0 + sqrt(kappa)).
    Weak: supercritical for every p0, with
    T_c = [arctan((p0+beta/2)/omega) + pi/2] / omega, omega = sqrt(kappa-beta^2/4).
    """
    kappa, beta = params.kappa, params.beta
    reg = regime(params)
    if reg is DampingRegime.STRONG:
        disc = math.sqrt(beta * beta - 4.0 * kappa)
        p_minus = 0.5 * (-beta - disc)
        p_plus = 0.5 * (-beta + disc)
        if p0 >= p_minus:
            return Classification(Verdict.SUBCRITICAL)
        t_c = math.log(abs((p0 - p_plus) / (p0 - p_minus))) / (p_plus - p_minus)
        return Classification(Verdict.SUPERCRITICAL, t_blowup=t_c)
    if reg is DampingRegime.CRITICAL:
        root = math.sqrt(kappa)
        if p0 >= -root:
            return Classification(Verdict.SUBCRITICAL)
        return Classification(Verdict.SUPERCRITICAL, t_blowup=-1.0 / (p0 + root))
    omega = math.sqrt(kappa - 0.25 * beta * beta)
    t_c = (math.atan((p0 + 0.5 * beta) / omega) + 0.5 * math.pi) / omega
    return Classification(Verdict.SUPERCRITICAL, t_blowup=t_c)


def _require_nonvacuous(mu0: float) -> None:
    if mu0 >= 1.0:
        raise ValueError(
            "classify_explicit requires mu0 < 1; mu0 = 1 is the vacuous state "
            "(use classify_vacuous), and mu0 > 1 violates the standing "
            "admissibility assumption on the initial potential"
        )


def is_supercritical_explicit(params: Parameters, p0: float, mu0: float) -> bool:
    """Explicit threshold predicate for non-vacuous data (mu0 < 1).

    Strong damping: blow-up iff p0 < 0, p0 + lambda2 mu0 < 0,
    p0 + lambda1 mu0 < 0 and
        [-(l1 p0 + k mu0)/(k(1-mu0))]^l2 >= [-(l2 p0 + k mu0)/(k(1-mu0))]^l1,
    evaluated in log form to avoid overflow of the large powers (both
    arguments are positive under the side conditions).  The sign condition
    p0 < 0 is what places the minimum of s at positive time; without it the
    inequality also fires for data whose minimum lies in the past and which
    are globally regular.

    Critical damping: blow-up iff p0 < 0, p0 + alpha mu0 < 0 and
        p0/(p0 + alpha mu0) <= ln[-(p0 + alpha mu0)/(alpha (1-mu0))].

    Weak damping: blow-up iff the first local minimum of s is <= 0, i.e.
        ((p0+alpha mu0)/(1-mu0))^2 + (omega mu0/(1-mu0))^2 >= kappa e^{2 alpha t*}.
    """
    _require_nonvacuous(mu0)
    kappa = params.kappa
    reg = regime(params)
    if reg is DampingRegime.STRONG:
        if p0 >= 0.0:
            return False
        con = spectral_constants(params)
        lam1, lam2 = con.lambda1, con.lambda2
        if p0 + lam2 * mu0 >= 0.0 or p0 + lam1 * mu0 >= 0.0:
            return False
        denom = kappa * (1.0 - mu0)
        x1 = -(lam1 * p0 + kappa * mu0) / denom
        x2 = -(lam2 * p0 + kappa * mu0) / denom
        return lam2 * math.log(x1) >= lam1 * math.log(x2)
    if reg is DampingRegime.CRITICAL:
        alpha = 0.5 * params.beta
        b = p0 + alpha * mu0
        if p0 >= 0.0 or b >= 0.0:
            return False
        return p0 / b <= math.log(-b / (alpha * (1.0 - mu0)))
    # weak damping: minimum value of s decides
    if p0 == 0.0 and mu0 == 0.0:
        return False
    tp = to_transformed(p0, mu0)
    _, s_min = first_min_weak(params, tp.w, tp.s)
    return s_min <= 0.0


def classify_explicit(params: Parameters, p0: float, mu0: float) -> Classification:
    """Classify non-vacuous data; supercritical verdicts carry the predicted
    blow-up time (root of the closed-form s)."""
    if not is_supercritical_explicit(params, p0, mu0):
        return Classification(Verdict.SUBCRITICAL)
    tp = to_transformed(p0, mu0)
    t_c = blowup_time(params, tp.w, tp.s)
    return Classification(Verdict.SUPERCRITICAL, t_blowup=t_c)


def blowup_time(params: Parameters, w0: float, s0: float) -> Optional[float]:
    """Smallest t > 0 with closed-form s(t) = 0, or None if s stays positive.

    Existence is decided analytically: s can vanish only on the decreasing
    branch into a positive-time local minimum with value <= 0.  When a root
    exists it is bracketed by [0, t*] and refined by Brent's method.
    """
    if s0 <= 0.0:
        raise ValueError("blowup_time requires s0 > 0")
    if w0 == 0.0 and s0 == 1.0:
        return None
    reg = regime(params)
    if reg is DampingRegime.WEAK:
        t_star, s_min = first_min_weak(params, w0, s0)
        if t_star <= 0.0 or s_min > 0.0:
            return None
    else:
        ext = extremum_time(params, w0, s0)
        if ext is None:
            return None
        t_star, kind = ext
        if kind is not ExtremumKind.MIN or t_star <= 0.0:
            return None
        s_min = float(eval_trajectory(params, w0, s0, t_star).s)
        if s_min > 0.0:
            return None
    if s_min == 0.0:
        return t_star

    def s_of_t(t: float) -> float:
        return float(eval_trajectory(params, w0, s0, t).s)

    return float(brentq(s_of_t, 0.0, t_star, xtol=1e-12, rtol=8.9e-16))


@dataclass(frozen=True)
class BoundaryPoint:
    """Critical p0 value(s) at fixed mu0.

    Strong/critical damping have a single lower boundary (subcritical above
    it).  Weak damping has a bounded subcritical interval, so both
    boundaries are reported; both are None when the interval is empty
    (which happens once s0 = 1/(1-mu0) passes the trajectory intercept s*).
    """

    mu0: float
    p_lower: Optional[float]
    p_upper: Optional[float]


def _bisect_verdict(params: Parameters, mu0: float, p_sub: float, p_super: float,
                    tol: float = 1e-10) -> float:
    """Bisect the verdict sign change between a subcritical and a
    supercritical p0 at fixed mu0."""
    while abs(p_sub - p_super) > tol:
        mid = 0.5 * (p_sub + p_super)
        if is_supercritical_explicit(params, mid, mu0):
            p_super = mid
        else:
            p_sub = mid
    return 0.5 * (p_sub + p_super)


def threshold_boundary(
    params: Parameters, mu0_grid: Sequence[float], tol: float = 1e-10
) -> List[BoundaryPoint]:
    """Locate the critical p0 separating the verdicts for each mu0 < 1.

    p0 = 0 is subcritical whenever any subcritical datum exists at that mu0
    (in the weak regime that is exactly when s0 < s*), so it seeds the
    bisection; the supercritical side is found by doubling outward.
    """
    out: List[BoundaryPoint] = []
    kappa = params.kappa
    weak = regime(params) is DampingRegime.WEAK
    for mu0 in mu0_grid:
        if mu0 >= 1.0:
            raise ValueError("threshold_boundary grid values must be < 1")
        if is_supercritical_explicit(params, 0.0, mu0):
            # no subcritical interval at this mu0 (weak regime, s0 >= s*)
            out.append(BoundaryPoint(mu0=mu0, p_lower=None, p_upper=None))
            continue
        step = 2.0 * math.sqrt(kappa) * (1.0 + abs(mu0)) + 1.0
        lo = -step
        while not is_supercritical_explicit(params, lo, mu0):
            lo *= 2.0
            if lo < -1e12:
                raise RuntimeError("failed to bracket the lower threshold")
        p_lower = _bisect_verdict(params, mu0, 0.0, lo, tol)
        p_upper: Optional[float] = None
        if weak:
            hi = step
            while not is_supercritical_explicit(params, hi, mu0):
                hi *= 2.0
                if hi > 1e12:
                    raise RuntimeError("failed to bracket the upper threshold")
            p_upper = _bisect_verdict(params, mu0, 0.0, hi, tol)
        out.append(BoundaryPoint(mu0=mu0, p_lower=p_lower, p_upper=p_upper))
    return out


def weak_density_bound(
    params: Parameters, p0: float, mu0: float, q0: float, nu0: float, r: float
) -> float:
    """Necessary initial-density lower bound for global regularity under
    weak damping, evaluated at one node of a radial profile:

        [((p0+a mu0)^2 + (w mu0)^2) / (k e^{2 a t*_p})]^{1/2}
      * [((q0 r + a nu0 r)^2 + (w nu0 r)^2) / (k r^2 e^{2 a t*_q})]^{n/2}

    with a = beta/2, w = sqrt(4k-b^2)/2, and each factor's t* taken from
    the first-minimum time of its own transformed pair ((p0, mu0) for the
    radial factor, (q0, nu0) for the tangential one).  An equilibrium pair
    contributes a zero factor.
    """
    if regime(params) is not DampingRegime.WEAK:
        raise ValueError("weak_density_bound applies to the weak damping regime only")
    if mu0 >= 1.0 or nu0 >= 1.0:
        raise ValueError("weak_density_bound requires mu0 < 1 and nu0 < 1")
    if not (r > 0.0):
        raise ValueError("weak_density_bound requires r > 0")
    con = spectral_constants(params)
    alpha, omega = con.alpha, con.omega
    kappa = params.kappa

    def factor(a0: float, m0: float, scale: float) -> float:
        num = (a0 * scale + alpha * m0 * scale) ** 2 + (omega * m0 * scale) ** 2
        if num == 0.0:
            return 0.0
        tp = to_transformed(a0, m0)
        t_star, _ = first_min_weak(params, tp.w, tp.s)
        return num / (kappa * scale * scale * math.exp(2.0 * alpha * t_star))

    radial = factor(p0, mu0, 1.0) ** 0.5
    tangential = factor(q0, nu0, r) ** (0.5 * params.dim)
    return radial * tangential
