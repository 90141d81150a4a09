"""Comparison-principle construction of the critical threshold.

The threshold trajectory through the origin of the (w, s) plane is the zero
level set of  L_P(w, s) = w + sqrt(2 P(s)),  where P solves

    dP/ds = beta * sqrt(2 P) + kappa * (1 - s),    P(0) = 0,

and, under weak damping, of  L_N(w, s) = w - sqrt(2 N(s))  on the returning
branch, where

    dN/ds = -beta * sqrt(2 N) + kappa * (1 - s),   N(s*) = 0,

with s* = exp(beta pi / sqrt(4 kappa - beta^2)) + 1 the s-axis intercept of
the trajectory.  Subcritical data lie strictly between the level sets.

Numerics: the square-root right-hand sides are non-Lipschitz where P or N
vanish, but the solutions leave the zero regularly because kappa*(1-s) is
nonzero there.  Each zero endpoint is therefore handled by the explicit
local expansion in half powers of the distance to the endpoint, which both
seeds the adaptive integration and serves as the evaluator next to the
endpoint.  In between, tables interpolate the dense numerical solution with
cubic Hermite pieces whose node slopes come exactly from the ODE, so the
interpolant satisfies the ODE to high order between nodes and stays
nonnegative.  There is no closed form for beta > 0; the module is strictly
numerical there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .core import (
    DampingRegime,
    Parameters,
    TransformedPoint,
    regime,
)
from .thresholds import Classification, Method, Verdict

__all__ = [
    "TableKind",
    "LyapunovTable",
    "TableDomainError",
    "solve_P",
    "solve_N",
    "s_star",
    "classify_lyapunov",
    "lyapunov_value",
    "build_tables",
]


class TableKind(Enum):
    P = "P"
    N = "N"


class TableDomainError(ValueError):
    """The queried s lies outside the table; re-solve with a larger s_max."""


# Width of the endpoint series region, relative grid ratio of the Hermite
# nodes next to it, and the uniform node spacing cap (scaled by 1/beta so
# the interpolation residual stays below ~1e-9 for all regimes).
_SERIES_WIDTH = 3e-6
_GEO_RATIO = 5e-4
_H_CAP_BASE = 1e-3


@dataclass(frozen=True)
class _EndpointSeries:
    """Expansion G(sigma) = g1 s + g15 s^{3/2} + g2 s^2 + g25 s^{5/2} of a
    solution of dG/dsigma = c0 + bs*sqrt(2G) - kappa*sigma with G(0) = 0."""

    g1: float
    g15: float
    g2: float
    g25: float

    @staticmethod
    def build(c0: float, bs: float, kappa: float) -> "_EndpointSeries":
        g1 = c0
        g15 = (2.0 * bs / 3.0) * math.sqrt(2.0 * c0)
        g2 = bs * bs / 3.0 - 0.5 * kappa
        g25 = (2.0 * bs / 5.0) * math.sqrt(2.0 * c0) * (
            g2 / (2.0 * c0) - bs * bs / (9.0 * c0)
        )
        return _EndpointSeries(g1, g15, g2, g25)

    def value(self, sigma):
        rt = np.sqrt(sigma)
        return sigma * (self.g1 + self.g15 * rt + self.g2 * sigma
                        + self.g25 * sigma * rt)

    def deriv(self, sigma):
        rt = np.sqrt(sigma)
        return (self.g1 + 1.5 * self.g15 * rt + 2.0 * self.g2 * sigma
                + 2.5 * self.g25 * sigma * rt)


@dataclass
class LyapunovTable:
    """Tabulated monotone-solution of the P or N equation with interpolation.

    Evaluation dispatches between the endpoint expansions (inside the thin
    series regions around the zero endpoints) and the Hermite interpolant;
    values are nonnegative on the domain and the zero endpoints are exact.
    """

    kind: TableKind
    kappa: float
    beta: float
    s_grid: np.ndarray
    values: np.ndarray
    domain: Tuple[float, float]
    _spline: CubicHermiteSpline = field(repr=False)
    _spline_lo: float = field(repr=False)
    _spline_hi: float = field(repr=False)
    _lo_series: Optional[_EndpointSeries] = field(default=None, repr=False)
    _hi_series: Optional[_EndpointSeries] = field(default=None, repr=False)

    def _check_domain(self, s: np.ndarray) -> None:
        lo, hi = self.domain
        pad = 1e-12 * max(1.0, hi)
        if np.any(s < lo - pad) or np.any(s > hi + pad):
            raise TableDomainError(
                f"s outside table domain [{lo}, {hi}]; re-solve with larger s_max"
            )

    def __call__(self, s):
        scalar = np.isscalar(s)
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        self._check_domain(arr)
        lo, hi = self.domain
        out = np.empty_like(arr)
        in_lo = arr < self._spline_lo
        in_hi = arr > self._spline_hi
        mid = ~(in_lo | in_hi)
        if np.any(in_lo):
            if self._lo_series is not None:
                out[in_lo] = self._lo_series.value(np.maximum(arr[in_lo] - lo, 0.0))
            else:  # regular lower endpoint (N table): extend the spline
                out[in_lo] = self._spline(arr[in_lo])
        if np.any(in_hi):
            assert self._hi_series is not None
            out[in_hi] = self._hi_series.value(np.maximum(hi - arr[in_hi], 0.0))
        if np.any(mid):
            out[mid] = self._spline(arr[mid])
        out = np.maximum(out, 0.0)
        return float(out[0]) if scalar else out

    def derivative(self, s):
        scalar = np.isscalar(s)
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        self._check_domain(arr)
        lo, hi = self.domain
        out = np.empty_like(arr)
        in_lo = arr < self._spline_lo
        in_hi = arr > self._spline_hi
        mid = ~(in_lo | in_hi)
        if np.any(in_lo):
            if self._lo_series is not None:
                out[in_lo] = self._lo_series.deriv(np.maximum(arr[in_lo] - lo, 0.0))
            else:
                out[in_lo] = self._spline.derivative()(arr[in_lo])
        if np.any(in_hi):
            assert self._hi_series is not None
            out[in_hi] = -self._hi_series.deriv(np.maximum(hi - arr[in_hi], 0.0))
        if np.any(mid):
            out[mid] = self._spline.derivative()(arr[mid])
        return float(out[0]) if scalar else out

    def sqrt2(self, s):
        """sqrt(2 * value); the level-set ordinate |w| on the trajectory."""
        v = self(s)
        return np.sqrt(2.0 * np.maximum(v, 0.0)) if not np.isscalar(v) else math.sqrt(2.0 * max(v, 0.0))

    def ode_residual_max(self, refine: int = 10) -> float:
        """Max |table' - rhs(table)| over refine-fold midpoints of the grid."""
        sign = 1.0 if self.kind is TableKind.P else -1.0
        a = self.s_grid[:-1, None]
        b = self.s_grid[1:, None]
        frac = (np.arange(1, refine + 1) / (refine + 1))[None, :]
        pts = (a + (b - a) * frac).ravel()
        vals = self(pts)
        der = self.derivative(pts)
        resid = der - (sign * self.beta * np.sqrt(2.0 * np.maximum(vals, 0.0))
                       + self.kappa * (1.0 - pts))
        return float(np.max(np.abs(resid)))

    def export_text(self) -> str:
        """Two-column numeric text (s, value), 17 significant digits."""
        lines = [f"{s:.17g} {v:.17g}" for s, v in zip(self.s_grid, self.values)]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.export_text())


def s_star(params: Parameters) -> float:
    """s-axis intercept of the weak-damping threshold trajectory:
    exp(beta pi / sqrt(4 kappa - beta^2)) + 1 (always > 2)."""
    if regime(params) is not DampingRegime.WEAK:
        raise ValueError("s_star is defined in the weak damping regime only")
    return math.exp(params.beta * math.pi
                    / math.sqrt(4.0 * params.kappa - params.beta ** 2)) + 1.0


def _hermite_nodes(lo: float, hi: float, beta: float,
                   width_lo: float, width_hi: float) -> np.ndarray:
    """Node layout on [lo, hi]: geometric refinement toward endpoints that
    sit a series-width away from a zero of the solution (where half-integer
    powers limit polynomial accuracy), uniform spacing elsewhere.  width_*
    is the distance from the true zero endpoint; 0 disables clustering."""
    h_cap = _H_CAP_BASE / max(1.0, beta)
    lo_pts = [lo]
    if width_lo > 0.0:
        x = lo
        while True:
            step = (x - lo + width_lo) * _GEO_RATIO
            if step >= h_cap or x + step >= hi:
                break
            x += step
            lo_pts.append(x)
    hi_pts: list = []
    if width_hi > 0.0:
        x = hi
        while True:
            step = (hi - x + width_hi) * _GEO_RATIO
            if step >= h_cap or x - step <= lo_pts[-1]:
                break
            x -= step
            hi_pts.append(x)
    start_u = lo_pts[-1]
    end_u = hi_pts[-1] if hi_pts else hi
    n_uni = max(2, int(math.ceil((end_u - start_u) / h_cap)) + 1)
    uni = np.linspace(start_u, end_u, n_uni)
    return np.unique(np.concatenate([lo_pts, uni, hi_pts, [hi]]))


def _solve_sqrt_ode(
    params: Parameters,
    kind: TableKind,
    s_lo: float,
    s_hi: float,
    lo_series: Optional[_EndpointSeries],
    hi_series: Optional[_EndpointSeries],
    tol: float,
) -> LyapunovTable:
    """Shared constructor: integrate the P/N equation between the endpoint
    series regions and assemble the Hermite table."""
    kappa, beta = params.kappa, params.beta
    sign = 1.0 if kind is TableKind.P else -1.0

    def rhs(s, y):
        return (sign * beta * math.sqrt(2.0 * max(y[0], 0.0))
                + kappa * (1.0 - s),)

    width = _SERIES_WIDTH * max(1.0, s_hi - s_lo)
    a = s_lo + width if lo_series is not None else s_lo
    b = s_hi - width if hi_series is not None else s_hi
    if lo_series is not None:
        y_start = float(lo_series.value(width))
        start, stop = a, b
    else:
        # N table: start from the clustered upper endpoint and integrate down
        assert hi_series is not None
        y_start = float(hi_series.value(width))
        start, stop = b, a

    rtol = min(tol, 1e-10)
    sol = solve_ivp(rhs, (start, stop), [y_start], method="DOP853",
                    rtol=rtol, atol=rtol * 1e-2, dense_output=True)
    if not sol.success:
        raise RuntimeError(
            f"{kind.value}-table integration failed at s = {sol.t[-1]:.6g}: {sol.message}"
        )

    nodes = _hermite_nodes(a, b, beta,
                           width_lo=width if lo_series is not None else 0.0,
                           width_hi=width if hi_series is not None else 0.0)
    vals = np.maximum(sol.sol(nodes)[0], 0.0)
    derivs = sign * beta * np.sqrt(2.0 * vals) + kappa * (1.0 - nodes)
    spline = CubicHermiteSpline(nodes, vals, derivs)

    # stored grid includes the exact endpoints
    grid = nodes
    values = vals
    if lo_series is not None:
        grid = np.concatenate([[s_lo], grid])
        values = np.concatenate([[0.0], values])
    if hi_series is not None:
        grid = np.concatenate([grid, [s_hi]])
        values = np.concatenate([values, [0.0]])

    return LyapunovTable(
        kind=kind,
        kappa=kappa,
        beta=beta,
        s_grid=grid,
        values=values,
        domain=(s_lo, s_hi),
        _spline=spline,
        _spline_lo=a,
        _spline_hi=b if hi_series is not None else math.inf,
        _lo_series=lo_series,
        _hi_series=hi_series,
    )


def solve_P(params: Parameters, s_max: float, tol: float = 1e-12) -> LyapunovTable:
    """Solve dP/ds = beta sqrt(2P) + kappa (1-s), P(0) = 0, on [0, s_max].

    Strong/critical damping admit any s_max > 0 (P is increasing there);
    weak damping requires s_max <= s*, where P returns to zero.
    """
    if not (s_max > 0.0):
        raise ValueError("s_max must be positive")
    kappa, beta = params.kappa, params.beta
    weak = regime(params) is DampingRegime.WEAK
    hi_series = None
    if weak:
        ss = s_star(params)
        if s_max > ss * (1.0 + 1e-12):
            raise ValueError(
                f"weak damping requires s_max <= s* = {ss:.12g}, got {s_max}"
            )
        s_max = min(s_max, ss)
        if s_max == ss:
            # P vanishes at s* with slope -kappa(s*-1): expand there
            hi_series = _EndpointSeries.build(kappa * (ss - 1.0), -beta, kappa)
    lo_series = _EndpointSeries.build(kappa, beta, kappa)
    return _solve_sqrt_ode(params, TableKind.P, 0.0, s_max,
                           lo_series, hi_series, tol)


def solve_N(params: Parameters, tol: float = 1e-12) -> LyapunovTable:
    """Solve dN/ds = -beta sqrt(2N) + kappa (1-s), N(s*) = 0, on [0, s*]
    by backward integration (weak damping only); sqrt(2 N(0)) is the
    ordinate w* > 0 where the threshold trajectory exits through {s = 0}."""
    if regime(params) is not DampingRegime.WEAK:
        raise ValueError("solve_N applies to the weak damping regime only")
    kappa, beta = params.kappa, params.beta
    ss = s_star(params)
    hi_series = _EndpointSeries.build(kappa * (ss - 1.0), beta, kappa)
    return _solve_sqrt_ode(params, TableKind.N, 0.0, ss,
                           None, hi_series, tol)


def lyapunov_value(params: Parameters, tp: TransformedPoint) -> float:
    """Energy-like functional L(w, s) = w^2 + kappa (1 - s)^2; it decays
    along trajectories at rate dL/dt = -2 beta w^2."""
    return tp.w * tp.w + params.kappa * (1.0 - tp.s) ** 2


def classify_lyapunov(
    params: Parameters,
    p0: float,
    mu0: float,
    table_p: LyapunovTable,
    table_n: Optional[LyapunovTable] = None,
) -> Classification:
    """Classify non-vacuous data by the level-set inequalities.

    Strong/critical: subcritical iff p0 > (mu0 - 1) sqrt(2 P(s0)),
    s0 = 1/(1 - mu0).  Weak: subcritical iff additionally
    p0 < (1 - mu0) sqrt(2 N(s0)); s0 beyond s* is supercritical outright.
    Boundary points are supercritical, matching the explicit classifier.
    """
    if mu0 >= 1.0:
        raise ValueError("classify_lyapunov requires mu0 < 1 (non-vacuous data)")
    s0 = 1.0 / (1.0 - mu0)
    weak = regime(params) is DampingRegime.WEAK
    if weak:
        ss = s_star(params)
        if s0 > ss:
            return Classification(Verdict.SUPERCRITICAL, method=Method.LYAPUNOV)
        if table_n is None:
            raise ValueError("weak damping classification requires the N table")
    elif s0 > table_p.domain[1]:
        raise TableDomainError(
            f"s0 = {s0:.6g} exceeds the P table domain "
            f"[{table_p.domain[0]}, {table_p.domain[1]}]; re-solve with larger s_max"
        )
    lower = (mu0 - 1.0) * table_p.sqrt2(s0)
    if not (p0 > lower):
        return Classification(Verdict.SUPERCRITICAL, method=Method.LYAPUNOV)
    if weak:
        assert table_n is not None
        upper = (1.0 - mu0) * table_n.sqrt2(s0)
        if not (p0 < upper):
            return Classification(Verdict.SUPERCRITICAL, method=Method.LYAPUNOV)
    return Classification(Verdict.SUBCRITICAL, method=Method.LYAPUNOV)


def build_tables(
    params: Parameters, s_needed: float = 2.0, tol: float = 1e-12
) -> Tuple[LyapunovTable, Optional[LyapunovTable]]:
    """Tables sized for classification up to s0 = s_needed: strong/critical
    get a P table on [0, max(4, 2 s_needed)], weak gets P and N on [0, s*]."""
    if regime(params) is DampingRegime.WEAK:
        ss = s_star(params)
        return solve_P(params, ss, tol), solve_N(params, tol)
    return solve_P(params, max(4.0, 2.0 * s_needed), tol), None
