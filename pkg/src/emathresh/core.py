"""Domain types and the coordinate transform shared by the whole library.

The radial damped Euler-Monge-Ampere system reduces, along characteristics,
to closed ODE systems for the eigenvalue pairs (p, mu) = (du/dr, d2phi/dr2)
and (q, nu) = (u/r, (dphi/dr)/r).  Everything downstream is organised around
two ingredients defined here:

* the damping trichotomy beta vs. 2*sqrt(kappa) (strong / critical / weak),
* the linearising change of variables w = p/(1-mu), s = 1/(1-mu), under
  which the blow-up set is exactly {s = 0}.

All types are immutable and all functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

__all__ = [
    "DampingRegime",
    "Parameters",
    "SpectralPoint",
    "TransformedPoint",
    "SpectralConstants",
    "VacuousStateError",
    "SingularStateError",
    "make_params",
    "regime",
    "spectral_constants",
    "to_transformed",
    "from_transformed",
]


class DampingRegime(Enum):
    """Trichotomy of the damping strength beta against 2*sqrt(kappa)."""

    STRONG = "strong"
    CRITICAL = "critical"
    WEAK = "weak"


class VacuousStateError(ValueError):
    """Raised when mu = 1 (zero density): the (w, s) chart does not apply."""


class SingularStateError(ValueError):
    """Raised when s = 0: the state is blown up and has no finite preimage."""


@dataclass(frozen=True)
class Parameters:
    """Physical constants of the system.

    kappa      repulsion strength (> 0)
    beta       damping strength (>= 0; beta = 0 only for undamped-limit
               regression, classified as weak damping)
    dim        spatial dimension n >= 1
    regime_tol relative half-width of the critical band: the closed-form
               branches for |beta^2 - 4 kappa| <= regime_tol * 4 kappa use
               the critically-damped formulas, which are free of the
               catastrophic cancellation the strongly-damped forms suffer
               near the double root.
    """

    kappa: float
    beta: float
    dim: int = 1
    regime_tol: float = 1e-9

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be a positive finite real, got {self.kappa}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be a nonnegative finite real, got {self.beta}")
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise ValueError(f"dim must be an integer >= 1, got {self.dim}")
        if not (math.isfinite(self.regime_tol) and 0 < self.regime_tol < 1e-3):
            raise ValueError(
                f"regime_tol must lie in (0, 1e-3), got {self.regime_tol}"
            )


@dataclass(frozen=True)
class SpectralPoint:
    """Eigenvalues (p, q) of the velocity gradient and (mu, nu) of the
    potential Hessian at one point of one characteristic."""

    p: float
    q: float
    mu: float
    nu: float

    def __post_init__(self) -> None:
        for name in ("p", "q", "mu", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"SpectralPoint.{name} must be finite")


@dataclass(frozen=True)
class TransformedPoint:
    """Image of (p, mu) under w = p/(1-mu), s = 1/(1-mu).

    s <= 0 marks a singular / blown-up state; it is representable here so
    that trajectories can be followed up to and across the blow-up set.
    """

    w: float
    s: float


@dataclass(frozen=True)
class SpectralConstants:
    """Decay rates of the linear (w, s) system.

    Strong damping:  0 < lambda1 < lambda2 real, lambda1*lambda2 = kappa,
                     lambda1 + lambda2 = beta; omega is None.
    Critical:        lambda1 = lambda2 = None, alpha = beta/2, omega = 0.
    Weak damping:    rates are the real pair (alpha, omega) with
                     alpha = beta/2, omega = sqrt(4 kappa - beta^2)/2, and
                     alpha^2 + omega^2 = kappa; lambda1/lambda2 are None
                     (no complex arithmetic in the public surface).
    """

    alpha: float
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    omega: Optional[float] = None


def make_params(
    kappa: float,
    beta: float,
    dim: int = 1,
    regime_tol: float = 1e-9,
) -> Parameters:
    """Validate and build a Parameters record."""
    return Parameters(kappa=float(kappa), beta=float(beta), dim=int(dim),
                      regime_tol=float(regime_tol))


def regime(params: Parameters) -> DampingRegime:
    """Classify the damping strength.

    The discriminant beta^2 - 4 kappa is compared against the band
    +- regime_tol * 4 kappa; inside the band the regime is CRITICAL.
    """
    disc = params.beta * params.beta - 4.0 * params.kappa
    band = params.regime_tol * 4.0 * params.kappa
    if disc > band:
        return DampingRegime.STRONG
    if disc < -band:
        return DampingRegime.WEAK
    return DampingRegime.CRITICAL


def spectral_constants(params: Parameters) -> SpectralConstants:
    """Decay rates for the regime of ``params``.

    In the strong regime lambda2 is computed by the stable sum
    (beta + sqrt(disc))/2 and lambda1 as kappa/lambda2, which keeps the
    product relation exact and avoids cancellation in beta - sqrt(disc).
    """
    alpha = 0.5 * params.beta
    reg = regime(params)
    if reg is DampingRegime.STRONG:
        disc = params.beta * params.beta - 4.0 * params.kappa
        lam2 = 0.5 * (params.beta + math.sqrt(disc))
        lam1 = params.kappa / lam2
        return SpectralConstants(alpha=alpha, lambda1=lam1, lambda2=lam2)
    if reg is DampingRegime.CRITICAL:
        return SpectralConstants(alpha=alpha, omega=0.0)
    omega = 0.5 * math.sqrt(4.0 * params.kappa - params.beta * params.beta)
    return SpectralConstants(alpha=alpha, omega=omega)


def to_transformed(p: float, mu: float) -> TransformedPoint:
    """Map (p, mu) with mu != 1 to (w, s) = (p/(1-mu), 1/(1-mu)).

    mu = 1 is the vacuous state and must be handled by the dedicated
    vacuous branch; it is never silently coerced.
    """
    one_minus = 1.0 - mu
    if one_minus == 0.0:
        raise VacuousStateError(
            "mu = 1 is a vacuous state; use the vacuous classifier instead"
        )
    return TransformedPoint(w=p / one_minus, s=1.0 / one_minus)


def from_transformed(tp: TransformedPoint) -> Tuple[float, float]:
    """Invert the transform: (p, mu) = (w/s, (s-1)/s).  Requires s != 0."""
    if tp.s == 0.0:
        raise SingularStateError(
            "s = 0 is the blow-up boundary; the state has no finite (p, mu) preimage"
        )
    return tp.w / tp.s, (tp.s - 1.0) / tp.s
