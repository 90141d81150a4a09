"""Method-of-characteristics simulator for the damped radial system.

Each characteristic (ray) launched from radius r0 carries the closed ODE
system

    r'  = u                      u'  = -kappa r nu - beta u
    p'  = -p^2 - kappa mu - beta p     mu' = p (1 - mu)
    q'  = -q^2 - kappa nu - beta q     nu' = q (1 - nu)
    rho' = -rho (p + (n-1) q)

so rays are fully decoupled and no spatial re-gridding or elliptic solve is
ever needed.  The density is reconstructed pointwise from the spectral
identity rho = (1-mu)(1-nu)^{n-1}; the transported rho above is integrated
redundantly purely as a cross-check, as are q against u/r and the conserved
quantity r (1-nu).

A ray blows up when p <= -1e8 or when s = 1/(1-mu) <= 1e-8; the earliest
ray event is reported as the shock (t_c, r_c).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import Parameters
from .odeint import (
    BLOWUP_GUARD,
    EventKind,
    Trajectory,
    integrate,
)

__all__ = [
    "InitialProfile",
    "RayState",
    "Shock",
    "RadialSolution",
    "Diagnostics",
    "init_from_potential",
    "init_from_density",
    "evolve",
    "density_along_ray",
    "diagnostics",
    "regularity_integral",
    "ray_state",
]

# state vector layout along a ray
_R, _U, _P, _Q, _MU, _NU, _RHO = range(7)

# blow-up guard on s = 1/(1-mu), expressed as 1-mu >= 1/S_FLOOR to stay
# well-defined on vacuous rays where mu = 1 exactly
_S_FLOOR = 1e-8


@dataclass(frozen=True)
class InitialProfile:
    """Nodal initial data; each node launches one characteristic.

    p0 is carried explicitly (a single-node profile admits no finite
    difference).  rho0 must satisfy the spectral identity
    rho0 = (1-mu0)(1-nu0)^{n-1} nodewise.
    """

    grid: np.ndarray
    u0: np.ndarray
    p0: np.ndarray
    mu0: np.ndarray
    nu0: np.ndarray
    rho0: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) == 0:
            raise ValueError("grid must be a nonempty 1-d array of radii")
        if np.any(g <= 0.0) or np.any(np.diff(g) <= 0.0):
            raise ValueError("grid radii must be positive and strictly increasing")
        for name in ("u0", "p0", "mu0", "nu0", "rho0"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != g.shape:
                raise ValueError(f"{name} must match the grid shape")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        if np.any(self.mu0 > 1.0) or np.any(self.nu0 > 1.0):
            raise ValueError("admissible data require mu0 <= 1 and nu0 <= 1")
        ident = (1.0 - self.mu0) * (1.0 - self.nu0) ** (self.dim - 1)
        if np.max(np.abs(ident - self.rho0)) > 1e-10 * max(1.0, np.max(np.abs(self.rho0))):
            raise ValueError("rho0 violates the spectral identity (1-mu0)(1-nu0)^(n-1)")


def init_from_potential(
    params: Parameters,
    grid: Sequence[float],
    u0_samples: Sequence[float],
    phi0_second: Sequence[float],
    phi0_first: Sequence[float],
) -> InitialProfile:
    """Build a profile from velocity and potential samples.

    p0 comes from centered differences of u0 (one-sided at the ends),
    q0 = u0/r is implicit, mu0 = phi0'' and nu0 = phi0'/r; rho0 follows
    from the spectral identity.  The samples are expected to respect the
    origin conditions u(0) = 0 and phi'(0) = 0.
    """
    r = np.asarray(grid, dtype=float)
    u0 = np.asarray(u0_samples, dtype=float)
    mu0 = np.asarray(phi0_second, dtype=float)
    nu0 = np.asarray(phi0_first, dtype=float) / r
    if np.any(mu0 > 1.0) or np.any(nu0 > 1.0):
        raise ValueError("initial potential violates mu0 <= 1, nu0 <= 1")
    p0 = np.gradient(u0, r) if len(r) > 1 else np.zeros_like(u0)
    rho0 = (1.0 - mu0) * (1.0 - nu0) ** (params.dim - 1)
    return InitialProfile(grid=r, u0=u0, p0=p0, mu0=mu0, nu0=nu0, rho0=rho0,
                          dim=params.dim)


def init_from_density(
    params: Parameters,
    grid: Sequence[float],
    u0_samples: Sequence[float],
    rho0_samples: Sequence[float],
) -> InitialProfile:
    """Build a profile from velocity and density samples.

    The Lagrangian mass e(r) = int_0^r s^{n-1} rho0 ds is accumulated by
    trapezoid quadrature (the cell adjoining the origin uses the flat
    extension rho0(r1), consistent with d rho/dr = 0 at r = 0); then
    1 - nu0 = (n e / r^n)^{1/n} and mu0 = 1 - rho0/(1-nu0)^{n-1}, so the
    spectral identity holds by construction.
    """
    n = params.dim
    r = np.asarray(grid, dtype=float)
    u0 = np.asarray(u0_samples, dtype=float)
    rho0 = np.asarray(rho0_samples, dtype=float)
    if np.any(rho0 < 0.0):
        raise ValueError("rho0 must be nonnegative")
    integrand = r ** (n - 1) * rho0
    e = np.empty_like(r)
    e[0] = rho0[0] * r[0] ** n / n
    if len(r) > 1:
        cells = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(r)
        e[1:] = e[0] + np.cumsum(cells)
    one_minus_nu = (n * e / r ** n) ** (1.0 / n)
    if np.any((one_minus_nu == 0.0) & (rho0 > 0.0)):
        raise ValueError("inconsistent data: vanishing mass column with rho0 > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(one_minus_nu > 0.0,
                       1.0 - rho0 / one_minus_nu ** (n - 1),
                       1.0)
    nu0 = 1.0 - one_minus_nu
    p0 = np.gradient(u0, r) if len(r) > 1 else np.zeros_like(u0)
    return InitialProfile(grid=r, u0=u0, p0=p0, mu0=mu0, nu0=nu0, rho0=rho0,
                          dim=n)


@dataclass(frozen=True)
class RayState:
    """Lagrangian state of one characteristic at one time."""

    r0: float
    t: float
    r: float
    u: float
    p: float
    q: float
    mu: float
    nu: float
    rho: float  # transported density (integrated, not reconstructed)


@dataclass(frozen=True)
class Shock:
    t_c: float
    r_c: float
    ray_index: int
    formal_vacuous: bool = False  # blow-up of a zero-density ray


@dataclass
class RadialSolution:
    """Per-ray trajectories sampled at the snapshot times.

    rays[i].states rows are [r, u, p, q, mu, nu, rho] and stop at the last
    snapshot before that ray's blow-up event (if any).  failures lists the
    indices of rays whose integration failed without the blow-up guard
    firing; they keep their partial data and never abort the other rays.
    """

    params: Parameters
    r0: np.ndarray
    snapshot_times: np.ndarray
    rays: List[Trajectory]
    shock: Optional[Shock]
    failures: List[int]


def _ray_rhs(params: Parameters):
    kappa, beta, n = params.kappa, params.beta, params.dim

    def rhs(t, y):
        r, u, p, q, mu, nu, rho = y
        return (
            u,
            -kappa * r * nu - beta * u,
            -p * p - kappa * mu - beta * p,
            -q * q - kappa * nu - beta * q,
            p * (1.0 - mu),
            q * (1.0 - nu),
            -rho * (p + (n - 1) * q),
        )

    return rhs


def evolve(
    params: Parameters,
    profile: InitialProfile,
    t_max: float,
    snapshot_times: Sequence[float],
    tol: float = 1e-11,
    workers: int = 1,
) -> RadialSolution:
    """Integrate every ray independently and assemble the solution.

    Integrator failures on one ray do not abort the others; a failed ray is
    reported like an event at its last valid time when the blow-up guard
    was already engaged, and re-raised otherwise.
    """
    snaps = np.asarray(sorted(snapshot_times), dtype=float)
    if len(snaps) == 0 or snaps[0] < 0.0 or snaps[-1] > t_max:
        raise ValueError("snapshot times must lie within [0, t_max]")
    rhs = _ray_rhs(params)

    def guard_p(t, y):
        return y[_P] + BLOWUP_GUARD

    def guard_s(t, y):
        return 1.0 / _S_FLOOR - (1.0 - y[_MU])

    def run(i: int) -> Trajectory:
        y0 = (profile.grid[i], profile.u0[i], profile.p0[i],
              profile.u0[i] / profile.grid[i], profile.mu0[i],
              profile.nu0[i], profile.rho0[i])
        traj = integrate(
            rhs, y0, 0.0, t_max,
            rel_tol=tol, abs_tol=tol * 1e-2,
            events=(guard_p, guard_s),
            event_kinds=(EventKind.BLOW_UP, EventKind.BLOW_UP),
        )
        # resample on the snapshot grid, truncated at the event time
        t_stop = traj.terminal_event.time if traj.terminal_event else traj.t_end
        keep = snaps[snaps <= t_stop]
        states = traj.sample(keep).T if len(keep) else np.empty((0, 7))
        return Trajectory(times=keep, states=states,
                          terminal_event=traj.terminal_event,
                          failure=traj.failure, _sol=traj._sol)

    indices = range(len(profile.grid))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rays = list(pool.map(run, indices))
    else:
        rays = [run(i) for i in indices]

    shock: Optional[Shock] = None
    failures: List[int] = []
    for i, traj in enumerate(rays):
        if traj.failure and traj.terminal_event is None:
            failures.append(i)
        if traj.terminal_event is not None:
            t_ev = traj.terminal_event.time
            r_ev = float(traj.terminal_event.state[_R])
            better = (
                shock is None
                or t_ev < shock.t_c
                or (t_ev == shock.t_c and profile.grid[i] < profile.grid[shock.ray_index])
            )
            if better:
                shock = Shock(
                    t_c=t_ev, r_c=r_ev, ray_index=i,
                    formal_vacuous=bool(profile.mu0[i] == 1.0),
                )

    return RadialSolution(params=params, r0=profile.grid.copy(),
                          snapshot_times=snaps, rays=rays, shock=shock,
                          failures=failures)


def ray_state(solution: RadialSolution, ray_index: int, snap_index: int) -> RayState:
    """View one (ray, snapshot) cell as a RayState."""
    traj = solution.rays[ray_index]
    y = traj.states[snap_index]
    return RayState(r0=float(solution.r0[ray_index]), t=float(traj.times[snap_index]),
                    r=y[_R], u=y[_U], p=y[_P], q=y[_Q], mu=y[_MU], nu=y[_NU],
                    rho=y[_RHO])


def density_along_ray(state: RayState, n: int) -> float:
    """Spectral density rho = (1-mu)(1-nu)^{n-1} at this state (may be
    negative past a shock; the transported state.rho cross-checks it)."""
    return (1.0 - state.mu) * (1.0 - state.nu) ** (n - 1)


@dataclass(frozen=True)
class Diagnostics:
    d: float               # divergence p + (n-1) q
    eta: float             # spectral gap (p-q)^2/(n-1), 0 in 1-d
    mass_e: float          # conserved Lagrangian mass (r(1-nu))^n / n
    r_one_minus_nu: float  # conserved along the ray; drift monitor
    omega_sup_contrib: float  # max(|p|,|q|,|mu|,|nu|), regularity integrand


def diagnostics(state: RayState, params: Parameters) -> Diagnostics:
    n = params.dim
    d = state.p + (n - 1) * state.q
    eta = 0.0 if n == 1 else (state.p - state.q) ** 2 / (n - 1)
    r1mn = state.r * (1.0 - state.nu)
    return Diagnostics(
        d=d,
        eta=eta,
        mass_e=r1mn ** n / n,
        r_one_minus_nu=r1mn,
        omega_sup_contrib=max(abs(state.p), abs(state.q), abs(state.mu), abs(state.nu)),
    )


def regularity_integral(solution: RadialSolution) -> float:
    """Trapezoid-in-time integral of sup over rays of max(|p|,|q|,|mu|,|nu|).

    Finite for subcritical runs; grows without bound approaching a shock
    (only snapshots where at least one ray is alive contribute).
    """
    snaps = solution.snapshot_times
    sups = []
    for k, t in enumerate(snaps):
        best = None
        for traj in solution.rays:
            if k < len(traj.times):
                y = traj.states[k]
                v = max(abs(y[_P]), abs(y[_Q]), abs(y[_MU]), abs(y[_NU]))
                best = v if best is None else max(best, v)
        if best is None:
            break
        sups.append(best)
    m = len(sups)
    if m < 2:
        return 0.0
    return float(np.trapz(np.asarray(sups), snaps[:m]))
