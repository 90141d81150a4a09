import math

import numpy as np
import pytest

from emathresh import (
    DampingRegime,
    blowup_time,
    eval_trajectory,
    from_transformed,
    make_params,
    to_transformed,
)
from emathresh.odeint import (
    EventKind,
    integrate,
    simulate_pmu,
    simulate_ws,
)

from conftest import STRONG, WEAK, REGIME_PARAMS, draw_params


class TestIntegrate:
    def test_linear_decay(self):
        traj = integrate(lambda t, y: (-y[0],), (1.0,), 0.0, 1.0)
        assert traj.states[-1, 0] == pytest.approx(math.exp(-1.0), rel=1e-9)

    def test_riccati_escape_time(self):
        # p' = -p^2 - 2p - 1 from p0 = -2: blow-up guard at -1e8 fires at
        # t = -1/(p0 + 1) = 1 (critical-damping vacuous time)
        guard = lambda t, y: y[0] + 1e8
        traj = integrate(
            lambda t, y: (-y[0] ** 2 - 2.0 * y[0] - 1.0,),
            (-2.0,), 0.0, 10.0,
            events=(guard,), event_kinds=(EventKind.BLOW_UP,),
        )
        assert traj.terminal_event is not None
        assert traj.terminal_event.kind is EventKind.BLOW_UP
        assert traj.terminal_event.time == pytest.approx(1.0, abs=1e-4)

    def test_event_bracketing(self):
        # the event function changes sign across the reported time, gap 1e-12
        params = WEAK
        w0, s0 = to_transformed(-2.0, 0.5).w, to_transformed(-2.0, 0.5).s
        traj = simulate_ws(params, w0, s0, 20.0)
        assert traj.terminal_event is not None
        t_ev = traj.terminal_event.time
        gap = 1e-12 * max(1.0, abs(t_ev))
        s_before = traj.sample(t_ev - gap)[1]
        s_after = traj.sample(t_ev + gap)[1]
        assert s_before >= 0.0 >= s_after or s_before <= 0.0 <= s_after

    def test_halts_at_first_event(self):
        ev_a = lambda t, y: t - 0.5
        ev_b = lambda t, y: t - 0.25
        traj = integrate(lambda t, y: (1.0,), (0.0,), 0.0, 2.0,
                         events=(ev_a, ev_b),
                         event_kinds=(EventKind.CUSTOM, EventKind.CUSTOM))
        assert traj.terminal_event.time == pytest.approx(0.25, abs=1e-12)


class TestConvergence:
    """The embedded pair converges at order >= 4.

    Error-per-step controlled adaptive integrators scale the global error
    essentially linearly in the tolerance, so halving the tolerance cannot
    reduce the error 4-fold; the order is certified instead by fixed-step
    halving (>= 2^4) and by a 16-fold tolerance tightening (>= 4x).
    """

    def _exact(self, params, w0, s0, t):
        tp = eval_trajectory(params, w0, s0, t)
        return np.array([tp.w, tp.s])

    def test_fixed_step_order(self):
        params = WEAK
        rhs = lambda t, y: (-params.beta * y[0] + params.kappa * (1.0 - y[1]), y[0])
        exact = self._exact(params, 0.3, 2.0, 10.0)
        errs = []
        for h in (0.25, 0.125):
            traj = integrate(rhs, (0.3, 2.0), 0.0, 10.0, rel_tol=1e6, abs_tol=1e6,
                             method="RK45", max_step=h, first_step=h)
            errs.append(np.max(np.abs(traj.states[-1] - exact)))
        assert errs[0] / errs[1] >= 10.0  # 2^4 = 16 expected for order 4

    def test_tolerance_tightening(self):
        params = WEAK
        rhs = lambda t, y: (-params.beta * y[0] + params.kappa * (1.0 - y[1]), y[0])
        exact = self._exact(params, 0.3, 2.0, 10.0)
        errs = []
        for tol in (1e-5, 1e-5 / 16.0):
            traj = integrate(rhs, (0.3, 2.0), 0.0, 10.0, rel_tol=tol,
                             abs_tol=tol * 1e-2, method="RK45")
            errs.append(np.max(np.abs(traj.states[-1] - exact)))
        assert errs[0] / errs[1] >= 4.0


class TestSimulatePMu:
    def test_fixed_point(self):
        traj = simulate_pmu(STRONG, 0.0, 0.0, 10.0)
        assert np.max(np.abs(traj.states)) == 0.0

    def test_vacuous_manifold_invariant(self, rng):
        for p0 in rng.uniform(-3.0, 3.0, size=5):
            traj = simulate_pmu(STRONG, float(p0), 1.0, 5.0)
            assert np.max(np.abs(traj.states[:, 1] - 1.0)) <= 1e-12

    def test_supercritical_blowup_event(self):
        # kappa=3, beta=4, (-6, 0) blows up; oracle: closed-form root
        traj = simulate_pmu(STRONG, -6.0, 0.0, 50.0)
        assert traj.terminal_event is not None
        tp = to_transformed(-6.0, 0.0)
        t_c = blowup_time(STRONG, tp.w, tp.s)
        assert traj.terminal_event.time == pytest.approx(t_c, abs=1e-6)


class TestSimulateWs:
    def test_equilibrium_constant(self):
        traj = simulate_ws(STRONG, 0.0, 1.0, 10.0)
        assert np.max(np.abs(traj.states[:, 0])) == 0.0
        assert np.max(np.abs(traj.states[:, 1] - 1.0)) == 0.0

    @pytest.mark.parametrize("reg", list(REGIME_PARAMS))
    def test_matches_closed_form(self, reg, rng):
        for _ in range(20):
            params = draw_params(reg, rng)
            w0, s0 = rng.normal(size=2) * 2.0
            traj = simulate_ws(params, w0, s0, 10.0)
            t_top = traj.terminal_event.time if traj.terminal_event else 10.0
            ts = np.linspace(0.0, t_top, 41)
            num = traj.sample(ts)
            tp = eval_trajectory(params, w0, s0, ts)
            assert np.max(np.abs(tp.w - num[0])) < 1e-8
            assert np.max(np.abs(tp.s - num[1])) < 1e-8

    def test_szero_event_matches_blowup_time(self, rng):
        for _ in range(10):
            params = draw_params(DampingRegime.WEAK, rng)
            # any supercritical start: far left of the threshold
            w0, s0 = -8.0 * math.sqrt(params.kappa), 0.5
            t_c = blowup_time(params, w0, s0)
            assert t_c is not None
            traj = simulate_ws(params, w0, s0, 10.0 + t_c)
            assert traj.terminal_event is not None
            assert traj.terminal_event.kind is EventKind.S_ZERO
            assert traj.terminal_event.time == pytest.approx(t_c, abs=1e-6)


class TestTransformCommutation:
    def test_pointwise_agreement(self, rng):
        # from_transformed(ws trajectory) matches the (p, mu) trajectory
        count = 0
        while count < 100:
            reg = list(REGIME_PARAMS)[count % 3]
            params = draw_params(reg, rng)
            p0 = rng.uniform(-0.8, 0.8)
            mu0 = rng.uniform(-0.5, 0.5)
            from emathresh.thresholds import is_supercritical_explicit

            if is_supercritical_explicit(params, p0, mu0):
                continue
            count += 1
            tp0 = to_transformed(p0, mu0)
            ws = simulate_ws(params, tp0.w, tp0.s, 8.0)
            pm = simulate_pmu(params, p0, mu0, 8.0)
            ts = np.linspace(0.0, 8.0, 30)
            ws_states = ws.sample(ts)
            pm_states = pm.sample(ts)
            mask = ws_states[1] > 0.1
            for k in np.where(mask)[0]:
                p, mu = from_transformed(
                    type(tp0)(w=ws_states[0, k], s=ws_states[1, k])
                )
                assert p == pytest.approx(pm_states[0, k], abs=1e-6)
                assert mu == pytest.approx(pm_states[1, k], abs=1e-6)
