import math

import numpy as np
import pytest

from emathresh import (
    DampingRegime,
    ExtremumKind,
    eval_critical,
    eval_strong,
    eval_trajectory,
    eval_weak,
    extremum_time,
    first_min_weak,
    make_params,
    spectral_constants,
    strong_coefficients,
    weak_polar,
)
from emathresh.odeint import integrate

from conftest import CRITICAL, STRONG, WEAK, REGIME_PARAMS, draw_params

# frozen oracle values (independent integration, see the asserts below)
S_CRITICAL_T1 = 1.7357588823428847     # 1 + 2/e, kappa=1 beta=2 (w0,s0)=(0,2)
S_WEAK_BACK = 7.133707406236227        # e^{pi/sqrt(3)} + 1


def _ws_rhs(params):
    k, b = params.kappa, params.beta
    return lambda t, y: (-b * y[0] + k * (1.0 - y[1]), y[0])


def integration_oracle(params, w0, s0, t1, rel=1e-12):
    """Adaptive integration of the (w, s) system, the closed forms' oracle."""
    traj = integrate(_ws_rhs(params), (w0, s0), 0.0, t1, rel_tol=rel, abs_tol=1e-14)
    return traj.states[-1]


class TestInitialCondition:
    def test_t0_identity(self, rng):
        for reg, params in REGIME_PARAMS.items():
            for _ in range(20):
                w0, s0 = rng.normal(size=2) * 2.0
                tp = eval_trajectory(params, w0, s0, 0.0)
                assert tp.w == pytest.approx(w0, abs=1e-14)
                assert tp.s == pytest.approx(s0, abs=1e-14)


class TestStrong:
    def test_desk_trajectory_through_origin(self):
        # kappa=3, beta=4: coefficients for (w0,s0)=(0,0) are A1=-1.5, A2=0.5
        coef = strong_coefficients(STRONG, 0.0, 0.0)
        assert coef.a1 == pytest.approx(-1.5, rel=1e-14)
        assert coef.a2 == pytest.approx(0.5, rel=1e-14)
        for t in np.linspace(-2.0, 5.0, 41):
            tp = eval_strong(STRONG, 0.0, 0.0, t)
            assert tp.s == pytest.approx(
                1.0 - 1.5 * math.exp(-t) + 0.5 * math.exp(-3.0 * t), rel=1e-13, abs=1e-13
            )

    def test_equilibrium_limit(self):
        tp = eval_strong(STRONG, 0.0, 0.0, 80.0)
        assert tp.w == pytest.approx(0.0, abs=1e-12)
        assert tp.s == pytest.approx(1.0, abs=1e-12)

    def test_coefficient_identities(self, rng):
        # A1 + A2 = s0 - 1 and -A1 l1 - A2 l2 = w0
        con = spectral_constants(STRONG)
        for _ in range(100):
            w0, s0 = rng.normal(size=2) * 3.0
            c = strong_coefficients(STRONG, w0, s0)
            assert c.a1 + c.a2 == pytest.approx(s0 - 1.0, rel=1e-12, abs=1e-12)
            assert -c.a1 * con.lambda1 - c.a2 * con.lambda2 == pytest.approx(
                w0, rel=1e-12, abs=1e-12
            )


class TestCritical:
    def test_desk_trajectory_through_origin(self):
        # kappa=1, beta=2: s(t) = 1 - e^{-t} - t e^{-t}
        for t in np.linspace(-1.0, 5.0, 31):
            tp = eval_critical(CRITICAL, 0.0, 0.0, t)
            assert tp.s == pytest.approx(
                1.0 - math.exp(-t) - t * math.exp(-t), rel=1e-13, abs=1e-13
            )

    def test_derived_value_with_oracle(self):
        # s(1) from (0, 2): formula value, frozen, against adaptive integration
        tp = eval_critical(CRITICAL, 0.0, 2.0, 1.0)
        assert tp.s == pytest.approx(S_CRITICAL_T1, rel=1e-14)
        w_ref, s_ref = integration_oracle(CRITICAL, 0.0, 2.0, 1.0)
        assert tp.s == pytest.approx(s_ref, abs=1e-10)
        assert tp.w == pytest.approx(w_ref, abs=1e-10)


class TestWeak:
    def test_backward_excursion_oracle(self):
        # (0,0) traced to t = -pi/omega reaches s = e^{alpha pi/omega} + 1
        con = spectral_constants(WEAK)
        t_back = -math.pi / con.omega
        tp = eval_weak(WEAK, 0.0, 0.0, t_back)
        assert tp.s == pytest.approx(S_WEAK_BACK, rel=1e-13)
        assert tp.s == pytest.approx(math.exp(math.pi / math.sqrt(3.0)) + 1.0, rel=1e-13)
        w_ref, s_ref = integration_oracle(WEAK, 0.0, 0.0, t_back, rel=1e-12)
        assert tp.s == pytest.approx(s_ref, abs=1e-8)

    def test_equilibrium_fixed_point(self):
        for t in (0.0, 1.0, 10.0, -3.0):
            tp = eval_weak(WEAK, 0.0, 1.0, t)
            assert tp.w == 0.0
            assert tp.s == 1.0

    def test_polar_form_matches(self, rng):
        con = spectral_constants(WEAK)
        for _ in range(100):
            w0, s0 = rng.normal(size=2) * 2.0
            pol = weak_polar(WEAK, w0, s0)
            for t in np.linspace(0.0, 8.0, 17):
                expected = 1.0 + pol.r_amp * math.exp(-con.alpha * t) * math.cos(
                    con.omega * t - pol.psi
                )
                assert eval_weak(WEAK, w0, s0, t).s == pytest.approx(
                    expected, rel=1e-12, abs=1e-12
                )


class TestAgainstIntegration:
    @pytest.mark.parametrize("reg", list(REGIME_PARAMS))
    def test_random_draws(self, reg, rng):
        for _ in range(60):
            params = draw_params(reg, rng)
            w0, s0 = rng.normal(size=2) * 2.0
            ts = np.linspace(0.0, 10.0, 21)
            traj = integrate(_ws_rhs(params), (w0, s0), 0.0, 10.0,
                             rel_tol=1e-12, abs_tol=1e-14)
            num = traj.sample(ts)
            tp = eval_trajectory(params, w0, s0, ts)
            assert np.max(np.abs(tp.w - num[0])) < 1e-8
            assert np.max(np.abs(tp.s - num[1])) < 1e-8

    @pytest.mark.parametrize("reg", list(REGIME_PARAMS))
    def test_w_is_ds_dt(self, reg, rng):
        # finite differences of closed-form s against closed-form w
        h = 1e-6
        for _ in range(25):
            params = draw_params(reg, rng)
            w0, s0 = rng.normal(size=2) * 2.0
            for t in np.linspace(0.0, 8.0, 9):
                sp = eval_trajectory(params, w0, s0, t + h).s
                sm = eval_trajectory(params, w0, s0, t - h).s
                w = eval_trajectory(params, w0, s0, t).w
                assert (sp - sm) / (2.0 * h) == pytest.approx(w, abs=1e-5)

    @pytest.mark.parametrize("reg", list(REGIME_PARAMS))
    def test_second_order_residual(self, reg, rng):
        # s'' + beta s' + kappa s - kappa = 0 via centered differences.
        # Desk-scale rates: the h^2 truncation term carries the fourth
        # derivative ~ lambda2^4, so large rates would swamp the 1e-6 budget.
        h = 1e-4
        for _ in range(25):
            kappa = rng.uniform(0.5, 2.0)
            root = 2.0 * math.sqrt(kappa)
            if reg is DampingRegime.STRONG:
                params = make_params(kappa, root * rng.uniform(1.05, 1.3))
            elif reg is DampingRegime.CRITICAL:
                params = make_params(kappa, root)
            else:
                params = make_params(kappa, root * rng.uniform(0.2, 0.95))
            w0, s0 = rng.normal(size=2) * 2.0
            for t in np.linspace(0.1, 6.0, 7):
                sp = eval_trajectory(params, w0, s0, t + h).s
                s0_ = eval_trajectory(params, w0, s0, t).s
                sm = eval_trajectory(params, w0, s0, t - h).s
                s2 = (sp - 2.0 * s0_ + sm) / h**2
                s1 = (sp - sm) / (2.0 * h)
                resid = s2 + params.beta * s1 + params.kappa * s0_ - params.kappa
                assert abs(resid) < 1e-6


class TestExtremum:
    def test_boundary_origin_case(self):
        # (0,0) in the strong desk system: formula gives exactly t* = 0
        res = extremum_time(STRONG, 0.0, 0.0)
        assert res is not None
        t_star, kind = res
        assert t_star == pytest.approx(0.0, abs=1e-14)
        assert kind is ExtremumKind.MIN
        # oracle: closed-form w keeps one sign on t > 0 (monotone s)
        ts = np.linspace(1e-3, 10.0, 1000)
        ws = eval_strong(STRONG, 0.0, 0.0, ts).w
        assert np.all(ws > 0.0)

    def test_critical_minimum(self):
        # kappa=1, beta=2, (w0,s0)=(-1,1): t* = w0/(alpha*w0) = 1, a minimum
        res = extremum_time(CRITICAL, -1.0, 1.0)
        assert res is not None
        t_star, kind = res
        assert t_star == pytest.approx(1.0, rel=1e-14)
        assert kind is ExtremumKind.MIN
        # oracle: grid minimum of the closed form
        ts = np.linspace(0.0, 6.0, 60001)
        ss = eval_critical(CRITICAL, -1.0, 1.0, ts).s
        assert ts[np.argmin(ss)] == pytest.approx(1.0, abs=1e-3)

    def test_strong_maximum(self):
        # kappa=3, beta=4, (1,1): A1 = 1/2 > 0, A2 = -1/2 < 0 -> maximum
        coef = strong_coefficients(STRONG, 1.0, 1.0)
        assert coef.a1 == pytest.approx(0.5) and coef.a2 == pytest.approx(-0.5)
        res = extremum_time(STRONG, 1.0, 1.0)
        assert res is not None
        t_star, kind = res
        assert kind is ExtremumKind.MAX
        ts = np.linspace(0.0, 6.0, 60001)
        ss = eval_strong(STRONG, 1.0, 1.0, ts).s
        assert ts[np.argmax(ss)] == pytest.approx(t_star, abs=1e-3)

    def test_no_extremum_when_same_sign(self):
        # w0 between the two eigen-slopes at s0 = 3 makes A1, A2 > 0:
        # monotone decay from above
        w0, s0 = -4.0, 3.0
        coef = strong_coefficients(STRONG, w0, s0)
        assert coef.a1 > 0 and coef.a2 > 0
        assert extremum_time(STRONG, w0, s0) is None

    def test_weak_rejected(self):
        with pytest.raises(ValueError):
            extremum_time(WEAK, 0.0, 0.0)


class TestFirstMinWeak:
    def test_branch_pi(self):
        # kappa=1, beta=1, (0, 2): denominator kappa(s0-1) = 1 > 0 -> beta0 = pi
        con = spectral_constants(WEAK)
        t_star, s_min = first_min_weak(WEAK, 0.0, 2.0)
        assert t_star == pytest.approx(math.pi / con.omega, rel=1e-13)
        assert t_star == pytest.approx(2.0 * math.pi / math.sqrt(3.0), rel=1e-13)
        # oracle: fine-grid minimum search on the closed form
        ts = np.linspace(0.0, 8.0, 800001)
        ss = eval_weak(WEAK, 0.0, 2.0, ts).s
        i = np.argmin(ss)
        assert ts[i] == pytest.approx(t_star, abs=1e-4)
        assert ss[i] == pytest.approx(s_min, abs=1e-8)
        assert weak_polar(WEAK, 0.0, 2.0).beta0 == math.pi

    def test_branch_zero(self):
        # (w0,s0)=(-1,1): denominator = alpha*w0 = -0.5 < 0 and w0 < 0 -> beta0 = 0
        assert weak_polar(WEAK, -1.0, 1.0).beta0 == 0.0
        con = spectral_constants(WEAK)
        t_star, s_min = first_min_weak(WEAK, -1.0, 1.0)
        assert 0.0 < t_star < math.pi / (2.0 * con.omega)
        ts = np.linspace(0.0, 6.0, 600001)
        ss = eval_weak(WEAK, -1.0, 1.0, ts).s
        assert ts[np.argmin(ss)] == pytest.approx(t_star, abs=1e-4)

    def test_branch_two_pi(self):
        # w0 > 0 with denominator < 0: s0 < 1 strongly
        w0, s0 = 0.3, 0.2
        con = spectral_constants(WEAK)
        den = con.alpha * w0 + WEAK.kappa * (s0 - 1.0)
        assert den < 0.0 and w0 > 0.0
        assert weak_polar(WEAK, w0, s0).beta0 == 2.0 * math.pi
        t_star, s_min = first_min_weak(WEAK, w0, s0)
        assert 1.5 * math.pi < con.omega * t_star < 2.0 * math.pi
        ts = np.linspace(0.0, 10.0, 1000001)
        ss = eval_weak(WEAK, w0, s0, ts).s
        assert ts[np.argmin(ss)] == pytest.approx(t_star, abs=1e-4)

    def test_value_consistency(self, rng):
        # s_min equals the closed form evaluated at t*
        for _ in range(200):
            params = draw_params(DampingRegime.WEAK, rng)
            w0, s0 = rng.normal(size=2) * 2.0
            if w0 == 0.0 and s0 == 1.0:
                continue
            t_star, s_min = first_min_weak(params, w0, s0)
            assert s_min == pytest.approx(
                float(eval_weak(params, w0, s0, t_star).s), rel=1e-12, abs=1e-12
            )

    def test_degenerate_denominator_continuity(self):
        # alpha w0 + kappa (s0 - 1) = 0 with w0 < 0: omega t* = pi/2 by the
        # arctan limit, matching both adjacent branches
        con = spectral_constants(WEAK)
        w0 = -1.0
        s0 = 1.0 - con.alpha * w0 / WEAK.kappa  # denominator exactly zero
        t_star, _ = first_min_weak(WEAK, w0, s0)
        assert con.omega * t_star == pytest.approx(0.5 * math.pi, rel=1e-12)
        for eps in (1e-9, -1e-9):
            t_eps, _ = first_min_weak(WEAK, w0, s0 + eps)
            assert t_eps == pytest.approx(t_star, abs=1e-7)

    def test_min_at_start(self):
        # w0 = 0 with s0 < 1: s starts at its minimum, t* = 0, s_min = s0
        t_star, s_min = first_min_weak(WEAK, 0.0, 0.5)
        assert t_star == 0.0
        assert s_min == pytest.approx(0.5, rel=1e-12)

    def test_equilibrium_rejected(self):
        with pytest.raises(ValueError):
            first_min_weak(WEAK, 0.0, 1.0)


def test_exp_clamp_no_underflow():
    # extremely late times underflow cleanly to the equilibrium
    tp = eval_strong(STRONG, 1.0, 2.0, 1e6)
    assert tp.w == 0.0
    assert tp.s == 1.0
