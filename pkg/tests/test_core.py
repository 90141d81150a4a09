import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emathresh import (
    DampingRegime,
    SingularStateError,
    TransformedPoint,
    VacuousStateError,
    from_transformed,
    make_params,
    regime,
    spectral_constants,
    to_transformed,
)

from conftest import draw_params


class TestMakeParams:
    def test_strong_examples(self):
        assert regime(make_params(1.0, 3.0, 2, 1e-9)) is DampingRegime.STRONG
        assert regime(make_params(2.0, 3.0, 3, 1e-9)) is DampingRegime.STRONG  # 9 > 8

    def test_rejections(self):
        with pytest.raises(ValueError):
            make_params(1.0, -1.0, 2, 1e-9)
        with pytest.raises(ValueError):
            make_params(0.0, 1.0)
        with pytest.raises(ValueError):
            make_params(-2.0, 1.0)
        with pytest.raises(ValueError):
            make_params(1.0, 1.0, 0)
        with pytest.raises(ValueError):
            make_params(math.nan, 1.0)
        with pytest.raises(ValueError):
            make_params(1.0, math.inf)
        with pytest.raises(ValueError):
            make_params(1.0, 1.0, 2, 0.0)
        with pytest.raises(ValueError):
            make_params(1.0, 1.0, 2, 1e-2)


class TestRegime:
    def test_trichotomy_desk(self):
        assert regime(make_params(1.0, 3.0)) is DampingRegime.STRONG
        assert regime(make_params(1.0, 2.0)) is DampingRegime.CRITICAL
        assert regime(make_params(1.0, 1.0)) is DampingRegime.WEAK

    def test_beta_zero_is_weak(self):
        assert regime(make_params(1.0, 0.0)) is DampingRegime.WEAK

    @given(kappa=st.floats(1e-3, 1e3), beta=st.floats(0.0, 1e3))
    @settings(max_examples=200, deadline=None)
    def test_trichotomy_total_exclusive(self, kappa, beta):
        reg = regime(make_params(kappa, beta))
        assert reg in (DampingRegime.STRONG, DampingRegime.CRITICAL, DampingRegime.WEAK)

    def test_near_critical_band(self):
        p = make_params(1.0, 2.0 * (1.0 + 1e-12), regime_tol=1e-9)
        assert regime(p) is DampingRegime.CRITICAL


class TestSpectralConstants:
    def test_strong_desk_polynomial_oracle(self):
        # lambda1, lambda2 are the roots of x^2 - beta x + kappa
        con = spectral_constants(make_params(3.0, 4.0))
        roots = sorted(np.roots([1.0, -4.0, 3.0]).real)
        assert con.lambda1 == pytest.approx(roots[0], rel=1e-12)
        assert con.lambda2 == pytest.approx(roots[1], rel=1e-12)
        for lam in (con.lambda1, con.lambda2):
            assert lam * lam - 4.0 * lam + 3.0 == pytest.approx(0.0, abs=1e-12)

    def test_critical_desk(self):
        con = spectral_constants(make_params(1.0, 2.0))
        assert con.alpha == 1.0
        assert con.omega == 0.0
        assert con.lambda1 is None and con.lambda2 is None

    def test_weak_desk(self):
        con = spectral_constants(make_params(1.0, 1.0))
        assert con.alpha == 0.5
        assert con.omega == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-15)
        # oracle: alpha^2 + omega^2 = kappa
        assert con.alpha**2 + con.omega**2 == pytest.approx(1.0, rel=1e-12)

    def test_strong_product_sum_relations(self, rng):
        for _ in range(1000):
            kappa = rng.uniform(1e-2, 1e2)
            beta = 2.0 * math.sqrt(kappa) * (1.0 + 1e-6) * rng.uniform(1.0, 10.0)
            con = spectral_constants(make_params(kappa, beta))
            assert 0.0 < con.lambda1 < con.lambda2
            assert con.lambda1 * con.lambda2 == pytest.approx(kappa, rel=1e-12)
            assert con.lambda1 + con.lambda2 == pytest.approx(beta, rel=1e-12)


class TestTransform:
    def test_examples(self):
        tp = to_transformed(0.0, 0.0)
        assert (tp.w, tp.s) == (0.0, 1.0)
        tp = to_transformed(-1.0, 0.5)
        assert (tp.w, tp.s) == (-2.0, 2.0)
        tp = to_transformed(3.0, -1.0)
        assert (tp.w, tp.s) == (1.5, 0.5)

    def test_vacuous_error(self):
        with pytest.raises(VacuousStateError):
            to_transformed(0.5, 1.0)

    def test_inverse_examples(self):
        assert from_transformed(TransformedPoint(0.0, 1.0)) == (0.0, 0.0)
        assert from_transformed(TransformedPoint(-2.0, 2.0)) == (-1.0, 0.5)
        with pytest.raises(SingularStateError):
            from_transformed(TransformedPoint(1.0, 0.0))

    @given(
        p=st.floats(-1e6, 1e6),
        mu=st.floats(-1e6, 1.0 - 1e-8).filter(lambda m: abs(1.0 - m) > 1e-8),
    )
    @settings(max_examples=300, deadline=None)
    def test_round_trip(self, p, mu):
        back_p, back_mu = from_transformed(to_transformed(p, mu))
        assert back_p == pytest.approx(p, rel=1e-14, abs=1e-300)
        assert back_mu == pytest.approx(mu, rel=1e-14, abs=1e-14)


def test_draw_params_lands_in_regime(rng):
    for reg in DampingRegime:
        for _ in range(50):
            assert regime(draw_params(reg, rng)) is reg
