import numpy as np
import pytest

from emathresh import DampingRegime, make_params


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


# desk parameter sets, one per regime
STRONG = make_params(3.0, 4.0)      # lambda1 = 1, lambda2 = 3
CRITICAL = make_params(1.0, 2.0)    # alpha = 1
WEAK = make_params(1.0, 1.0)        # alpha = 0.5, omega = sqrt(3)/2

REGIME_PARAMS = {
    DampingRegime.STRONG: STRONG,
    DampingRegime.CRITICAL: CRITICAL,
    DampingRegime.WEAK: WEAK,
}


def draw_params(reg: DampingRegime, rng: np.random.Generator, beta_floor: float = 0.05):
    """Random parameters inside one damping regime (bounded rates so that
    exp factors stay far from overflow)."""
    kappa = rng.uniform(0.5, 5.0)
    root = 2.0 * np.sqrt(kappa)
    if reg is DampingRegime.STRONG:
        beta = root * rng.uniform(1.01, 3.0)
    elif reg is DampingRegime.CRITICAL:
        beta = root
    else:
        beta = root * rng.uniform(beta_floor, 0.95)
    return make_params(float(kappa), float(beta))
