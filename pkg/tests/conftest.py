import numpy as np
import pytest

from fdwpcn.config import SolverParams, SystemConfig
from fdwpcn.scenario import CompositeChannels


def unit_config(K, Mx, Mz, **overrides):
    """Config with unit-scale physics: Pmax = 1 W, sigma^2 = 1 W, gap = 1,
    eta = 1.  Keeps toy-oracle arithmetic readable."""
    defaults = dict(K=K, Mx=Mx, Mz=Mz, T=1.0, Pmax_dBm=30.0,
                    noise_density_dBm_per_Hz=30.0, bandwidth_Hz=1.0,
                    capacity_gap_dB=0.0, eta=1.0)
    defaults.update(overrides)
    return SystemConfig(**defaults)


def toy_composite(K, M, seed, direct=1.0, cascade=0.5):
    """Random O(1)-scale composite channels for oracle comparisons."""
    rng = np.random.default_rng(seed)

    def cvec(shape, scale):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    return CompositeChannels(
        q=cvec((K, M), cascade / max(np.sqrt(M), 1.0)),
        q_bar=cvec((K, M), cascade / max(np.sqrt(M), 1.0)),
        h_d=cvec(K, direct),
        h_d_bar=cvec(K, direct),
    )


@pytest.fixture
def tight_solver():
    return SolverParams(max_iters=2000, grad_tol=1e-10)


def pytest_addoption(parser):
    parser.addoption("--skip-slow-acceptance", action="store_true", default=False,
                     help="Skip the long qualitative-curve acceptance test.")
