import numpy as np
import pytest

from ctmc_rates import GeneratorMatrix, RateMap, TwoStateModel


def random_model(rng, n_max=5, intensity_cap=2.0, rate_cap=0.2):
    """A random admissible model with strictly positive off-diagonals."""
    n = int(rng.integers(2, n_max + 1))
    Q = rng.uniform(0.05, intensity_cap, size=(n, n))
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    rates = rng.uniform(0.01, rate_cap, size=n)
    return GeneratorMatrix(Q), RateMap(rates)


@pytest.fixture
def two_state_example():
    """Two-state model with the worked-example parameters."""
    m = TwoStateModel(lam=0.5, rate=0.1)
    return m, m.generator(), m.rate_map()
