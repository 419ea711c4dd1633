import numpy as np
import pytest

from qdspin import CouplingSet


def random_couplings(rng, n, epsilon_e=0.0, epsilon_n=0.0):
    """Hyperfine constants drawn uniformly from (0, 1]."""
    return CouplingSet(1.0 - rng.random(n), epsilon_e, epsilon_n)


def random_product(rng, n):
    """(theta, phi, mask) of a Haar-random electron direction and a random nuclear mask."""
    return (float(np.arccos(rng.uniform(-1, 1))), float(rng.uniform(0, 2 * np.pi)),
            int(rng.integers(0, 1 << n)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
