import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense_covariance(psi: np.ndarray, m: int) -> np.ndarray:
    """``<alpha_i+ alpha_j>`` of a Fock vector, alpha = (a, a+)."""
    from latcft.fock import annihilators

    a = [x.toarray() for x in annihilators(m)]
    alpha = a + [x.conj().T for x in a]
    G = np.empty((2 * m, 2 * m), dtype=complex)
    for i, x in enumerate(alpha):
        left = x @ psi  # alpha_i psi; <psi| alpha_i+ = (alpha_i psi)+
        for j, y in enumerate(alpha):
            G[i, j] = np.vdot(left, y @ psi)
    return G
