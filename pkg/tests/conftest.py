import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import dimwitness as dw


def rand_state(dim: int, rng: np.random.Generator) -> dw.QuantumState:
    """Rank-one state: a Haar-rotated |0><0|."""
    u = dw.haar_unitary(dim, rng)
    return dw.QuantumState(dim, u @ dw.basis_state(dim).matrix @ u.conj().T)


def rand_pm_observable(dim: int, rng: np.random.Generator) -> dw.Observable:
    """Haar-rotated basis-parity observable (eigenvalues +-1)."""
    return dw.conjugated_observable(dw.basis_parity_observable(dim), dw.haar_unitary(dim, rng))


def exact_svals(t, rho, m, n_delays):
    """Singular values of the delay matrix of the exact series."""
    series = dw.exact_series(t, rho, m, n_delays)
    return dw.singular_values(dw.delay_matrix(series, n_delays))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
