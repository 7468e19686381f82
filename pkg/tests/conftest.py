import math
from functools import lru_cache

import numpy as np
import pytest

from entransfer.squeezing import SqueezeParams, assemble_cavity_state_closed_form

SIN2 = 0.1
THETA = math.asin(math.sqrt(SIN2))


@lru_cache(maxsize=None)
def cavity(r, n_max=20, tol=1e-3):
    return assemble_cavity_state_closed_form(SqueezeParams(r, THETA, n_max, tol))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_x_state(rng):
    """Random physical X-shaped two-qubit matrix in the |11>,|10>,|01>,|00> order."""
    p = rng.dirichlet(np.ones(4))
    A, B, C, F = p
    # |<11|rho|00>| <= sqrt(A F) keeps the outer block PSD
    d = math.sqrt(A * F) * rng.uniform() * np.exp(1j * rng.uniform(0, 2 * math.pi))
    return A, B, C, d, F
