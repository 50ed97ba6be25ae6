import numpy as np
import pytest

from steady_squeeze.bases.dicke_basis import collective_ops
from steady_squeeze.bases.full_basis import site_ops
from steady_squeeze.models.emitter_models import (
    DICKE,
    PERTURBATIVE,
    DickeParams,
    XyzParams,
    build_dicke,
    build_xyz,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def dicke4():
    return collective_ops(4)


@pytest.fixture
def sites3():
    return site_ops(3)


@pytest.fixture
def driven_dicke10():
    """Driven Dicke model, N = 10, Omega / Gamma = 0.05."""
    return build_dicke(DickeParams(10, 0.05, 1.0), DICKE)


@pytest.fixture
def xyz6_manifold():
    """XYZ model on the Dicke manifold, N = 6, J = -0.8, dJ = 0.05, Jz = 1."""
    return build_xyz(XyzParams.from_mean(6, -0.8, 0.05, 1.0), PERTURBATIVE)


@pytest.fixture
def random_rho(rng):
    """Factory for random full-rank density matrices."""

    def make(dim):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = a @ a.conj().T
        return rho / np.trace(rho)

    return make
