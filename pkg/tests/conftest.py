import numpy as np
import pytest

from diamondsim import build_generators, structure_constants


@pytest.fixture(scope="session")
def gens4():
    return build_generators(4)


@pytest.fixture(scope="session")
def f4(gens4):
    return structure_constants(gens4)


def random_density(rng, n=4, rank=None):
    rank = rank or n
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, n=4):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2
