import numpy as np
import pytest

from nastlab.algebra import build_rep

REPS = [
    ("su2", "fundamental"),
    ("su2", "spin(1)"),
    ("su2", "spin(3/2)"),
    ("su2", "spin(2)"),
    ("su3", "fundamental"),
    ("su3", "adjoint"),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def su2():
    return build_rep("su2", "fundamental")


@pytest.fixture
def su3():
    return build_rep("su3", "fundamental")


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (z + z.conj().T)
