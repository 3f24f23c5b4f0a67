import numpy as np
import pytest

from qbench.backends import LocalSimBackend
from qbench.device import ideal_device, starmon5_reference_model


@pytest.fixture(scope="session")
def starmon_backend():
    return LocalSimBackend(starmon5_reference_model())


@pytest.fixture(scope="session")
def ideal_backend_5():
    return LocalSimBackend(ideal_device(5))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_su2(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_u4(rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
