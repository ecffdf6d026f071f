import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture
def mirror():
    from dfsphoton.geometry import EmitterArray

    return EmitterArray.mirror(3)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def random_density(rng, dim=8):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real
