import numpy as np
import pytest

from herglotz.scenarios import (
    affine_scenario,
    damped_oscillator_scenario,
    kaluza_klein_scenario,
    wong_scenario,
)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def affine():
    return affine_scenario(q=2.0, gamma=0.1)


@pytest.fixture(scope="session")
def kaluza_klein():
    return kaluza_klein_scenario(field=1.0, gamma=0.1)


@pytest.fixture(scope="session")
def wong():
    return wong_scenario(gamma=0.1, coupling=0.3, field=0.5)


@pytest.fixture(scope="session")
def oscillator():
    return damped_oscillator_scenario(gamma=0.1)


@pytest.fixture(scope="session", params=["affine", "kaluza_klein", "wong"])
def symmetric_scenario(request):
    return request.getfixturevalue(request.param)
