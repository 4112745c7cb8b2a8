import numpy as np
import pytest

from coop2 import models


@pytest.fixture(scope="session")
def goodwin_model():
    return models.goodwin(4, [0.5] * 4, 10)


@pytest.fixture(scope="session")
def goodwin_eq(goodwin_model):
    return models.goodwin_equilibrium(goodwin_model)


@pytest.fixture(scope="session")
def rna_model():
    return models.rna_oscillator()


@pytest.fixture(scope="session")
def rna_eq(rna_model):
    return models.find_equilibrium(rna_model)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
