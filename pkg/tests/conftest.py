import numpy as np
import pytest

from chiralzf.coupling import ZFParams
from chiralzf.dynamics import SpinPair


@pytest.fixture(scope="session")
def sp():
    return SpinPair(gamma1=10.705, gamma2=42.576, label1="13C", label2="1H")


@pytest.fixture(scope="session")
def default_params():
    return ZFParams(j0=100.0, j1bar=1.0, dbar=0.7)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240317)
