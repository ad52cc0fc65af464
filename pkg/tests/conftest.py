import numpy as np
import pytest

from mrlwe.params import RingParams


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


@pytest.fixture(scope="session")
def p44_13():
    return RingParams.create((4, 4), 13)


@pytest.fixture(scope="session")
def p88_17():
    return RingParams.create((8, 8), 17)


@pytest.fixture(scope="session")
def p4_13():
    return RingParams.create((4,), 13)
