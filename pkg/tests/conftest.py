import pytest

from soft_covering.probability import bec, bsc, make_distribution, noiseless, uniform


@pytest.fixture
def uniform2():
    return uniform(2)


@pytest.fixture
def bsc011():
    return bsc(0.11)


@pytest.fixture
def bsc02():
    return bsc(0.2)


@pytest.fixture
def bec02():
    return bec(0.2)


@pytest.fixture
def noiseless2():
    return noiseless(2)


@pytest.fixture
def skewed3():
    return make_distribution([0.5, 0.3, 0.2])
