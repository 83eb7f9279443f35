import pytest

from primevar.lfunctions import bundled_table
from primevar.weights import get_weight


@pytest.fixture(scope="session")
def table():
    return bundled_table()


@pytest.fixture(scope="session")
def eta1():
    return get_weight("exp_linear")


@pytest.fixture(scope="session")
def eta2():
    return get_weight("gauss_quadratic")


@pytest.fixture(scope="session")
def bump():
    return get_weight("bump")
