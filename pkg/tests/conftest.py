import pytest

from crystalzeta import presets


@pytest.fixture(scope="session")
def line():
    return presets.get_preset("line")


@pytest.fixture(scope="session")
def square():
    return presets.get_preset("square")


@pytest.fixture(scope="session")
def triangular():
    return presets.get_preset("triangular")


@pytest.fixture(scope="session")
def hexagonal():
    return presets.get_preset("hexagonal")
