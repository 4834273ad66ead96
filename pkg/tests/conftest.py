"""
Test configuration and shared fixtures
"""

import os

import pytest
from hypothesis import settings as hypothesis_settings

# Set test environment before importing app modules
os.environ["ENVIRONMENT"] = "test"
os.environ["RETRACT_SEED"] = "0"
os.environ["RETRACT_FIXTURE_DIR"] = os.path.join(os.path.dirname(__file__), "..", "fixtures")

hypothesis_settings.register_profile("toolkit", max_examples=60, deadline=None)
hypothesis_settings.load_profile("toolkit")

from app.fixtures import closed_fixture
from app.hyperspaces import OpenName, label_map_cont
from app.spaces import CantorSpace, Cell, PadicField, PadicIntegers


@pytest.fixture
def cantor():
    return CantorSpace()


@pytest.fixture
def z3():
    return PadicIntegers(3)


@pytest.fixture
def q3():
    return PadicField(3)


@pytest.fixture
def cylinder_zero(cantor):
    """A = [0], the cylinder of words starting with 0"""
    return closed_fixture(cantor, [("0", "1/2")])


@pytest.fixture
def three_z3(z3):
    """A = 3Z_3"""
    return closed_fixture(z3, [("0", "1/3")])


@pytest.fixture
def nine_z3(z3):
    """A = 9Z_3, the closed ball of radius 1/9 around 0"""
    return closed_fixture(z3, [("0", "1/9")])


@pytest.fixture
def cantor_opens(cantor):
    """Builds an open name from cylinder words"""

    def build(*words):
        return OpenName.from_cells(cantor, [Cell(len(w), w) for w in words])

    return build


@pytest.fixture
def cylinder_swap(cantor):
    """The map exchanging the cylinders [0] and [1] by flipping the first bit"""

    def flip(word):
        if not word:
            return word
        return ("1" if word[0] == "0" else "0") + word[1:]

    return label_map_cont(cantor, flip)
