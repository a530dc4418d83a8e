import warnings
from fractions import Fraction

import pytest

from feketedyn.dynatomic import periodic_points
from feketedyn.geometry import RationalMapLift
from feketedyn.potential import GreenEvaluator

MAPS = {
    "z2": 0,
    "z2p1": 1,
    "z2m1": -1,
    "z2m2": -2,
    "z2p14": Fraction(1, 4),
    "z2p13": Fraction(1, 3),
    "z2pi4": 0.25j,
}


@pytest.fixture(scope="session")
def maps():
    return {k: RationalMapLift.from_affine_quadratic(c) for k, c in MAPS.items()}


@pytest.fixture(scope="session")
def evaluators(maps):
    return {k: GreenEvaluator.make(F) for k, F in maps.items()}


@pytest.fixture(scope="session")
def perpts_cache(maps):
    """Session-wide cache of periodic point configurations."""
    cache = {}

    def get(key: str, n: int, tol: float = 1e-12):
        if (key, n, tol) not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cache[(key, n, tol)] = periodic_points(maps[key], n, tol=tol)
        return cache[(key, n, tol)]

    return get
