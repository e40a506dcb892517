import random

import pytest
from hypothesis import strategies as st

from entropylab.shiftspace import ClopenSet, Subshift, random_point

FULL = Subshift.full(2)
GOLDEN = Subshift.golden_mean()
SHIFTS = {"full": FULL, "golden": GOLDEN}


@pytest.fixture(params=sorted(SHIFTS))
def subshift(request):
    return SHIFTS[request.param]


@pytest.fixture
def full():
    return FULL


@pytest.fixture
def golden():
    return GOLDEN


def cyl(S, w):
    return ClopenSet.cylinder(S, w)


def points(S):
    """Hypothesis strategy for random eventually periodic points of S."""
    return st.integers(0, 2**32).map(lambda s: random_point(S, random.Random(s)))
