import random

from hypothesis import given, settings, strategies as st

from entropylab.hyperspace import FiniteClosedSet, hausdorff_distance, induce_hyper
from entropylab.shiftspace import Point, metric, random_point, shift

from conftest import FULL, GOLDEN

Z, O = Point(FULL, "", "0"), Point(FULL, "", "1")


def K(*pts):
    return FiniteClosedSet.of(pts)


def brute_hausdorff(A, B):
    # smallest d with each set inside the closed d-neighborhood of the other
    cands = sorted({metric(a, b) for a in A.points for b in B.points})
    for d in cands:
        if all(any(metric(a, b) <= d for b in B.points) for a in A.points) and \
           all(any(metric(a, b) <= d for a in A.points) for b in B.points):
            return d
    raise AssertionError


def test_distance_examples():
    assert hausdorff_distance(K(Z), K(Z)) == 0
    assert hausdorff_distance(K(Z), K(O)) == 1
    assert hausdorff_distance(K(Z, O), K(Z)) == 1


def test_induced_map_examples():
    assert induce_hyper(K(Z)) == K(Z)
    assert induce_hyper(K(Point(FULL, "0", "1"), O)) == K(O)
    a, b = Point(FULL, "", "01"), Point(FULL, "", "10")
    assert induce_hyper(K(a, b)) == K(b, a)


sets = st.lists(st.integers(0, 2**32), min_size=1, max_size=4).map(
    lambda seeds: FiniteClosedSet.of(random_point(GOLDEN, random.Random(s)) for s in seeds)
)


@given(sets, sets, sets)
@settings(max_examples=150, deadline=None)
def test_hausdorff_axioms(A, B, C):
    dab = hausdorff_distance(A, B)
    assert (dab == 0) == (A == B)
    assert dab == hausdorff_distance(B, A)
    assert hausdorff_distance(A, C) <= dab + hausdorff_distance(B, C)
    assert dab == brute_hausdorff(A, B)


@given(sets)
@settings(max_examples=50, deadline=None)
def test_induced_map_elementwise(A):
    assert induce_hyper(A).points == frozenset(shift(x) for x in A.points)


def test_json_round_trip():
    A = K(Z, O)
    assert FiniteClosedSet.from_json(FULL, A.to_json()) == A
