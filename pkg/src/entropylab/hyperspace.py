"""Finite closed subsets of a subshift with the Hausdorff metric and the induced map."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .shiftspace import Point, Subshift, SubshiftError, metric, shift


@dataclass(frozen=True)
class FiniteClosedSet:
    points: frozenset[Point]

    def __post_init__(self) -> None:
        pts = frozenset(self.points)
        if not pts:
            raise SubshiftError("closed sets in the hyperspace are nonempty")
        if len({p.subshift for p in pts}) != 1:
            raise SubshiftError("points from different subshifts")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, points: Iterable[Point]) -> FiniteClosedSet:
        return cls(frozenset(points))

    @property
    def subshift(self) -> Subshift:
        return next(iter(self.points)).subshift

    def __len__(self) -> int:
        return len(self.points)

    def __le__(self, other: FiniteClosedSet) -> bool:
        return self.points <= other.points

    def sorted_points(self) -> list[Point]:
        return sorted(self.points, key=Point.sort_key)

    def to_json(self) -> dict:
        return {"points": [p.to_json() for p in self.sorted_points()]}

    @classmethod
    def from_json(cls, subshift: Subshift, data: dict) -> FiniteClosedSet:
        return cls.of(Point.from_json(subshift, p) for p in data["points"])


def point_set_distance(x: Point, K: FiniteClosedSet) -> Fraction:
    return min(metric(x, y) for y in K.points)


def hausdorff_distance(K1: FiniteClosedSet, K2: FiniteClosedSet) -> Fraction:
    """Hausdorff distance as the larger of the two directed max-min distances.

    Distances take values in ``{0} U {2**-k}``, so the infimum over strict
    neighborhoods in the definition equals this max-min value (it is an
    infimum that is not attained when positive).
    """
    if K1.subshift != K2.subshift:
        raise SubshiftError("sets live in different subshifts")
    forward = max(point_set_distance(x, K2) for x in K1.points)
    backward = max(point_set_distance(y, K1) for y in K2.points)
    return max(forward, backward)


def induce_hyper(K: FiniteClosedSet) -> FiniteClosedSet:
    return FiniteClosedSet.of(shift(x) for x in K.points)
