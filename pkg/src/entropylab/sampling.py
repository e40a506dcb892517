"""Seeded random generators for points, measures and neighborhood members.

Every stream is derived from a ``(seed, name)`` pair so that independent
consumers never share state and results do not depend on call order.
"""

from __future__ import annotations

import hashlib
import random
from fractions import Fraction

from .measures import DiscreteMeasure, WNeighborhood
from .shiftspace import ClopenSet, Point, Subshift, random_point


def named_rng(seed: int, name: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def random_measure(
    subshift: Subshift,
    rng: random.Random,
    max_atoms: int = 5,
    max_weight: int = 6,
) -> DiscreteMeasure:
    """Random rational measure on up to ``max_atoms`` random points."""
    k = rng.randint(1, max_atoms)
    pts = [random_point(subshift, rng) for _ in range(k)]
    weights = [rng.randint(1, max_weight) for _ in pts]
    total = sum(weights)
    return DiscreteMeasure.from_pairs((p, Fraction(w, total)) for p, w in zip(pts, weights))


def point_near(x: Point, depth: int, rng: random.Random) -> Point:
    """Random point agreeing with ``x`` on its first ``depth`` symbols."""
    return random_point(x.subshift, rng, prefix=x.prefix(depth))


def perturb_measure(mu: DiscreteMeasure, radius: Fraction, rng: random.Random) -> DiscreteMeasure:
    """Random measure that is usually, not always, within ``radius`` of ``mu``.

    Each atom is moved to a point at distance at most ``2**-depth`` and a
    random share of mass below ``radius`` is sent to arbitrary points.
    """
    depth = 0
    while Fraction(1, 2**depth) >= radius:
        depth += 1
    depth += rng.randint(0, 3)
    leak = radius * Fraction(rng.randint(0, 9), 10)
    pairs = []
    for p, m in mu.atoms:
        moved = point_near(p, depth, rng) if rng.random() < 0.7 else p
        pairs.append((moved, m * (1 - leak)))
    if leak:
        spots = rng.randint(1, 2)
        for _ in range(spots):
            pairs.append((random_point(mu.subshift, rng), leak / spots))
    return DiscreteMeasure.from_pairs(pairs)


def sample_in_w(W: WNeighborhood, rng: random.Random) -> DiscreteMeasure:
    """Random member of ``W``: each part gets mass above its threshold."""
    subshift = W.parts[0][0].subshift
    spare = 1 - sum(eta for _, eta in W.parts)
    extras = [spare * Fraction(rng.randint(1, 20), 20) for _ in W.parts]
    # scale so that sum of extras is at most spare
    total_extra = sum(extras)
    if total_extra > spare:
        extras = [e * spare / total_extra for e in extras]
    pairs = []
    for (u, eta), extra in zip(W.parts, extras):
        share = eta + extra
        pts = [random_point(subshift, rng, prefix=rng.choice(sorted(u.words))) for _ in range(rng.randint(1, 2))]
        for p in pts:
            pairs.append((p, share / len(pts)))
    rest = 1 - sum(m for _, m in pairs)
    if rest:
        pairs.append((random_point(subshift, rng), rest))
    return DiscreteMeasure.from_pairs(pairs)


def random_clopen(subshift: Subshift, rng: random.Random, max_window: int = 3) -> ClopenSet:
    L = rng.randint(1, max_window)
    words = [w for w in subshift.words(L) if rng.random() < 0.5]
    return ClopenSet(subshift, L, frozenset(words))
