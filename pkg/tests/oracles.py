"""Brute-force reference computations, deliberately naive and independent of the package code paths."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

import numpy as np


def brute_words(alphabet: str, forbidden, n: int, pad: int = 8) -> set[str]:
    """Words of length n avoiding ``forbidden`` that extend by ``pad`` more symbols."""
    out = set()
    for w in product(alphabet, repeat=n + pad):
        w = "".join(w)
        if not any(f in w for f in forbidden):
            out.add(w[:n])
    return out


def brute_first_difference(x, y, horizon: int = 200):
    a, b = x.prefix(horizon), y.prefix(horizon)
    for i in range(horizon):
        if a[i] != b[i]:
            return i
    return None


def brute_distance(x, y) -> Fraction:
    k = brute_first_difference(x, y)
    return Fraction(0) if k is None else Fraction(1, 2**k)


def brute_set_cover(universe, sets) -> int:
    """Smallest number of sets (python sets) covering ``universe`` by exhaustive search."""
    universe = set(universe)
    for r in range(1, len(sets) + 1):
        for combo in combinations(sets, r):
            if set().union(*combo) >= universe:
                return r
    raise ValueError("no cover")


def brute_join_cover_size(words_n, u0_words, u1_words, L, n) -> int:
    vectors = {}
    for t in product((0, 1), repeat=n):
        cov = frozenset(
            w for w in words_n
            if all(w[j:j + L] in (u0_words, u1_words)[t[j]] for j in range(n))
        )
        if cov:
            vectors[t] = cov
    return brute_set_cover(words_n, list(set(vectors.values())))


def brute_independent(alphabet, forbidden, sets_words, L, I, pad: int = 6) -> bool:
    """Every pattern on I realized by some admissible word of length max(I)+L+pad."""
    if not I:
        return True
    n = max(I) + L
    words = brute_words(alphabet, forbidden, n, pad)
    for sigma in product(range(len(sets_words)), repeat=len(I)):
        if not any(all(w[j:j + L] in sets_words[c] for j, c in zip(I, sigma)) for w in words):
            return False
    return True


def brute_max_independence(alphabet, forbidden, sets_words, L, N, pad: int = 2) -> int:
    """Largest I inside [0, N) whose every pattern is the projection of some admissible word."""
    words = brute_words(alphabet, forbidden, N + L - 1, pad)
    k = len(sets_words)
    for r in range(N, 0, -1):
        for I in combinations(range(N), r):
            seen = set()
            for w in words:
                opts = [[c for c in range(k) if w[j:j + L] in sets_words[c]] for j in I]
                seen.update(product(*opts))
            if len(seen) == k ** r:
                return r
    return 0


def brute_prohorov(mu, nu, metric) -> Fraction:
    """One-sided Prohorov value by scanning candidate breakpoints.

    The feasible set of delta is up-closed with infimum among distances and
    mass differences ``mu(A) - nu(B)``; feasibility is tested just above each
    candidate using strict neighborhoods directly.
    """
    xs, ms = mu.support, mu.masses
    ys, ns = nu.support, nu.masses
    dist = {(i, j): metric(x, y) for i, x in enumerate(xs) for j, y in enumerate(ys)}

    def feasible(delta: Fraction) -> bool:
        for r in range(1, len(xs) + 1):
            for A in combinations(range(len(xs)), r):
                muA = sum(ms[i] for i in A)
                near = sum(ns[j] for j in range(len(ys)) if min(dist[i, j] for i in A) < delta)
                if muA > near + delta:
                    return False
        return True

    cands = {Fraction(0)} | set(dist.values())
    nu_sums = {sum(c) for r in range(len(ns) + 1) for c in combinations(ns, r)}
    mu_sums = {sum(c) for r in range(1, len(ms) + 1) for c in combinations(ms, r)}
    cands |= {a - b for a in mu_sums for b in nu_sums if a - b > 0}
    cands = sorted(c for c in cands if 0 <= c <= 1) + [Fraction(2)]
    for c, nxt in zip(cands, cands[1:]):
        if feasible((c + nxt) / 2):
            return c
    raise AssertionError("unreachable")


def spectral_entropy(adjacency) -> float:
    """log2 of the Perron eigenvalue of a transfer matrix."""
    vals = np.linalg.eigvals(np.asarray(adjacency, dtype=float))
    return float(np.log2(max(abs(vals))))


GOLDEN_RATE = spectral_entropy([[1, 1], [1, 0]])
