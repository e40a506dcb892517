"""Finitely supported probability measures on a subshift.

Masses are exact ``Fraction``s and distances are dyadic ``Fraction``s, so
every strict inequality (``nu(U) > eta``, ``d_P < delta``) is decided exactly.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .shiftspace import ClopenSet, Point, Subshift, SubshiftError, first_difference, shift

ONE = Fraction(1)


class MeasureError(ValueError):
    pass


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class DiscreteMeasure:
    """A probability measure with finitely many atoms.

    Build with :meth:`from_pairs` to merge repeated points.  Atoms are kept
    sorted so that equal measures have equal representations.
    """

    atoms: tuple[tuple[Point, Fraction], ...]

    def __post_init__(self) -> None:
        atoms = tuple(sorted(((p, _frac(m)) for p, m in self.atoms), key=lambda a: a[0].sort_key()))
        if not atoms:
            raise MeasureError("a probability measure needs at least one atom")
        if len({p for p, _ in atoms}) != len(atoms):
            raise MeasureError("atoms must be distinct points; use from_pairs to merge")
        if len({p.subshift for p, _ in atoms}) != 1:
            raise MeasureError("atoms from different subshifts")
        if any(m <= 0 for _, m in atoms):
            raise MeasureError("atom masses must be positive")
        if sum(m for _, m in atoms) != 1:
            raise MeasureError("masses must sum to exactly 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Point, Fraction]]) -> DiscreteMeasure:
        acc: dict[Point, Fraction] = {}
        for p, m in pairs:
            acc[p] = acc.get(p, Fraction(0)) + _frac(m)
        return cls(tuple((p, m) for p, m in acc.items() if m != 0))

    @classmethod
    def dirac(cls, x: Point) -> DiscreteMeasure:
        return cls(((x, ONE),))

    @property
    def subshift(self) -> Subshift:
        return self.atoms[0][0].subshift

    @property
    def support(self) -> list[Point]:
        return [p for p, _ in self.atoms]

    @property
    def masses(self) -> list[Fraction]:
        return [m for _, m in self.atoms]

    def mass(self, x: Point) -> Fraction:
        for p, m in self.atoms:
            if p == x:
                return m
        return Fraction(0)

    def __len__(self) -> int:
        return len(self.atoms)

    def to_json(self) -> dict:
        return {"atoms": [{"point": p.to_json(), "mass": str(m)} for p, m in self.atoms]}

    @classmethod
    def from_json(cls, subshift: Subshift, data: dict) -> DiscreteMeasure:
        return cls.from_pairs(
            (Point.from_json(subshift, a["point"]), Fraction(a["mass"])) for a in data["atoms"]
        )


def r_m(points: Sequence[Point]) -> DiscreteMeasure:
    """The empirical measure ``(1/m) sum delta_{x_i}``."""
    if not points:
        raise MeasureError("r_m needs at least one point")
    w = Fraction(1, len(points))
    return DiscreteMeasure.from_pairs((p, w) for p in points)


def in_m_n(mu: DiscreteMeasure, n: int | None) -> bool:
    """Membership in ``M_n``; ``n=None`` stands for the whole measure space."""
    if n is None:
        return True
    return all((m * n).denominator == 1 for m in mu.masses)


def measure_of(mu: DiscreteMeasure, a: ClopenSet) -> Fraction:
    if mu.subshift != a.subshift:
        raise SubshiftError("measure and set live in different subshifts")
    return sum((m for p, m in mu.atoms if a.contains_point(p)), Fraction(0))


def pushforward(mu: DiscreteMeasure) -> DiscreteMeasure:
    return DiscreteMeasure.from_pairs((shift(p), m) for p, m in mu.atoms)


def pushforward_iter(mu: DiscreteMeasure, j: int) -> DiscreteMeasure:
    for _ in range(j):
        mu = pushforward(mu)
    return mu


# ---------------------------------------------------------------------------
# Prohorov metric


def _scaled_instance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[int, list[int], list[int], list[list[int]]]:
    """Masses and distances as integers over one common denominator.

    Distances are ``0`` or ``2**-k``, so scaling by ``lcm(mass denominators)
    * 2**K`` for the largest ``K`` turns every quantity into an integer and
    the algorithms below run without fractions.
    """
    if mu.subshift != nu.subshift:
        raise SubshiftError("measures live in different subshifts")
    ks = [[first_difference(x, y) for y in nu.support] for x in mu.support]
    K = max((k for row in ks for k in row if k is not None), default=0)
    den = math.lcm(*(m.denominator for m in mu.masses + nu.masses))
    scale = den << K
    mu_i = [m.numerator * (scale // m.denominator) for m in mu.masses]
    nu_i = [m.numerator * (scale // m.denominator) for m in nu.masses]
    D = [[0 if k is None else den << (K - k) for k in row] for row in ks]
    return scale, mu_i, nu_i, D


def _one_sided_by_subsets(mu_m: list[int], nu_m: list[int], D: list[list[int]], total: int) -> int:
    """sup over nonempty A in supp(mu) of inf{d : mu(A) <= nu(A^d) + d}, scaled."""
    a = len(mu_m)
    dist: list = [None] * (1 << a)
    mass = [0] * (1 << a)
    worst = 0
    for mask in range(1, 1 << a):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        if rest:
            dist[mask] = [min(p, q) for p, q in zip(dist[rest], D[i])]
            mass[mask] = mass[rest] + mu_m[i]
        else:
            dist[mask] = D[i]
            mass[mask] = mu_m[i]
        muA = mass[mask]
        # nu(A^d) is a left-continuous step function of d with jumps just
        # after each value d(y, A); on (b_i, b_{i+1}] the bound is linear.
        best = muA
        cum = 0
        for b, m in sorted(zip(dist[mask], nu_m)):
            cum += m
            cand = max(b, muA - cum)
            if cand < best:
                best = cand
        if best > worst:
            worst = best
            if worst >= total:
                break
    return worst


def prohorov_subset(mu: DiscreteMeasure, nu: DiscreteMeasure, symmetric: bool = False) -> Fraction:
    """Exact Prohorov distance by enumerating subsets of the support.

    The returned value is the infimum of admissible ``delta``; it need not be
    admissible itself (strict neighborhoods).  With ``symmetric=True`` both
    inequalities of the two-sided definition are imposed.
    """
    scale, mu_i, nu_i, D = _scaled_instance(mu, nu)
    value = _one_sided_by_subsets(mu_i, nu_i, D, scale)
    if symmetric:
        Dt = [list(col) for col in zip(*D)]
        value = max(value, _one_sided_by_subsets(nu_i, mu_i, Dt, scale))
    return Fraction(min(value, scale), scale)


def _max_flow(supply: list[int], demand: list[int], edges: list[tuple[int, int]]) -> int:
    """Edmonds-Karp on source -> supply nodes -> demand nodes -> sink."""
    a, b = len(supply), len(demand)
    src, snk = a + b, a + b + 1
    big = sum(supply)  # no edge ever carries more than the total mass
    cap: dict[tuple[int, int], int] = {}
    adj: list[list[int]] = [[] for _ in range(a + b + 2)]

    def add(u: int, v: int, c: int) -> None:
        if (u, v) not in cap:
            cap[u, v] = 0
            cap[v, u] = 0
            adj[u].append(v)
            adj[v].append(u)
        cap[u, v] += c

    for i, m in enumerate(supply):
        add(src, i, m)
    for i, j in edges:
        add(i, a + j, big)
    for j, m in enumerate(demand):
        add(a + j, snk, m)
    for nbrs in adj:
        nbrs.sort()

    flow = 0
    while True:
        parent = {src: src}
        queue = deque([src])
        while queue and snk not in parent:
            u = queue.popleft()
            for v in adj[u]:
                if v not in parent and cap[u, v] > 0:
                    parent[v] = u
                    queue.append(v)
        if snk not in parent:
            return flow
        push = big
        v = snk
        while v != src:
            u = parent[v]
            push = min(push, cap[u, v])
            v = u
        v = snk
        while v != src:
            u = parent[v]
            cap[u, v] -= push
            cap[v, u] += push
            v = u
        flow += push


def prohorov_flow(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Fraction:
    """Exact Prohorov distance via coupling feasibility.

    For ``delta`` in ``(b_i, b_{i+1}]`` between consecutive distance values
    the admissible couplings use the edges with ``d(x, y) <= b_i``; the
    worst Hall deficiency there is ``1 - maxflow``.
    """
    scale, mu_i, nu_i, D = _scaled_instance(mu, nu)
    levels = sorted({0} | {d for row in D for d in row})
    best = scale
    for b in levels:
        if b >= best:
            break
        edges = [(i, j) for i, row in enumerate(D) for j, d in enumerate(row) if d <= b]
        deficiency = scale - _max_flow(mu_i, nu_i, edges)
        best = min(best, max(b, deficiency))
    return Fraction(best, scale)


prohorov_distance = prohorov_subset


# ---------------------------------------------------------------------------
# weak* neighborhoods


@dataclass(frozen=True)
class WNeighborhood:
    """``{nu : nu(U_i) > eta_i for every part}`` with disjoint nonempty ``U_i``."""

    parts: tuple[tuple[ClopenSet, Fraction], ...]

    def __post_init__(self) -> None:
        parts = tuple((u, _frac(e)) for u, e in self.parts)
        if not parts:
            raise MeasureError("need at least one part")
        for i, (u, eta) in enumerate(parts):
            if u.is_empty():
                raise MeasureError("parts must be nonempty")
            if eta <= 0:
                raise MeasureError("thresholds must be positive")
            for v, _ in parts[:i]:
                if not u.is_disjoint(v):
                    raise MeasureError("parts must be pairwise disjoint")
        if sum(e for _, e in parts) >= 1:
            raise MeasureError("thresholds must sum to less than 1")
        object.__setattr__(self, "parts", parts)

    def contains(self, nu: DiscreteMeasure) -> bool:
        return w_contains(self, nu)

    def to_json(self) -> dict:
        return {"parts": [{"set": u.to_json(), "eta": str(e)} for u, e in self.parts]}

    @classmethod
    def from_json(cls, subshift: Subshift, data: dict) -> WNeighborhood:
        return cls(tuple(
            (ClopenSet.from_json(subshift, p["set"]), Fraction(p["eta"])) for p in data["parts"]
        ))


def w_contains(W: WNeighborhood, nu: DiscreteMeasure) -> bool:
    return all(measure_of(nu, u) > eta for u, eta in W.parts)


def _closed_ball_radius(points: Sequence[Point], u: ClopenSet) -> Fraction:
    """Largest ``2**-k`` whose closed balls around ``points`` stay inside ``u``."""
    for k in range(u.L + 1):
        if all(ClopenSet.cylinder(u.subshift, p.prefix(k)) <= u for p in points):
            return Fraction(1, 2**k)
    raise AssertionError("points are not inside the set")


def w_robustness_radius(W: WNeighborhood, mu: DiscreteMeasure) -> Fraction:
    """A radius ``delta > 0`` with every ``nu``, ``d_P(nu, mu) < delta``, lying in ``W``."""
    if not w_contains(W, mu):
        raise MeasureError("measure is not in the neighborhood")
    radius = ONE
    for u, eta in W.parts:
        inside = [p for p in mu.support if u.contains_point(p)]
        slack = sum((mu.mass(p) for p in inside), Fraction(0)) - eta
        radius = min(radius, slack, _closed_ball_radius(inside, u))
    return radius


def basis_refine(mu: DiscreteMeasure, eps) -> WNeighborhood:
    """A neighborhood ``W`` with ``mu in W`` contained in the Prohorov ball of radius ``eps``.

    Uses ``delta = 3 eps / 4`` and the cylinders of the first window length
    ``L`` with ``2**-L < delta`` that carry mass of ``mu``.
    """
    eps = _frac(eps)
    if eps <= 0:
        raise MeasureError("eps must be positive")
    delta = min(eps, ONE) * 3 / 4
    L = 1
    while Fraction(1, 2**L) >= delta:
        L += 1
    S = mu.subshift
    charged: dict[str, Fraction] = {}
    for p, m in mu.atoms:
        w = p.prefix(L)
        charged[w] = charged.get(w, Fraction(0)) + m
    k = len(charged)
    parts = []
    for w in sorted(charged):
        mass = charged[w]
        eta = max(mass - delta / (4 * k), mass / 2)
        parts.append((ClopenSet(S, L, frozenset({w})), eta))
    return WNeighborhood(tuple(parts))


@dataclass(frozen=True)
class LocallyConstant:
    """A function of the first ``L`` symbols, given as a value table."""

    subshift: Subshift = field(repr=False)
    L: int
    values: Mapping[str, Fraction] = field(hash=False)

    def __post_init__(self) -> None:
        vals = {w: _frac(v) for w, v in self.values.items()}
        missing = set(self.subshift.words(self.L)) - set(vals)
        if missing:
            raise MeasureError(f"test function undefined on {sorted(missing)[:3]}")
        object.__setattr__(self, "values", vals)

    def __call__(self, x: Point) -> Fraction:
        return self.values[x.prefix(self.L)]

    @classmethod
    def indicator(cls, a: ClopenSet) -> LocallyConstant:
        return cls(a.subshift, a.L, {w: Fraction(int(w in a.words)) for w in a.subshift.words(a.L)})

    @classmethod
    def constant(cls, subshift: Subshift, c) -> LocallyConstant:
        return cls(subshift, 1, {w: _frac(c) for w in subshift.words(1)})


def integrate(f: LocallyConstant, nu: DiscreteMeasure) -> Fraction:
    return sum((m * f(p) for p, m in nu.atoms), Fraction(0))


@dataclass(frozen=True)
class VNeighborhood:
    center: DiscreteMeasure
    tests: tuple[LocallyConstant, ...]
    eps: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", _frac(self.eps))
        object.__setattr__(self, "tests", tuple(self.tests))
        if self.eps <= 0:
            raise MeasureError("eps must be positive")

    def contains(self, nu: DiscreteMeasure) -> bool:
        return v_contains(self, nu)


def v_contains(V: VNeighborhood, nu: DiscreteMeasure) -> bool:
    return all(abs(integrate(f, nu) - integrate(f, V.center)) < V.eps for f in V.tests)


def empirical_round(mu: DiscreteMeasure, n: int) -> DiscreteMeasure:
    """Round masses to multiples of ``1/n`` by largest remainder (ties: atom order)."""
    if n < len(mu):
        raise MeasureError("n must be at least the support size")
    counts = [(m * n).numerator // (m * n).denominator for m in mu.masses]
    rema = [m * n - c for m, c in zip(mu.masses, counts)]
    order = sorted(range(len(mu)), key=lambda i: (-rema[i], i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return DiscreteMeasure.from_pairs(
        (p, Fraction(c, n)) for p, c in zip(mu.support, counts) if c
    )


def total_variation(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Fraction:
    pts = set(mu.support) | set(nu.support)
    return sum((abs(mu.mass(p) - nu.mass(p)) for p in pts), Fraction(0)) / 2
