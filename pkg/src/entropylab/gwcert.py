"""Finite certificates linking measure-level independence to cover entropy.

Pipeline: a minimal subcover ``A_1..A_k`` of the join cover, its
disjointification ``B_1..B_k``, a 0/1 matrix ``M`` with ``B_i`` inside
``U_{t_i0} n T^-1 U_{t_i1} n ...``, and the linear map ``r -> r M`` from
``l1^k`` to ``l_inf^m``.  Witness measures for all patterns on ``J`` map to
pairwise separated points.  Also: lifting pairs of weak* opens to product
boxes of clopen sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from .covers import JoinCover, disjointify, is_standard_cover, min_subcover
from .independence import (
    CertificateError,
    IndependenceCertificate,
    lift_product_certificate,
    realize_pattern,
)
from .measures import DiscreteMeasure, WNeighborhood, in_m_n, measure_of, r_m
from .shiftspace import ClopenSet, Point, preimage_clopen, union_all

HALF = Fraction(1, 2)
NINE_TENTHS = Fraction(9, 10)
CLIQUE_GUARD = 2**12


class NormContractViolation(ArithmeticError):
    pass


@dataclass(frozen=True)
class ZeroOneMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(r) for r in self.rows)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("matrix must be nonempty and rectangular")
        if any(v not in (0, 1) for r in rows for v in r):
            raise ValueError("entries must be 0 or 1")
        object.__setattr__(self, "rows", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.rows)


def _fits(block: ClopenSet, u: ClopenSet, j: int) -> bool:
    # block window is at least j + L
    L = u.L
    b = block.at_window(max(block.L, j + L))
    return all(w[j : j + L] in u.words for w in b.words)


def build_matrix(J: JoinCover, subcover: Sequence[tuple[int, ...]], blocks: Sequence[ClopenSet]) -> ZeroOneMatrix:
    """Rows ``t_i`` with ``B_i`` inside ``U_{t_i,j}`` shifted back by ``j``, for all ``j``.

    When both cover sets fit at time ``j`` the subcover's own choice is used.
    """
    if len(subcover) != len(blocks):
        raise ValueError("one block per subcover vector")
    rows = []
    for t, block in zip(subcover, blocks):
        if block.is_empty():
            raise ValueError("blocks must be nonempty")
        row = []
        for j in range(J.depth):
            fits = [c for c in (0, 1) if _fits(block, J.base[c], j)]
            if not fits:
                raise AssertionError(f"block {t} fits neither cover set at time {j}")
            row.append(t[j] if t[j] in fits else fits[0])
        rows.append(tuple(row))
    M = ZeroOneMatrix(tuple(rows))
    for row, block in zip(M.rows, blocks):
        target = ClopenSet.full(block.subshift)
        for j, c in enumerate(row):
            target = target & preimage_clopen(J.base[c], j)
        if not block <= target:
            raise AssertionError("block inclusion failed")
    return M


def phi_apply(M: ZeroOneMatrix, r: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """``[r_1 ... r_k] M``, checking ``max |out| <= sum |r|``."""
    k, m = M.shape
    if len(r) != k:
        raise ValueError(f"expected {k} coefficients, got {len(r)}")
    out = tuple(sum((Fraction(r[i]) for i in range(k) if M.rows[i][j]), Fraction(0)) for j in range(m))
    if max((abs(v) for v in out), default=Fraction(0)) > sum(abs(Fraction(v)) for v in r):
        raise NormContractViolation("operator norm bound violated")
    return out


def measure_profile(mu: DiscreteMeasure, blocks: Sequence[ClopenSet]) -> tuple[Fraction, ...]:
    prof = tuple(measure_of(mu, b) for b in blocks)
    if sum(prof) != 1 or any(v < 0 for v in prof):
        raise ValueError("blocks do not partition the space")
    return prof


@dataclass
class SeparationReport:
    points: list[tuple[Fraction, ...]]
    eps: Fraction
    separated_count: int
    pairs_checked: int
    chosen: list[int] = field(default_factory=list)

    @property
    def witness_exponent(self) -> float:
        m = len(self.points[0]) if self.points else 1
        return math.log2(self.separated_count) / m if self.separated_count else 0.0


def _sup_distance(p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    return max((abs(a - b) for a, b in zip(p, q)), default=Fraction(0))


def _max_clique(n: int, adj: list[int]) -> list[int]:
    """Maximum clique by branch and bound with a greedy colouring bound."""
    best: list[int] = []

    def colour_order(cand: int) -> list[tuple[int, int]]:
        order = []
        colour = 0
        uncoloured = cand
        while uncoloured:
            colour += 1
            avail = uncoloured
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                order.append((v, colour))
                uncoloured &= ~low
                avail &= ~low & ~adj[v]
        return order

    def expand(clique: list[int], cand: int) -> None:
        nonlocal best
        order = colour_order(cand)
        for v, colour in reversed(order):
            if len(clique) + colour <= len(best):
                return
            clique.append(v)
            nxt = cand & adj[v]
            if nxt:
                expand(clique, nxt)
            elif len(clique) > len(best):
                best = list(clique)
            clique.pop()
            cand &= ~(1 << v)

    if n:
        expand([], (1 << n) - 1)
    return sorted(best)


def separation_count(
    points: Sequence[Sequence[Fraction]], eps=HALF, mode: str = "exact", guard: int = CLIQUE_GUARD
) -> SeparationReport:
    """Size of the largest subfamily with pairwise sup-distance at least ``eps``."""
    eps = Fraction(eps)
    pts = [tuple(Fraction(v) for v in p) for p in points]
    n = len(pts)
    if mode == "exact":
        if n > guard:
            raise RuntimeError(f"{n} points exceed the exact separation guard {guard}")
        adj = [0] * n
        pairs = 0
        for i in range(n):
            for j in range(i + 1, n):
                pairs += 1
                if _sup_distance(pts[i], pts[j]) >= eps:
                    adj[i] |= 1 << j
                    adj[j] |= 1 << i
        chosen = _max_clique(n, adj)
        return SeparationReport(pts, eps, len(chosen), pairs, chosen)
    if mode == "greedy":
        chosen: list[int] = []
        pairs = 0
        for i, p in enumerate(pts):
            ok = True
            for c in chosen:
                pairs += 1
                if _sup_distance(p, pts[c]) < eps:
                    ok = False
                    break
            if ok:
                chosen.append(i)
        return SeparationReport(pts, eps, len(chosen), pairs, chosen)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class PipelineReport:
    m: int
    J: tuple[int, ...]
    k_m: int
    separated_count: int
    witness_exponent: Fraction
    subcover: list[tuple[int, ...]]
    matrix: ZeroOneMatrix
    images: dict[tuple[int, ...], tuple[Fraction, ...]]
    sandwich_checks: int
    norm_checks: int
    min_pair_gap: Fraction | None

    @property
    def bound_consistency(self) -> dict:
        return {
            "log2_k_m": math.log2(self.k_m),
            "log2_separated_count": math.log2(self.separated_count),
            "log2_k_m_over_m": math.log2(self.k_m) / self.m,
        }

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "J": list(self.J),
            "k_m": self.k_m,
            "separated_count": self.separated_count,
            "witness_exponent": str(self.witness_exponent),
            "subcover": ["".join(map(str, t)) for t in self.subcover],
            "matrix": ["".join(map(str, r)) for r in self.matrix.rows],
            "sandwich_checks": self.sandwich_checks,
            "norm_checks": self.norm_checks,
            "min_pair_gap": None if self.min_pair_gap is None else str(self.min_pair_gap),
            "bound_consistency": self.bound_consistency,
        }


def auto_witnesses(v0: ClopenSet, v1: ClopenSet, J: Sequence[int]) -> dict[tuple[int, ...], DiscreteMeasure]:
    """Dirac witnesses: the least point realizing each pattern on ``J``."""
    out = {}
    for sig in product((0, 1), repeat=len(J)):
        x = realize_pattern((v0, v1), dict(zip(J, sig)))
        if x is None:
            raise CertificateError("pattern not realizable", dict(zip(J, sig)))
        out[sig] = DiscreteMeasure.dirac(x)
    return out


def entropy_witness_pipeline(
    u0: ClopenSet,
    u1: ClopenSet,
    v0: ClopenSet,
    v1: ClopenSet,
    J: Sequence[int],
    m: int,
    witnesses: dict[tuple[int, ...], DiscreteMeasure] | None = None,
    eps=HALF,
    threshold=NINE_TENTHS,
) -> PipelineReport:
    """Run the separation argument on a finite window of length ``m``.

    ``witnesses[sigma]`` must give ``V_sigma(j)`` mass above ``threshold`` at
    time ``j`` for every ``j`` in ``J``.  Checks the block sandwich at every
    ``s`` in ``J`` and pairwise ``eps``-separation of all images.
    """
    eps, threshold = Fraction(eps), Fraction(threshold)
    J = tuple(sorted(set(J)))
    if J and (J[0] < 0 or J[-1] >= m):
        raise ValueError("J must lie inside [0, m)")
    if not is_standard_cover(u0, u1):
        raise ValueError("(U0, U1) is not a standard cover")
    if v0.is_empty() or v1.is_empty():
        raise ValueError("V0 and V1 must be nonempty")
    # clopen sets are their own closures
    if not v0 <= u0 - u1.closure() or not v1 <= u1 - u0.closure():
        raise ValueError("need V0 inside U0 minus closure(U1) and V1 inside U1 minus closure(U0)")
    if witnesses is None:
        witnesses = auto_witnesses(v0, v1, J)

    pre_v = {(c, s): preimage_clopen(v, s) for c, v in ((0, v0), (1, v1)) for s in J}
    for sig in product((0, 1), repeat=len(J)):
        mu = witnesses.get(sig)
        if mu is None:
            raise CertificateError("missing witness", dict(zip(J, sig)))
        for s, c in zip(J, sig):
            if not measure_of(mu, pre_v[c, s]) > threshold:
                raise CertificateError(f"witness mass at time {s} is not above {threshold}",
                                       dict(zip(J, sig)), s)

    join = JoinCover((u0, u1), m)
    sub = min_subcover(join)
    blocks = disjointify([join.element(t) for t in sub.vectors])
    M = build_matrix(join, sub.vectors, blocks)

    sandwich = 0
    for s in J:
        middle = union_all([b for b, row in zip(blocks, M.rows) if row[s] == 1], u0.subshift)
        if not (pre_v[1, s] <= middle <= preimage_clopen(u1, s)):
            raise AssertionError(f"sandwich inclusion fails at s={s}")
        sandwich += 1

    images = {}
    norm_checks = 0
    for sig, mu in sorted(witnesses.items()):
        if len(sig) != len(J):
            continue
        images[sig] = phi_apply(M, measure_profile(mu, blocks))
        norm_checks += 1

    keys = sorted(images)
    gap = None
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            d = _sup_distance(images[keys[a]], images[keys[b]])
            if d < eps:
                raise AssertionError(f"images of {keys[a]} and {keys[b]} are not separated")
            gap = d if gap is None else min(gap, d)
    rep = separation_count([images[k] for k in keys], eps)
    return PipelineReport(
        m=m,
        J=J,
        k_m=sub.size,
        separated_count=rep.separated_count,
        witness_exponent=Fraction(len(J), m),
        subcover=list(sub.vectors),
        matrix=M,
        images=images,
        sandwich_checks=sandwich,
        norm_checks=norm_checks,
        min_pair_gap=gap,
    )


# ---------------------------------------------------------------------------
# lifting weak* opens to product boxes


@dataclass
class ProductLift:
    m: int
    boxes: tuple[tuple[ClopenSet, ...], tuple[ClopenSet, ...]]
    witnesses: tuple[DiscreteMeasure, DiscreteMeasure]
    sizes: tuple[int, int]


class SearchBudgetExceeded(RuntimeError):
    pass


def minimal_counts(W: WNeighborhood, t: int) -> list[int] | None:
    """Fewest points per part for ``t``-point empirical measures in ``W``, or None."""
    need = [math.floor(eta * t) + 1 for _, eta in W.parts]
    return need if sum(need) <= t else None


def _witness_points(W: WNeighborhood, t: int) -> list[Point]:
    need = minimal_counts(W, t)
    if need is None:
        raise SearchBudgetExceeded(f"W has no {t}-point empirical member")
    S = W.parts[0][0].subshift
    pts: list[Point] = []
    for (u, _), r in zip(W.parts, need):
        pts.extend([u.representative()] * r)
    outside = union_all([u for u, _ in W.parts], S).complement()
    filler = outside.representative() if not outside.is_empty() else pts[0]
    pts.extend([filler] * (t - len(pts)))
    return pts


def _neighborhoods(W: WNeighborhood, pts: Sequence[Point]) -> list[ClopenSet]:
    S = pts[0].subshift
    out = []
    for y in pts:
        for u, _ in W.parts:
            if u.contains_point(y):
                out.append(ClopenSet.cylinder(S, y.prefix(u.L)))
                break
        else:
            out.append(ClopenSet.full(S))
    return out


def lift_open_to_product(
    W0: WNeighborhood, W1: WNeighborhood, n: int | None, budget: int = 64
) -> ProductLift:
    """``m`` and boxes ``U_{k,1..m}`` with ``r_m(x_1..x_m)`` in ``W_k`` (and in ``M_n``)
    whenever ``x_i`` lies in ``U_{k,i}``.

    Finite ``n`` gives ``m = n``.  For ``n=None`` the smallest witness sizes
    ``t_0, t_1`` are searched up to ``budget`` and ``m = t_0 t_1``, each
    neighborhood repeated ``t_1`` (resp. ``t_0``) times.
    """
    Ws = (W0, W1)
    if n is not None:
        if n < 1:
            raise ValueError("n must be positive")
        pts = [_witness_points(W, n) for W in Ws]
        boxes = tuple(tuple(_neighborhoods(W, p)) for W, p in zip(Ws, pts))
        return ProductLift(n, boxes, (r_m(pts[0]), r_m(pts[1])), (n, n))
    sizes = []
    for W in Ws:
        t = next((t for t in range(1, budget + 1) if minimal_counts(W, t) is not None), None)
        if t is None:
            raise SearchBudgetExceeded("no empirical member found within the budget")
        sizes.append(t)
    t0, t1 = sizes
    pts = [_witness_points(W, t) for W, t in zip(Ws, sizes)]
    nb = [_neighborhoods(W, p) for W, p in zip(Ws, pts)]
    boxes0 = tuple(a for a in nb[0] for _ in range(t1))
    boxes1 = tuple(a for a in nb[1] for _ in range(t0))
    return ProductLift(t0 * t1, (boxes0, boxes1), (r_m(pts[0]), r_m(pts[1])), (t0, t1))


@dataclass(frozen=True)
class RestrictedW:
    """``W`` intersected with ``M_n`` (``n=None``: no restriction)."""

    W: WNeighborhood
    n: int | None = None

    def contains(self, mu: DiscreteMeasure) -> bool:
        return in_m_n(mu, self.n) and self.W.contains(mu)

    def to_json(self) -> dict:
        return {"W": self.W.to_json(), "n": self.n}


def lifted_independence(lift: ProductLift, W0: WNeighborhood, W1: WNeighborhood,
                        n: int | None, I: Sequence[int], horizon: int) -> IndependenceCertificate:
    """Measure-level certificate for ``(W0 n M_n, W1 n M_n)`` from product independence."""
    opens = (RestrictedW(W0, n), RestrictedW(W1, n))
    return lift_product_certificate(lift.boxes[0], lift.boxes[1], opens, I, horizon)


__all__ = [
    "ZeroOneMatrix", "build_matrix", "phi_apply", "measure_profile", "SeparationReport",
    "separation_count", "PipelineReport", "entropy_witness_pipeline", "auto_witnesses",
    "ProductLift", "lift_open_to_product", "lifted_independence", "RestrictedW",
]
