"""Two-set open covers, their joins ``U v T^-1 U v ... v T^-(n-1) U``, and N(U).

A join element is indexed by a choice vector ``t`` in ``{0,1}^n`` and equals
``E_t = intersection of T^-j(U_{t_j})``.  Minimum subcover sizes are found by
exact set cover over the admissible words of length ``n + L - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .shiftspace import ClopenSet, Subshift, union_all

DEFAULT_UNIVERSE_GUARD = 2**20
DEFAULT_SEARCH_GUARD = 2**14

Vector = tuple[int, ...]


class InstanceTooLarge(RuntimeError):
    """Raised when an exact computation would exceed its guard."""


def is_standard_cover(u0: ClopenSet, u1: ClopenSet) -> bool:
    """Both sets proper (non-dense, as they are closed) and together everything."""
    return (u0 | u1).is_full() and not u0.is_full() and not u1.is_full()


@dataclass(frozen=True)
class Cover:
    elements: tuple[ClopenSet, ...]

    def __post_init__(self) -> None:
        els = tuple(self.elements)
        if not els:
            raise ValueError("a cover needs elements")
        if any(e.is_empty() for e in els):
            raise ValueError("cover elements must be nonempty")
        if not union_all(els, els[0].subshift).is_full():
            raise ValueError("elements do not cover the space")
        object.__setattr__(self, "elements", els)


@dataclass(frozen=True)
class JoinCover:
    """The join of ``depth`` shifted copies of the two-element cover ``base``."""

    base: tuple[ClopenSet, ClopenSet]
    depth: int

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        u0, u1 = self.base
        Cover((u0, u1))
        L = max(u0.L, u1.L)
        object.__setattr__(self, "base", (u0.at_window(L), u1.at_window(L)))

    @property
    def subshift(self) -> Subshift:
        return self.base[0].subshift

    @property
    def L(self) -> int:
        return self.base[0].L

    @property
    def window(self) -> int:
        return self.depth + self.L - 1

    def options(self, word: str) -> list[tuple[int, ...]]:
        """For each time j, the choices c with ``word[j:j+L]`` in ``U_c``."""
        L = self.L
        u0, u1 = self.base[0].words, self.base[1].words
        out = []
        for j in range(self.depth):
            w = word[j : j + L]
            out.append(tuple(c for c, us in enumerate((u0, u1)) if w in us))
        return out

    def covers_word(self, t: Vector, word: str) -> bool:
        L = self.L
        return all(word[j : j + L] in self.base[t[j]].words for j in range(self.depth))

    def element(self, t: Vector) -> ClopenSet:
        """``E_t`` as a clopen set at window ``depth + L - 1``."""
        if len(t) != self.depth:
            raise ValueError("choice vector has the wrong length")
        words = frozenset(w for w in self.subshift.words(self.window) if self.covers_word(t, w))
        return ClopenSet(self.subshift, self.window, words)


@dataclass
class SubcoverResult:
    size: int
    vectors: list[Vector]
    exact: bool


def _greedy_cover(universe: int, sets: list[int], target: int | None = None) -> list[int]:
    uncovered = (1 << universe) - 1 if target is None else target
    chosen = []
    while uncovered:
        best = max(range(len(sets)), key=lambda i: (bin(sets[i] & uncovered).count("1"), -i))
        chosen.append(best)
        uncovered &= ~sets[best]
    return chosen


def _bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _reduce(sets: list[int], rest: int, live: int, chosen: list[int]) -> tuple[int, int]:
    """Apply forced picks and dominance rules until nothing changes.

    Returns the still uncovered elements and the still useful sets;
    ``chosen`` is extended in place.
    """
    changed = True
    while changed and rest:
        changed = False
        cov = {e: 0 for e in _bits(rest)}
        for i in _bits(live):
            for e in _bits(sets[i] & rest):
                cov[e] |= 1 << i
        forced = sorted({next(_bits(c)) for c in cov.values() if _popcount(c) == 1})
        if forced:
            for i in forced:
                chosen.append(i)
                rest &= ~sets[i]
                live &= ~(1 << i)
            changed = True
            continue
        # a set inside another one is never needed
        order = sorted(_bits(live), key=lambda i: (-_popcount(sets[i] & rest), i))
        kept: list[int] = []
        for i in order:
            si = sets[i] & rest
            if not si or any(si & ~(sets[j] & rest) == 0 for j in kept):
                live &= ~(1 << i)
                changed = True
            else:
                kept.append(i)
        # an element covered whenever another one is can be dropped
        if len(cov) <= 4096:
            elems = sorted(cov, key=lambda e: (_popcount(cov[e]), e))
            for a, e in enumerate(elems):
                if not rest >> e & 1:
                    continue
                for f in elems[a + 1:]:
                    if rest >> f & 1 and cov[e] & ~cov[f] == 0:
                        rest &= ~(1 << f)
                        changed = True
    return rest, live


def exact_set_cover(universe: int, sets: list[int], search_guard: int = DEFAULT_SEARCH_GUARD) -> list[int]:
    """Minimum-size cover of ``range(universe)`` by bitmask ``sets``.

    The instance is first shrunk by forced picks (sole coverers) and set and
    element dominance; the rest is solved by branch and bound, branching on
    the element with the fewest coverers.  Bounds: greedy for the incumbent
    and a packing of elements with pairwise disjoint coverer sets below.
    """
    full = (1 << universe) - 1
    if universe == 0:
        return []
    union = 0
    for s in sets:
        union |= s
    if union & full != full:
        raise ValueError("some element is not covered by any set")

    forced: list[int] = []
    rest, live = _reduce(sets, full, (1 << len(sets)) - 1, forced)
    if not rest:
        return sorted(forced)
    live_idx = list(_bits(live))
    if len(live_idx) > search_guard:
        raise InstanceTooLarge(f"{len(live_idx)} candidate sets exceed the search guard {search_guard}")

    elems = list(_bits(rest))
    cov = {e: 0 for e in elems}
    for i in live_idx:
        for e in _bits(sets[i] & rest):
            cov[e] |= 1 << i

    greedy = _greedy_cover(universe, [sets[i] for i in live_idx], rest)
    best = [live_idx[g] for g in greedy]
    best_len = len(best)

    def lower_bound(uncovered: int, allowed: int) -> int:
        used, count = 0, 0
        for e in sorted(_bits(uncovered), key=lambda e: _popcount(cov[e] & allowed)):
            c = cov[e] & allowed
            if not c & used:
                used |= c
                count += 1
        return count

    def search(uncovered: int, allowed: int, chosen: list[int]) -> None:
        nonlocal best, best_len
        if not uncovered:
            if len(chosen) < best_len:
                best, best_len = list(chosen), len(chosen)
            return
        if len(chosen) + lower_bound(uncovered, allowed) >= best_len:
            return
        pick = min(_bits(uncovered), key=lambda e: (_popcount(cov[e] & allowed), e))
        options = sorted(_bits(cov[pick] & allowed), key=lambda i: (-_popcount(sets[i] & uncovered), i))
        for i in options:
            chosen.append(i)
            search(uncovered & ~sets[i], allowed & ~(1 << i), chosen)
            chosen.pop()
            allowed &= ~(1 << i)

    search(rest, live, [])
    return sorted(forced + best)


def _join_instance(J: JoinCover, universe_guard: int) -> tuple[list[str], list[Vector], list[int]]:
    S = J.subshift
    n_words = S.word_count(J.window)
    if n_words > universe_guard:
        raise InstanceTooLarge(f"{n_words} words exceed the universe guard {universe_guard}")
    words = S.words(J.window)
    masks: dict[Vector, int] = {}
    for idx, w in enumerate(words):
        opts = J.options(w)
        count = math.prod(len(o) for o in opts)
        if count > 4 * universe_guard:
            raise InstanceTooLarge("too many choice vectors cover a single word")
        for t in product(*opts):
            masks[t] = masks.get(t, 0) | (1 << idx)
    vectors = sorted(masks)
    return list(words), vectors, [masks[t] for t in vectors]


def _single_vector_cover(J: JoinCover) -> Vector | None:
    # a lone E_t is everything only if some U_c is
    for c in (0, 1):
        if J.base[c].is_full():
            return (c,) * J.depth
    return None


def min_subcover(
    J: JoinCover,
    exact: bool = True,
    universe_guard: int = DEFAULT_UNIVERSE_GUARD,
    search_guard: int = DEFAULT_SEARCH_GUARD,
) -> SubcoverResult:
    """Smallest set of choice vectors whose join elements cover the space."""
    t = _single_vector_cover(J)
    if t is not None:
        return SubcoverResult(1, [t], True)
    words, vectors, masks = _join_instance(J, universe_guard)
    if exact:
        picked = exact_set_cover(len(words), masks, search_guard)
    else:
        picked = sorted(_greedy_cover(len(words), masks))
    chosen = [vectors[i] for i in picked]
    return SubcoverResult(len(chosen), chosen, exact)


def min_subcover_size(J: JoinCover, **kw) -> int:
    return min_subcover(J, **kw).size


@dataclass(frozen=True)
class ProfileRow:
    n: int
    N: int
    rate: float  # log2(N) / n


@dataclass
class EntropyProfile:
    rows: list[ProfileRow]

    @property
    def fekete_estimate(self) -> float:
        """``min_n log2(N_n)/n``: an upper bound converging to the cover entropy."""
        return min(r.rate for r in self.rows)

    @property
    def last_rate(self) -> float:
        return self.rows[-1].rate


def cover_entropy_profile(u0: ClopenSet, u1: ClopenSet, n_max: int, exact: bool = True, **kw) -> EntropyProfile:
    rows = []
    for n in range(1, n_max + 1):
        N = min_subcover_size(JoinCover((u0, u1), n), exact=exact, **kw)
        rows.append(ProfileRow(n, N, math.log2(N) / n))
    return EntropyProfile(rows)


def disjointify(sets: Sequence[ClopenSet]) -> list[ClopenSet]:
    """``B_i = A_i minus (A_1 u ... u A_{i-1})`` for a covering list ``A``.

    Every ``B_i`` is nonempty when the list is a minimal subcover; an empty
    block means the input was not minimal and raises.
    """
    if not sets:
        raise ValueError("empty cover")
    S = sets[0].subshift
    if not union_all(sets, S).is_full():
        raise ValueError("sets do not cover the space")
    blocks = []
    seen = ClopenSet.empty(S)
    for i, a in enumerate(sets):
        b = a - seen
        if b.is_empty():
            raise ValueError(f"block {i} is empty: the subcover is not minimal")
        blocks.append(b)
        seen = seen | a
    return blocks


def join_blocks(J: JoinCover, vectors: Sequence[Vector]) -> list[ClopenSet]:
    return disjointify([J.element(t) for t in vectors])
