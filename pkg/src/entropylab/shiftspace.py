"""One-sided subshifts of finite type, eventually periodic points and clopen sets.

Symbols are single characters ``'0'..'9'`` then ``'a'..'z'``, so words are
plain strings.  A subshift is given by an alphabet size and a finite set of
forbidden words; points are sequences ``preperiod + period*inf``.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Iterable, Iterator

SYMBOLS = "0123456789abcdefghijklmnopqrstuvwxyz"


class SubshiftError(ValueError):
    """Invalid subshift, point or clopen-set data."""


@dataclass(frozen=True)
class Subshift:
    """The one-sided shift space over ``alphabet_size`` symbols avoiding ``forbidden``.

    Only words that occur in some infinite admissible sequence belong to the
    language; dead-end words are pruned.  Construction fails for the empty
    subshift and when the shift map is not onto.
    """

    alphabet_size: int
    forbidden: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not 1 <= self.alphabet_size <= len(SYMBOLS):
            raise SubshiftError(f"alphabet size must be in 1..{len(SYMBOLS)}")
        forbidden = frozenset(self.forbidden)
        object.__setattr__(self, "forbidden", forbidden)
        for w in forbidden:
            if not w or any(c not in self.alphabet for c in w):
                raise SubshiftError(f"bad forbidden word {w!r}")
        if not self.states:
            raise SubshiftError("subshift is empty")
        orphans = [u for u in sorted(self.states) if not self.predecessors(u)]
        if orphans:
            raise SubshiftError(
                f"shift is not surjective: word {orphans[0]!r} has no left extension"
            )

    @classmethod
    def full(cls, k: int = 2) -> Subshift:
        return cls(k, frozenset())

    @classmethod
    def golden_mean(cls) -> Subshift:
        return cls(2, frozenset({"11"}))

    @property
    def alphabet(self) -> str:
        return SYMBOLS[: self.alphabet_size]

    @property
    def memory(self) -> int:
        return max((len(w) for w in self.forbidden), default=1) - 1

    @property
    def state_length(self) -> int:
        """Length of the words used as automaton states (at least 1)."""
        return max(self.memory, 1)

    def avoids(self, word: str) -> bool:
        """True if ``word`` contains no forbidden factor."""
        return not any(f in word for f in self.forbidden)

    @cached_property
    def states(self) -> frozenset[str]:
        """Words of length ``state_length`` that start some infinite admissible path."""
        s = self.state_length
        alive = {"".join(p) for p in product(self.alphabet, repeat=s)}
        alive = {u for u in alive if self.avoids(u)}
        changed = True
        while changed:
            changed = False
            for u in list(alive):
                if not any(self.avoids(u + a) and (u + a)[1:] in alive for a in self.alphabet):
                    alive.discard(u)
                    changed = True
        return frozenset(alive)

    @cached_property
    def _succ(self) -> dict[str, tuple[str, ...]]:
        return {
            u: tuple(a for a in self.alphabet if self.avoids(u + a) and (u + a)[1:] in self.states)
            for u in self.states
        }

    def successors(self, state: str) -> tuple[str, ...]:
        """Symbols that may follow a word ending in ``state``."""
        return self._succ.get(state, ())

    def predecessors(self, state: str) -> tuple[str, ...]:
        return tuple(
            a for a in self.alphabet
            if (a + state)[:-1] in self.states and self.avoids(a + state)
        )

    def is_admissible(self, word: str) -> bool:
        """True if ``word`` occurs at the start of some point of the subshift."""
        s = self.state_length
        if any(c not in self.alphabet for c in word):
            return False
        if len(word) < s:
            return any(u.startswith(word) for u in self.states)
        return self.avoids(word) and word[-s:] in self.states

    @lru_cache(maxsize=64)
    def words(self, n: int) -> tuple[str, ...]:
        """All admissible words of length ``n`` in lexicographic order."""
        if n < 0:
            raise ValueError("negative word length")
        s = self.state_length
        if n <= s:
            return tuple(sorted({u[:n] for u in self.states}))
        out = []
        for w in self.words(n - 1):
            for a in self.successors(w[-s:]):
                out.append(w + a)
        return tuple(sorted(out))

    def word_count(self, n: int) -> int:
        """Number of admissible words of length ``n``, by transfer counting."""
        if n < 1:
            raise ValueError("n must be positive")
        s = self.state_length
        if n <= s:
            return len({u[:n] for u in self.states})
        counts = {u: 1 for u in self.states}
        for _ in range(n - s):
            nxt = dict.fromkeys(self.states, 0)
            for u, c in counts.items():
                for a in self.successors(u):
                    nxt[(u + a)[1:]] += c
            counts = nxt
        return sum(counts.values())

    def has_two_points(self) -> bool:
        """Whether the space has at least two points (so standard covers exist)."""
        return len(self.states) >= 2

    def shortest_path(self, src: str, dst: str) -> str | None:
        """Shortest nonempty symbol string leading from state ``src`` back to ``dst``."""
        s = self.state_length
        seen = {}
        queue = deque()
        for a in self.successors(src):
            v = (src + a)[-s:]
            if v not in seen:
                seen[v] = a
                queue.append(v)
        while queue:
            u = queue.popleft()
            if u == dst:
                return seen[u]
            for a in self.successors(u):
                v = (u + a)[-s:]
                if v not in seen:
                    seen[v] = seen[u] + a
                    queue.append(v)
        return None

    def least_tail(self, word: str) -> Point:
        """Extend an admissible word by the lexicographically least admissible tail."""
        s = self.state_length
        if len(word) < s:
            word = min(u for u in self.states if u.startswith(word))
        if not self.is_admissible(word):
            raise SubshiftError(f"{word!r} is not admissible")
        seen = {}
        w = word
        while True:
            state = w[-s:]
            if state in seen:
                i = seen[state]
                return Point(self, w[:i], w[i : len(w) - s])
            seen[state] = len(w) - s
            w += self.successors(state)[0]

    def to_json(self) -> dict:
        return {"alphabet": self.alphabet_size, "forbidden": sorted(self.forbidden)}

    @classmethod
    def from_json(cls, data: dict) -> Subshift:
        return cls(int(data["alphabet"]), frozenset(data.get("forbidden", [])))


def _primitive_root(word: str) -> str:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class Point:
    """The eventually periodic sequence ``preperiod + period + period + ...``.

    The stored representation is canonical (primitive period, shortest
    preperiod), so ``==`` on points is equality of sequences.
    """

    subshift: Subshift = field(repr=False)
    preperiod: str
    period: str

    def __post_init__(self) -> None:
        if not self.period:
            raise SubshiftError("period must be nonempty")
        pre, per = self.preperiod, _primitive_root(self.period)
        while pre and pre[-1] == per[-1]:
            pre, per = pre[:-1], per[-1] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)
        s = self.subshift.state_length
        probe = self.prefix(len(pre) + len(per) + s + 1)
        if any(c not in self.subshift.alphabet for c in probe) or not self.subshift.avoids(probe):
            raise SubshiftError(f"{self} is not in the subshift")

    def __str__(self) -> str:
        return f"{self.preperiod}({self.period})^inf"

    def __getitem__(self, i: int) -> str:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def prefix(self, n: int) -> str:
        pre, per = self.preperiod, self.period
        if n <= len(pre):
            return pre[:n]
        reps = (n - len(pre)) // len(per) + 1
        return (pre + per * reps)[:n]

    def sort_key(self) -> tuple[str, str]:
        return (self.preperiod, self.period)

    def to_json(self) -> dict:
        return {"preperiod": self.preperiod, "period": self.period}

    @classmethod
    def from_json(cls, subshift: Subshift, data: dict) -> Point:
        return cls(subshift, data.get("preperiod", ""), data["period"])


def _check_same(a: Subshift, b: Subshift) -> None:
    if a != b:
        raise SubshiftError("objects live in different subshifts")


def first_difference(x: Point, y: Point) -> int | None:
    """Smallest index where ``x`` and ``y`` differ, or None if equal."""
    _check_same(x.subshift, y.subshift)
    if x == y:
        return None
    bound = max(len(x.preperiod), len(y.preperiod)) + len(x.period) * len(y.period)
    px, py = x.prefix(bound), y.prefix(bound)
    for i in range(bound):
        if px[i] != py[i]:
            return i
    raise AssertionError("distinct canonical points agree on the comparison window")


def metric(x: Point, y: Point) -> Fraction:
    """``2**-k`` where ``k`` is the first index where the points differ; 0 if equal."""
    k = first_difference(x, y)
    return Fraction(0) if k is None else Fraction(1, 2**k)


def shift(x: Point) -> Point:
    if x.preperiod:
        return Point(x.subshift, x.preperiod[1:], x.period)
    return Point(x.subshift, "", x.period[1:] + x.period[0])


def shift_iter(x: Point, j: int) -> Point:
    for _ in range(j):
        x = shift(x)
    return x


def random_point(
    subshift: Subshift,
    rng: random.Random,
    prefix: str = "",
    max_preperiod: int = 6,
    max_period: int = 6,
) -> Point:
    """A random admissible point starting with ``prefix``."""
    s = subshift.state_length
    if prefix and not subshift.is_admissible(prefix):
        raise SubshiftError(f"{prefix!r} is not admissible")
    if len(prefix) < s:
        w = rng.choice(sorted(u for u in subshift.states if u.startswith(prefix)))
    else:
        w = prefix

    def walk(w: str, steps: int) -> str:
        for _ in range(steps):
            w += rng.choice(subshift.successors(w[-s:]))
        return w

    w = walk(w, rng.randint(0, max_preperiod))
    start = len(w)
    anchor = w[-s:]
    w = walk(w, rng.randint(0, max_period - 1))
    back = subshift.shortest_path(w[-s:], anchor)
    if back is None:
        # reducible system: fall back to the first repeated state of a walk
        seen = {}
        while w[-s:] not in seen:
            seen[w[-s:]] = len(w)
            w = walk(w, 1)
        i = seen[w[-s:]]
        return Point(subshift, w[:i], w[i:])
    w += back
    # w[start-s:start] == w[-s:], so the symbols after ``start`` repeat forever
    return Point(subshift, w[:start], w[start:])


@dataclass(frozen=True, eq=False)
class ClopenSet:
    """``{x : x[0:L] in words}``.

    Equality, hashing and ``<=`` are semantic: two sets are equal when they
    denote the same subset of the subshift, whatever their window lengths.
    A clopen set is closed, so its closure is itself and it is dense only if
    it is the whole space.
    """

    subshift: Subshift = field(repr=False)
    L: int
    words: frozenset[str]

    def __post_init__(self) -> None:
        if self.L < 1:
            raise SubshiftError("window length must be positive")
        words = frozenset(self.words)
        object.__setattr__(self, "words", words)
        for w in words:
            if len(w) != self.L or not self.subshift.is_admissible(w):
                raise SubshiftError(f"word {w!r} is not an admissible word of length {self.L}")

    @classmethod
    def cylinder(cls, subshift: Subshift, word: str) -> ClopenSet:
        """The set of points starting with ``word`` (empty words give the whole space)."""
        if not word:
            return cls.full(subshift)
        return cls(subshift, len(word), frozenset({word}) if subshift.is_admissible(word) else frozenset())

    @classmethod
    def full(cls, subshift: Subshift) -> ClopenSet:
        return cls(subshift, 1, frozenset(subshift.words(1)))

    @classmethod
    def empty(cls, subshift: Subshift) -> ClopenSet:
        return cls(subshift, 1, frozenset())

    def at_window(self, L: int) -> ClopenSet:
        """The same set described by words of length ``L >= self.L``."""
        if L < self.L:
            raise ValueError("can only refine to a longer window")
        if L == self.L:
            return self
        s = self.subshift.state_length
        layer = set(self.words)
        for n in range(self.L + 1, L + 1):
            nxt = set()
            for w in layer:
                if len(w) < s:
                    nxt.update(u[:n] for u in self.subshift.states if u.startswith(w))
                else:
                    nxt.update(w + a for a in self.subshift.successors(w[-s:]))
            layer = nxt
        return ClopenSet(self.subshift, L, frozenset(layer))

    def canonical(self) -> ClopenSet:
        """Equivalent set with the shortest possible window."""
        cur = self
        while cur.L > 1:
            shorter = frozenset(w[:-1] for w in cur.words)
            cand = ClopenSet(self.subshift, cur.L - 1, shorter)
            if cand.at_window(cur.L).words != cur.words:
                break
            cur = cand
        return cur

    def _common(self, other: ClopenSet) -> tuple[ClopenSet, ClopenSet]:
        _check_same(self.subshift, other.subshift)
        L = max(self.L, other.L)
        return self.at_window(L), other.at_window(L)

    def __and__(self, other: ClopenSet) -> ClopenSet:
        a, b = self._common(other)
        return ClopenSet(self.subshift, a.L, a.words & b.words)

    def __or__(self, other: ClopenSet) -> ClopenSet:
        a, b = self._common(other)
        return ClopenSet(self.subshift, a.L, a.words | b.words)

    def __sub__(self, other: ClopenSet) -> ClopenSet:
        a, b = self._common(other)
        return ClopenSet(self.subshift, a.L, a.words - b.words)

    def complement(self) -> ClopenSet:
        return ClopenSet.full(self.subshift) - self

    def __le__(self, other: ClopenSet) -> bool:
        a, b = self._common(other)
        return a.words <= b.words

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClopenSet):
            return NotImplemented
        if self.subshift != other.subshift:
            return False
        a, b = self._common(other)
        return a.words == b.words

    def __hash__(self) -> int:
        c = self.canonical()
        return hash((c.L, c.words))

    def __contains__(self, x: Point) -> bool:
        return self.contains_point(x)

    def contains_point(self, x: Point) -> bool:
        _check_same(self.subshift, x.subshift)
        return x.prefix(self.L) in self.words

    def is_empty(self) -> bool:
        return not self.words

    def is_disjoint(self, other: ClopenSet) -> bool:
        return (self & other).is_empty()

    def is_full(self) -> bool:
        return self.words == frozenset(self.subshift.words(self.L))

    # clopen, hence closed: dense iff everything
    is_dense = is_full

    def closure(self) -> ClopenSet:
        return self

    def representative(self) -> Point:
        """A deterministic point of the set (least word, least tail)."""
        if self.is_empty():
            raise SubshiftError("empty set has no points")
        return self.subshift.least_tail(min(self.words))

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.words))

    def __repr__(self) -> str:
        return f"ClopenSet(L={self.L}, words={sorted(self.words)})"

    def to_json(self) -> dict:
        return {"L": self.L, "words": sorted(self.words)}

    @classmethod
    def from_json(cls, subshift: Subshift, data: dict) -> ClopenSet:
        return cls(subshift, int(data["L"]), frozenset(data["words"]))


def intersect(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a & b


def union(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a | b


def difference(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a - b


def union_all(sets: Iterable[ClopenSet], subshift: Subshift) -> ClopenSet:
    out = ClopenSet.empty(subshift)
    for a in sets:
        out = out | a
    return out


def preimage_clopen(a: ClopenSet, j: int) -> ClopenSet:
    """``T^-j(A)`` as a clopen set of window ``j + A.L``."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    if j == 0:
        return a
    words = frozenset(w for w in a.subshift.words(j + a.L) if w[j:] in a.words)
    return ClopenSet(a.subshift, j + a.L, words)
