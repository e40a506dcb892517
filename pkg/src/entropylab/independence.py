"""Independence sets for tuples of clopen sets and their measure-level lifts.

``I`` is an independence set for ``(A_0, ..., A_{k-1})`` when every pattern
``sigma: I -> {0..k-1}`` is realized by a point ``x`` with ``T^j x`` in
``A_sigma(j)`` for all ``j`` in ``I``.  Realizing a full pattern on ``I``
realizes all of its restrictions, so only patterns on ``I`` itself are
enumerated.  Time indices start at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

from .measures import DiscreteMeasure, in_m_n, measure_of, pushforward, r_m
from .shiftspace import ClopenSet, Point, Subshift, SubshiftError, shift

PATTERN_GUARD = 2**20
HORIZON_GUARD = 24

Pattern = tuple[int, ...]


class GuardExceeded(RuntimeError):
    pass


class CertificateError(ValueError):
    """A certificate failed verification; carries the offending pattern data."""

    def __init__(self, message: str, sigma: Mapping[int, int] | None = None,
                 j: int | None = None, atom: Point | None = None):
        super().__init__(message)
        self.sigma = dict(sigma) if sigma is not None else None
        self.j = j
        self.atom = atom


@dataclass
class IndependenceCheck:
    ok: bool
    counterexample: dict[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


class _PatternAutomaton:
    """Subshift words tracked by their last ``K`` symbols, ``K >= L``."""

    def __init__(self, sets: Sequence[ClopenSet]):
        if not sets:
            raise ValueError("need at least one set")
        S = sets[0].subshift
        for a in sets:
            if a.subshift != S:
                raise SubshiftError("sets live in different subshifts")
        self.S = S
        self.L = max(a.L for a in sets)
        self.sets = [a.at_window(self.L).words for a in sets]
        self.K = max(S.state_length, self.L)
        self.start = frozenset(S.words(self.K))

    def check_position(self, j: int) -> int:
        return max(j + self.L - 1, self.K - 1)

    def advance(self, states: frozenset[str]) -> frozenset[str]:
        s = self.S.state_length
        return frozenset((u + a)[1:] for u in states for a in self.S.successors(u[-s:]))

    def constrain(self, states: frozenset[str], p: int, j: int, c: int) -> frozenset[str]:
        off = j - (p - self.K + 1)
        allowed = self.sets[c]
        return frozenset(u for u in states if u[off : off + self.L] in allowed)


def _normalize_index(I: Iterable[int]) -> tuple[int, ...]:
    idx = tuple(sorted(set(I)))
    if idx and idx[0] < 0:
        raise ValueError("indices must be nonnegative")
    return idx


def verify_independence(
    sets: Sequence[ClopenSet], I: Iterable[int], pattern_guard: int = PATTERN_GUARD
) -> IndependenceCheck:
    """Decide whether ``I`` is an independence set for ``sets``.

    Patterns are explored in lexicographic order; the reachable automaton
    states after each index are memoized, so shared prefixes cost nothing.
    """
    idx = _normalize_index(I)
    k = len(sets)
    if any(a.is_empty() for a in sets):
        raise ValueError("sets must be nonempty")
    if k ** len(idx) > pattern_guard:
        raise GuardExceeded(f"{k}^{len(idx)} patterns exceed the guard {pattern_guard}")
    if not idx:
        return IndependenceCheck(True)
    auto = _PatternAutomaton(sets)
    memo: dict[tuple[int, frozenset[str]], tuple[int, ...] | None] = {}

    def go(pos: int, p: int, states: frozenset[str]) -> tuple[int, ...] | None:
        """A failing tail of choices, or None if every continuation succeeds."""
        if pos == len(idx):
            return None
        key = (pos, states)
        if key in memo:
            return memo[key]
        j = idx[pos]
        target = auto.check_position(j)
        while p < target:
            states = auto.advance(states)
            p += 1
        result = None
        for c in range(k):
            nxt = auto.constrain(states, p, j, c)
            if not nxt:
                result = (c,)
                break
            tail = go(pos + 1, p, nxt)
            if tail is not None:
                result = (c,) + tail
                break
        memo[key] = result
        return result

    fail = go(0, auto.K - 1, auto.start)
    if fail is None:
        return IndependenceCheck(True)
    sigma = dict(zip(idx, fail))
    return IndependenceCheck(False, sigma)


def realize_pattern(
    sets: Sequence[ClopenSet], sigma: Mapping[int, int], variant: int = 0
) -> Point | None:
    """A point ``x`` with ``T^j x`` in ``sets[sigma[j]]`` for every ``j``, or None.

    The constrained word is the lexicographically least one, closed off by
    the least admissible tail.  ``variant = v`` returns the ``v``-th distinct
    point among least-tail closures of its extensions (shortest, then
    lexicographic), when the subshift has that many.
    """
    auto = _PatternAutomaton(sets)
    S = auto.S
    s = S.state_length
    checks: dict[int, list[int]] = {}
    for j in sorted(sigma):
        checks.setdefault(auto.check_position(j), []).append(j)
    last = max(checks, default=auto.K - 1)
    layers: list[frozenset[str]] = []
    states = auto.start
    for p in range(auto.K - 1, last + 1):
        if p > auto.K - 1:
            states = auto.advance(states)
        for j in checks.get(p, ()):
            states = auto.constrain(states, p, j, sigma[j])
        if not states:
            return None
        layers.append(states)
    # backtrack from the least final state
    cur = min(layers[-1])
    tail = ""
    for layer in reversed(layers[:-1]):
        prev = min(u for u in layer if u[1:] == cur[:-1] and cur[-1] in S.successors(u[-s:]))
        tail = cur[-1] + tail
        cur = prev
    word = cur + tail
    if not variant:
        return S.least_tail(word)
    # the variant-th distinct point among least tails of extensions, shortest first
    found: list[Point] = []
    layer = [word]
    for _ in range(variant + 8):
        for w in layer:
            x = S.least_tail(w)
            if x not in found:
                found.append(x)
                if len(found) > variant:
                    return x
        layer = [w + a for w in layer for a in S.successors(w[-s:])]
    return found[-1]


def max_independence_density(
    sets: Sequence[ClopenSet], N: int, horizon_guard: int = HORIZON_GUARD
) -> tuple[tuple[int, ...], Fraction]:
    """Largest independence set inside ``[0, N)``; ties go to the lexicographically least."""
    if N < 1:
        raise ValueError("horizon must be positive")
    if N > horizon_guard:
        raise GuardExceeded(f"horizon {N} exceeds the guard {horizon_guard}")
    best: list[int] = []

    def search(j: int, cur: list[int]) -> None:
        nonlocal best
        if len(cur) + (N - j) <= len(best):
            return
        if j == N:
            best = list(cur)
            return
        cur.append(j)
        if verify_independence(sets, cur, pattern_guard=len(sets) ** N):
            search(j + 1, cur)
        cur.pop()
        search(j + 1, cur)

    search(0, [])
    return tuple(best), Fraction(len(best), N)


def product_power_check(
    S: Subshift,
    m: int,
    opens: tuple[Sequence[ClopenSet], Sequence[ClopenSet]],
    I: Iterable[int],
    pattern_guard: int = PATTERN_GUARD,
) -> IndependenceCheck:
    """Independence of ``I`` for two boxes in the ``m``-fold product system.

    A product of sets is nonempty exactly when every factor is, so this is
    one check per coordinate.  A counterexample also records the coordinate
    under the key ``-1``.
    """
    boxes0, boxes1 = opens
    if len(boxes0) != m or len(boxes1) != m:
        raise ValueError("each box needs m factors")
    idx = _normalize_index(I)
    for i in range(m):
        if boxes0[i].subshift != S or boxes1[i].subshift != S:
            raise SubshiftError("box factor from a different subshift")
        res = verify_independence((boxes0[i], boxes1[i]), idx, pattern_guard)
        if not res:
            ce = dict(res.counterexample)
            ce[-1] = i
            return IndependenceCheck(False, ce)
    return IndependenceCheck(True)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class MeasureOpen:
    """``{mu in M_n : mu(U) > eta}``; ``n=None`` means all measures."""

    U: ClopenSet
    eta: Fraction
    n: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta", Fraction(self.eta))
        if not 0 <= self.eta < 1:
            raise ValueError("threshold must lie in [0, 1)")
        if self.U.is_empty():
            raise ValueError("U must be nonempty")
        if self.n is not None and self.n < 1:
            raise ValueError("n must be positive")

    def contains(self, mu: DiscreteMeasure) -> bool:
        return in_m_n(mu, self.n) and measure_of(mu, self.U) > self.eta

    def to_json(self) -> dict:
        return {"U": self.U.to_json(), "eta": str(self.eta), "n": self.n}


Witness = Union[Point, DiscreteMeasure]


@dataclass
class IndependenceCertificate:
    """Sets, an index set ``I`` inside ``[0, horizon)`` and per-pattern witnesses.

    ``sets`` holds clopen sets (base level) or objects with ``contains(mu)``
    (measure level).  Witnesses are keyed by the pattern as a tuple aligned
    with ``I``.
    """

    sets: tuple
    I: tuple[int, ...]
    horizon: int
    witnesses: dict[Pattern, Witness] | None = field(default=None)

    def __post_init__(self) -> None:
        self.I = _normalize_index(self.I)
        if self.I and self.I[-1] >= self.horizon:
            raise ValueError("I must lie inside [0, horizon)")

    @property
    def level(self) -> str:
        return "base" if all(isinstance(a, ClopenSet) for a in self.sets) else "measure"

    def patterns(self) -> Iterable[Pattern]:
        return product(range(len(self.sets)), repeat=len(self.I))

    def check_witness(self, sigma: Pattern, w: Witness) -> int | None:
        """First index ``j`` where the witness misses its set, or None."""
        if self.level == "base":
            x = w
            t = 0
            for j, c in zip(self.I, sigma):
                while t < j:
                    x, t = shift(x), t + 1
                if not self.sets[c].contains_point(x):
                    return j
            return None
        mu = w
        t = 0
        for j, c in zip(self.I, sigma):
            while t < j:
                mu, t = pushforward(mu), t + 1
            if not self.sets[c].contains(mu):
                return j
        return None

    def verify(self) -> None:
        if self.witnesses is None:
            if self.level != "base":
                raise CertificateError("measure-level certificates need witnesses")
            res = verify_independence(self.sets, self.I)
            if not res:
                raise CertificateError("pattern not realizable", res.counterexample)
            return
        for sigma in self.patterns():
            if sigma not in self.witnesses:
                raise CertificateError("missing witness", dict(zip(self.I, sigma)))
            j = self.check_witness(sigma, self.witnesses[sigma])
            if j is not None:
                raise CertificateError(f"witness fails at time {j}", dict(zip(self.I, sigma)), j)

    def to_json(self) -> dict:
        out = {
            "level": self.level,
            "sets": [a.to_json() for a in self.sets],
            "I": list(self.I),
            "horizon": self.horizon,
        }
        if self.witnesses is not None:
            out["witnesses"] = [
                {"sigma": list(sig), "witness": self.witnesses[sig].to_json()}
                for sig in sorted(self.witnesses)
            ]
        return out


def base_certificate(sets: Sequence[ClopenSet], I: Iterable[int], horizon: int) -> IndependenceCertificate:
    """Certificate with one auto-constructed witness point per pattern."""
    cert = IndependenceCertificate(tuple(sets), tuple(I), horizon)
    res = verify_independence(sets, cert.I)
    if not res:
        raise CertificateError("not an independence set", res.counterexample)
    cert.witnesses = {
        sig: realize_pattern(sets, dict(zip(cert.I, sig))) for sig in cert.patterns()
    }
    cert.verify()
    return cert


def lift_product_certificate(
    boxes0: Sequence[ClopenSet],
    boxes1: Sequence[ClopenSet],
    opens: tuple,
    I: Iterable[int],
    horizon: int,
) -> IndependenceCertificate:
    """Measure-level certificate from product boxes whose ``r_m`` images lie in ``opens``.

    For each pattern the coordinate witnesses come from the product
    independence check and the measure witness is their empirical measure,
    using ``T~ o R_m = R_m o T_m``.
    """
    m = len(boxes0)
    S = boxes0[0].subshift
    idx = _normalize_index(I)
    res = product_power_check(S, m, (boxes0, boxes1), idx)
    if not res:
        ce = {j: c for j, c in res.counterexample.items() if j >= 0}
        raise CertificateError("product boxes are not independent", ce)
    cert = IndependenceCertificate(tuple(opens), idx, horizon)
    witnesses = {}
    for sig in cert.patterns():
        sigma = dict(zip(idx, sig))
        coords = []
        for i in range(m):
            pair = (boxes0[i], boxes1[i])
            x = realize_pattern(pair, sigma, variant=i)
            if x is None:  # pragma: no cover - excluded by the product check
                raise CertificateError("coordinate pattern has no witness", sigma)
            coords.append(x)
        witnesses[sig] = r_m(coords)
    cert.witnesses = witnesses
    cert.verify()
    return cert


def threshold_opens(u0: ClopenSet, u1: ClopenSet, n: int) -> tuple[MeasureOpen, MeasureOpen]:
    eta = Fraction(n - 1, n)
    return MeasureOpen(u0, eta, n), MeasureOpen(u1, eta, n)


def lift_base_to_measure(
    I: Iterable[int],
    u0: ClopenSet,
    u1: ClopenSet,
    n: int,
    m: int | None = None,
    horizon: int | None = None,
) -> IndependenceCertificate:
    """Lift a base independence set to ``{mu in M_n : mu(U_k) > (n-1)/n}``.

    Witnesses are ``R_m(x_1, ..., x_m)`` with every ``x_i`` realizing the
    pattern; ``m`` defaults to ``n`` and must divide it.
    """
    if n < 1:
        raise ValueError("n must be positive")
    m = n if m is None else m
    if m < 1 or n % m:
        raise ValueError("m must divide n so that R_m lands in M_n")
    idx = _normalize_index(I)
    horizon = horizon if horizon is not None else (idx[-1] + 1 if idx else 1)
    return lift_product_certificate((u0,) * m, (u1,) * m, threshold_opens(u0, u1, n), idx, horizon)


def reduce_measure_to_base_finite_n(cert: IndependenceCertificate) -> IndependenceCertificate:
    """Turn a certificate for the ``(n-1)/n`` threshold opens into one for ``(U_0, U_1)``.

    An ``n``-point empirical measure giving ``U`` more than ``(n-1)/n`` puts
    every point in ``U``; each atom of a witness is therefore a base witness.
    """
    if cert.witnesses is None:
        raise CertificateError("certificate has no witnesses")
    opens = cert.sets
    if not all(isinstance(o, MeasureOpen) for o in opens):
        raise CertificateError("expected threshold opens")
    ns = {o.n for o in opens}
    if len(ns) != 1 or None in ns:
        raise CertificateError("threshold opens must share a finite n")
    n = ns.pop()
    if any(o.eta != Fraction(n - 1, n) for o in opens):
        raise CertificateError("thresholds must be exactly (n-1)/n")
    base_sets = tuple(o.U for o in opens)
    witnesses = {}
    for sig in cert.patterns():
        sigma = dict(zip(cert.I, sig))
        mu = cert.witnesses.get(sig)
        if not isinstance(mu, DiscreteMeasure):
            raise CertificateError("missing measure witness", sigma)
        if not in_m_n(mu, n):
            raise CertificateError("witness is not in M_n", sigma)
        for x in mu.support:
            y, t = x, 0
            for j, c in zip(cert.I, sig):
                while t < j:
                    y, t = shift(y), t + 1
                if not base_sets[c].contains_point(y):
                    raise CertificateError(
                        f"atom {x} leaves U_{c} at time {j}", sigma, j, x
                    )
        witnesses[sig] = mu.support[0]
    out = IndependenceCertificate(base_sets, cert.I, cert.horizon, witnesses)
    out.verify()
    return out
