"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from entropylab.covers import cover_entropy_profile
from entropylab.gwcert import entropy_witness_pipeline, lift_open_to_product
from entropylab.hyperspace import FiniteClosedSet, hausdorff_distance
from entropylab.independence import (
    base_certificate, lift_base_to_measure, max_independence_density, reduce_measure_to_base_finite_n,
)
from entropylab.measures import (
    DiscreteMeasure, WNeighborhood, basis_refine, in_m_n, measure_of, prohorov_flow,
    prohorov_subset, pushforward, r_m, w_contains, w_robustness_radius,
)
from entropylab.sampling import named_rng, perturb_measure, random_measure, sample_in_w
from entropylab.shiftspace import ClopenSet, Subshift, metric, random_point, shift

from oracles import GOLDEN_RATE, brute_max_independence, brute_words

FULL = Subshift.full(2)
GOLDEN = Subshift.golden_mean()
SEED = 20240601


def _cyl(S, w):
    return ClopenSet.cylinder(S, w)


def cover(S):
    return _cyl(S, "0"), _cyl(S, "1")


# --- random instances ------------------------------------------------------

def random_w_and_member(S, rng):
    """A random neighborhood together with a measure strictly inside it."""
    L = rng.randint(1, 3)
    words = list(S.words(L))
    rng.shuffle(words)
    k = rng.randint(1, min(3, len(words)))
    cuts = sorted(rng.sample(range(1, len(words)), k - 1)) if k > 1 else []
    used = rng.randint(k, len(words))
    groups = [words[a:b] for a, b in zip([0] + cuts, cuts + [used])]
    parts = [ClopenSet(S, L, frozenset(g)) for g in groups if g]
    pairs = []
    for u in parts:
        for _ in range(rng.randint(1, 2)):
            pairs.append((random_point(S, rng, prefix=rng.choice(sorted(u.words))), rng.randint(1, 6)))
    for _ in range(rng.randint(0, 2)):
        pairs.append((random_point(S, rng), rng.randint(1, 6)))
    total = sum(w for _, w in pairs)
    mu = DiscreteMeasure.from_pairs((p, F(w, total)) for p, w in pairs)
    W = WNeighborhood(tuple((u, measure_of(mu, u) * F(rng.randint(1, 9), 10)) for u in parts))
    return W, mu


def smallest_member_size(W, limit=12):
    """Brute force: least t such that some t-point empirical measure lies in W."""
    from itertools import product
    for t in range(1, limit + 1):
        for counts in product(range(t + 1), repeat=len(W.parts)):
            if sum(counts) <= t and all(F(c, t) > eta for c, (_, eta) in zip(counts, W.parts)):
                return t
    return None


def random_small_w(S, rng, max_t):
    while True:
        L = rng.randint(1, 2)
        words = list(S.words(L))
        rng.shuffle(words)
        k = rng.randint(1, min(2, len(words)))
        parts = [ClopenSet(S, L, frozenset([w])) for w in words[:k]]
        etas = [F(rng.randint(1, 9), 10) for _ in parts]
        if sum(etas) >= 1:
            continue
        W = WNeighborhood(tuple(zip(parts, etas)))
        t = smallest_member_size(W)
        if t is not None and t <= max_t:
            return W, t


def sample_box(box, rng):
    S = box[0].subshift
    return [random_point(S, rng, prefix=rng.choice(sorted(b.words))) for b in box]


# --- criteria --------------------------------------------------------------

def c1_prohorov_equivalence():
    rng = named_rng(SEED, "c1")
    for i in range(1000):
        S = FULL if i % 2 else GOLDEN
        mu = random_measure(S, rng, max_atoms=8)
        nu = random_measure(S, rng, max_atoms=8)
        a = prohorov_flow(mu, nu)
        b = prohorov_subset(mu, nu)
        c = prohorov_subset(mu, nu, symmetric=True)
        if not a == b == c:
            return False, f"case {i}: flow={a} subset={b} symmetric={c}"
    return True, "1000 pairs agree exactly"


def c2_metric_axioms():
    rng = named_rng(SEED, "c2")
    for i in range(300):
        S = FULL if i % 2 else GOLDEN
        mus = [random_measure(S, rng, max_atoms=4) for _ in range(3)]
        if i % 10 == 0:
            mus[1] = mus[0]
        d = lambda p, q: prohorov_flow(p, q)
        a, b, c = mus
        if (d(a, b) == 0) != (a == b) or d(a, a) != 0:
            return False, f"d_P identity fails at {i}"
        if d(a, b) != d(b, a):
            return False, f"d_P symmetry fails at {i}"
        if d(a, c) > d(a, b) + d(b, c):
            return False, f"d_P triangle fails at {i}"
        Ks = [FiniteClosedSet.of(random_point(S, rng) for _ in range(rng.randint(1, 4))) for _ in range(3)]
        if i % 10 == 0:
            Ks[1] = Ks[0]
        h = hausdorff_distance
        A, B, C = Ks
        if (h(A, B) == 0) != (A == B) or h(A, B) != h(B, A) or h(A, C) > h(A, B) + h(B, C):
            return False, f"d_H axioms fail at {i}"
    return True, "300 triples each for d_P and d_H"


def c3_dirac_closed_form():
    rng = named_rng(SEED, "c3")
    for i in range(200):
        S = FULL if i % 2 else GOLDEN
        x, y = random_point(S, rng), random_point(S, rng)
        if i % 4 == 0:
            y = random_point(S, rng, prefix=x.prefix(rng.randint(1, 6)))
        want = min(metric(x, y), F(1))
        dx, dy = DiscreteMeasure.dirac(x), DiscreteMeasure.dirac(y)
        if prohorov_subset(dx, dy) != want or prohorov_flow(dx, dy) != want:
            return False, f"pair {i}: expected {want}"
    return True, "200 pairs"


def c4_full_shift_entropy():
    prof = cover_entropy_profile(*cover(FULL), 12)
    ok = [r.N for r in prof.rows] == [2**n for n in range(1, 13)]
    ok = ok and all(F(int(math.log2(r.N)), r.n) == 1 and r.rate == 1 for r in prof.rows)
    return ok, f"N_n = {[r.N for r in prof.rows]}"


def c5_golden_entropy():
    prof = cover_entropy_profile(*cover(GOLDEN), 20)
    counts = [r.N for r in prof.rows]
    # Fibonacci by the brute-force word enumeration for small n, recurrence after
    fib = [2, 3]
    while len(fib) < 20:
        fib.append(fib[-1] + fib[-2])
    small = [len(brute_words("01", {"11"}, n, pad=1)) for n in range(1, 13)]
    ok = counts == [GOLDEN.word_count(n) for n in range(1, 21)] == fib and small == fib[:12]
    gap = abs(prof.fekete_estimate - GOLDEN_RATE)
    return ok and gap <= 0.02, f"Fekete {prof.fekete_estimate:.5f} vs spectral {GOLDEN_RATE:.5f} (gap {gap:.4f})"


def c6_independence_densities():
    words = [frozenset({"0"}), frozenset({"1"})]
    If, df = max_independence_density(cover(FULL), 12)
    Ig, dg = max_independence_density(cover(GOLDEN), 12)
    bf = brute_max_independence("01", set(), words, 1, 12)
    bg = brute_max_independence("01", {"11"}, words, 1, 12)
    ok = df == 1 and dg == F(1, 2) and len(If) == bf and len(Ig) == bg
    return ok, f"full {df} (brute {bf}/12), golden {dg} (brute {bg}/12)"


def c7_finite_round_trip():
    notes = []
    for name, S in (("full", FULL), ("golden", GOLDEN)):
        I, _ = max_independence_density(cover(S), 8)
        base_certificate(cover(S), I, 8).verify()
        lifted = lift_base_to_measure(I, *cover(S), n=2, m=2, horizon=8)
        lifted.verify()
        back = reduce_measure_to_base_finite_n(lifted)
        back.verify()
        if back.I != tuple(I) or back.level != "base":
            return False, f"{name}: round trip changed I"
        notes.append(f"{name} |I|={len(I)}")
    return True, ", ".join(notes)


def c8_separation_pipeline():
    u0, u1 = cover(FULL)
    rep = entropy_witness_pipeline(u0, u1, u0, u1, range(8), 8)
    ok = (rep.k_m == 256 and rep.separated_count == 256 and rep.sandwich_checks == 8
          and rep.norm_checks == 256 and rep.min_pair_gap is not None and rep.min_pair_gap >= F(1, 2))
    return ok, f"k_m={rep.k_m} separated={rep.separated_count} sandwich={rep.sandwich_checks} norm={rep.norm_checks}"


def c9_openness():
    rng = named_rng(SEED, "c9")
    inside = 0
    for case in range(500):
        S = FULL if case % 2 else GOLDEN
        W, mu = random_w_and_member(S, rng)
        delta = w_robustness_radius(W, mu)
        if not delta > 0:
            return False, f"case {case}: radius {delta}"
        found, tries = 0, 0
        while found < 200 and tries < 1000:
            tries += 1
            nu = perturb_measure(mu, delta, rng)
            if prohorov_subset(nu, mu) < delta:
                found += 1
                if not w_contains(W, nu):
                    return False, f"case {case}: perturbed measure left W"
        if found < 200:
            return False, f"case {case}: only {found} perturbations inside the radius"
        inside += found
    for case in range(100):
        S = FULL if case % 2 else GOLDEN
        mu = random_measure(S, rng)
        eps = F(1, rng.randint(1, 8))
        W = basis_refine(mu, eps)
        if not w_contains(W, mu):
            return False, f"refine case {case}: center outside"
        for _ in range(200):
            if not prohorov_subset(sample_in_w(W, rng), mu) < eps:
                return False, f"refine case {case}: member outside the eps-ball"
    return True, f"{inside} perturbed measures inside W; 20000 refine members inside their balls"


def c10_lifting():
    rng = named_rng(SEED, "c10")
    sizes = set()
    for case in range(100):
        S = FULL if case % 2 else GOLDEN
        for n in (2, None):
            max_t = 2 if n == 2 else 3
            (W0, t0), (W1, t1) = random_small_w(S, rng, max_t), random_small_w(S, rng, max_t)
            lift = lift_open_to_product(W0, W1, n)
            if n is None:
                sizes.add((t0, t1))
                if lift.sizes != (t0, t1) or lift.m != t0 * t1:
                    return False, f"case {case}: m={lift.m}, expected {t0}*{t1}"
            elif lift.m != 2:
                return False, f"case {case}: m={lift.m} for n=2"
            for k, W in enumerate((W0, W1)):
                for _ in range(200):
                    mu = r_m(sample_box(lift.boxes[k], rng))
                    if not (W.contains(mu) and in_m_n(mu, lift.m)):
                        return False, f"case {case}, n={n}: sampled tuple misses W_{k}"
    return True, f"100 pairs per case, witness size pairs seen {sorted(sizes)}"


def c11_pushforward_identity():
    rng = named_rng(SEED, "c11")
    for i in range(500):
        S = FULL if i % 2 else GOLDEN
        xs = [random_point(S, rng) for _ in range(rng.randint(1, 8))]
        if rng.random() < 0.3:
            xs += xs[: rng.randint(1, len(xs))]
        if pushforward(r_m(xs)) != r_m([shift(x) for x in xs]):
            return False, f"tuple {i}"
    return True, "500 tuples"


CRITERIA = [
    (1, "Prohorov oracle equivalence", c1_prohorov_equivalence, 60),
    (2, "metric axioms for d_P and d_H", c2_metric_axioms, 30),
    (3, "Prohorov distance of Dirac measures", c3_dirac_closed_form, None),
    (4, "full 2-shift cover entropy", c4_full_shift_entropy, 60),
    (5, "golden-mean cover entropy", c5_golden_entropy, 120),
    (6, "independence densities", c6_independence_densities, 120),
    (7, "finite-n lift and reduce round trip", c7_finite_round_trip, 30),
    (8, "separation pipeline at m = 8", c8_separation_pipeline, 120),
    (9, "neighborhood openness and refinement", c9_openness, 180),
    (10, "lifting opens to product boxes", c10_lifting, 180),
    (11, "pushforward commutes with empirical measures", c11_pushforward_identity, None),
]


def run_criterion(num, title, fn, limit):
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as e:  # a crash is a failure of the criterion
        ok, detail = False, f"{type(e).__name__}: {e}"
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed >= limit:
        ok, detail = False, f"{detail}; runtime {elapsed:.1f}s over the {limit}s limit"
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} ({elapsed:.1f}s) {detail}"
    return ok, line


@pytest.mark.acceptance
@pytest.mark.parametrize("num,title,fn,limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, limit, capsys):
    ok, line = run_criterion(num, title, fn, limit)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
