"""Scenario runner.

    entropylab run SCENARIO.json [--out DIR] [--seed K] [--guard-override]
    entropylab entropy --scenario F --nmax N [--exact|--greedy] --out F.csv
    entropylab independence --scenario F --horizon N [--search|--verify] --out F.json
    entropylab certificate --scenario F --m M --emit-report F.json
    entropylab lemma32 --scenario F --out F.json

Exit status: 0 when every check passes, 1 when a check fails, 2 on schema
errors, malformed input or exceeded guards.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema

from . import covers, gwcert, independence, measures
from .covers import InstanceTooLarge, JoinCover, cover_entropy_profile, is_standard_cover
from .independence import CertificateError, GuardExceeded
from .measures import DiscreteMeasure, WNeighborhood
from .sampling import named_rng, perturb_measure, random_measure, sample_in_w
from .shiftspace import ClopenSet, Subshift, SubshiftError, random_point

log = logging.getLogger("entropylab")

REPORT_VERSION = 1
EXPERIMENTS = ("entropy", "prohorov", "independence", "certificate", "lemma31", "lemma32", "upe-transfer")
NEEDS_TWO_POINTS = {"entropy", "independence", "certificate", "lemma32", "upe-transfer"}

_clopen = {
    "type": "object",
    "required": ["L", "words"],
    "properties": {"L": {"type": "integer", "minimum": 1}, "words": {"type": "array", "items": {"type": "string"}}},
}
SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["subshift", "experiment"],
    "properties": {
        "name": {"type": "string"},
        "subshift": {
            "type": "object",
            "required": ["alphabet"],
            "properties": {
                "alphabet": {"type": "integer", "minimum": 1},
                "forbidden": {"type": "array", "items": {"type": "string", "minLength": 1}},
            },
        },
        "sets": {"type": "object", "additionalProperties": _clopen},
        "measures": {"type": "object"},
        "neighborhoods": {"type": "object"},
        "experiment": {"enum": list(EXPERIMENTS)},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
    },
}


class ScenarioError(ValueError):
    pass


class CheckFailed(AssertionError):
    pass


def num(q) -> dict:
    """Exact fraction string plus a decimal rendering."""
    q = Fraction(q)
    return {"exact": str(q), "decimal": float(q)}


@dataclass
class Scenario:
    name: str
    subshift: Subshift
    sets: dict[str, ClopenSet]
    measures: dict[str, DiscreteMeasure]
    neighborhoods: dict[str, WNeighborhood]
    experiment: str
    params: dict[str, Any]
    seed: int
    guard_override: bool = False

    def set(self, name: str) -> ClopenSet:
        if name not in self.sets:
            raise ScenarioError(f"unknown set {name!r}")
        return self.sets[name]

    def measure(self, name: str) -> DiscreteMeasure:
        if name not in self.measures:
            raise ScenarioError(f"unknown measure {name!r}")
        return self.measures[name]

    def nbhd(self, name: str) -> WNeighborhood:
        if name not in self.neighborhoods:
            raise ScenarioError(f"unknown neighborhood {name!r}")
        return self.neighborhoods[name]

    def cover(self, key: str = "cover") -> tuple[ClopenSet, ClopenSet]:
        names = self.params.get(key)
        if names is None:
            return ClopenSet.cylinder(self.subshift, "0"), ClopenSet.cylinder(self.subshift, "1")
        if len(names) != 2:
            raise ScenarioError(f"{key} needs exactly two set names")
        return self.set(names[0]), self.set(names[1])


def parse_scenario(data: Any, seed: int | None = None) -> Scenario:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioError(f"schema: {e.message}") from None
    try:
        S = Subshift.from_json(data["subshift"])
        sets = {k: ClopenSet.from_json(S, v) for k, v in data.get("sets", {}).items()}
        ms = {k: DiscreteMeasure.from_json(S, v) for k, v in data.get("measures", {}).items()}
        ws = {k: WNeighborhood.from_json(S, v) for k, v in data.get("neighborhoods", {}).items()}
    except (SubshiftError, measures.MeasureError, ValueError, KeyError, TypeError) as e:
        raise ScenarioError(f"invalid scenario data: {e}") from None
    exp = data["experiment"]
    if exp in NEEDS_TWO_POINTS and not S.has_two_points():
        raise ScenarioError("the subshift has a single point: no standard cover exists")
    return Scenario(
        name=data.get("name", "scenario"),
        subshift=S,
        sets=sets,
        measures=ms,
        neighborhoods=ws,
        experiment=exp,
        params=dict(data.get("params", {})),
        seed=int(data.get("seed", 0) if seed is None else seed),
    )


def load_scenario(path: str | Path, seed: int | None = None) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"malformed JSON in {path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_scenario(data, seed)


@dataclass
class Outcome:
    results: dict[str, Any]
    checks: list[dict] = field(default_factory=list)
    files: dict[str, str] = field(default_factory=dict)

    def check(self, name: str, ok: bool, **detail) -> None:
        entry = {"name": name, "passed": bool(ok)}
        entry.update(detail)
        self.checks.append(entry)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _guards(sc: Scenario) -> dict[str, int]:
    if sc.guard_override:
        return {"universe_guard": 2**24, "search_guard": 2**18}
    p = sc.params
    return {
        "universe_guard": int(p.get("universe_guard", covers.DEFAULT_UNIVERSE_GUARD)),
        "search_guard": int(p.get("search_guard", covers.DEFAULT_SEARCH_GUARD)),
    }


def entropy_csv(profile: covers.EntropyProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "N_n", "log2N_over_n"])
    for r in profile.rows:
        w.writerow([r.n, r.N, repr(r.rate)])
    return buf.getvalue()


def run_entropy(sc: Scenario) -> Outcome:
    u0, u1 = sc.cover()
    nmax = int(sc.params.get("nmax", 8))
    exact = sc.params.get("mode", "exact") == "exact"
    prof = cover_entropy_profile(u0, u1, nmax, exact=exact, **_guards(sc))
    out = Outcome({
        "standard_cover": is_standard_cover(u0, u1),
        "rows": [{"n": r.n, "N_n": r.N, "log2N_over_n": r.rate} for r in prof.rows],
        "fekete_estimate": prof.fekete_estimate,
        "last_rate": prof.last_rate,
        "exact": exact,
    })
    out.files["entropy.csv"] = entropy_csv(prof)
    Ns = {r.n: r.N for r in prof.rows}
    if exact:
        sub = all(
            Ns[a + b] <= Ns[a] * Ns[b] for a in Ns for b in Ns if a + b in Ns
        )
        out.check("subadditivity", sub)
    out.check("positive_counts", all(N >= 1 for N in Ns.values()))
    if "expect_rate" in sc.params:
        target = float(Fraction(sc.params["expect_rate"]))
        tol = float(Fraction(sc.params.get("tolerance", "0")))
        out.check("expected_rate", abs(prof.fekete_estimate - target) <= tol,
                  estimate=prof.fekete_estimate, target=target)
    return out


def run_prohorov(sc: Scenario) -> Outcome:
    pairs = []
    if "mu" in sc.params:
        pairs.append((sc.measure(sc.params["mu"]), sc.measure(sc.params["nu"])))
    rng = named_rng(sc.seed, "prohorov")
    for _ in range(int(sc.params.get("random_pairs", 0))):
        k = int(sc.params.get("max_atoms", 8))
        pairs.append((random_measure(sc.subshift, rng, k), random_measure(sc.subshift, rng, k)))
    values = []
    agree = True
    for mu, nu in pairs:
        a = measures.prohorov_subset(mu, nu)
        b = measures.prohorov_subset(mu, nu, symmetric=True)
        c = measures.prohorov_flow(mu, nu)
        agree &= a == b == c
        values.append({"one_sided": num(a), "symmetric": num(b), "flow": num(c)})
    out = Outcome({"pairs": len(pairs), "values": values[:20]})
    out.check("oracle_agreement", agree)
    return out


def run_independence(sc: Scenario, mode: str | None = None, horizon: int | None = None) -> Outcome:
    names = sc.params.get("sets")
    sets = tuple(sc.set(n) for n in names) if names else sc.cover()
    N = int(horizon if horizon is not None else sc.params.get("horizon", 8))
    mode = mode or sc.params.get("mode", "search")
    guard = 64 if sc.guard_override else independence.HORIZON_GUARD
    if mode == "search":
        I, dens = independence.max_independence_density(sets, N, horizon_guard=guard)
    elif mode == "verify":
        I = tuple(sc.params["I"])
        dens = Fraction(len(set(I)), N)
    else:
        raise ScenarioError(f"unknown independence mode {mode!r}")
    res = independence.verify_independence(sets, I)
    out = Outcome({"I": list(I), "density": num(dens), "horizon": N})
    out.check("independence", res.ok, counterexample=res.counterexample and
              {str(k): v for k, v in res.counterexample.items()})
    if res.ok and len(sets) ** len(I) <= 2**12:
        cert = independence.base_certificate(sets, I, N)
        out.results["certificate"] = cert.to_json()
    if "expect_density" in sc.params:
        out.check("expected_density", dens == Fraction(sc.params["expect_density"]))
    return out


def run_certificate(sc: Scenario, m: int | None = None) -> Outcome:
    u0, u1 = sc.cover()
    v0, v1 = sc.cover("V") if "V" in sc.params else (u0 - u1, u1 - u0)
    m = int(m if m is not None else sc.params.get("m", 6))
    J = tuple(sc.params.get("J", range(m)))
    rep = gwcert.entropy_witness_pipeline(u0, u1, v0, v1, J, m)
    out = Outcome(rep.to_json())
    out.check("separation", rep.separated_count == 2 ** len(J), count=rep.separated_count)
    out.check("sandwich", rep.sandwich_checks == len(J))
    return out


def run_lemma31(sc: Scenario) -> Outcome:
    rng = named_rng(sc.seed, "lemma31")
    mu = sc.measure(sc.params["mu"]) if "mu" in sc.params else random_measure(sc.subshift, rng, 4)
    eps = Fraction(sc.params.get("eps", "1/2"))
    samples = int(sc.params.get("samples", 50))
    W = measures.basis_refine(mu, eps)
    delta = measures.w_robustness_radius(W, mu)
    inner_ok, outer_ok, tried = True, True, 0
    for _ in range(samples):
        nu = sample_in_w(W, rng)
        outer_ok &= measures.prohorov_subset(nu, mu) < eps
    kept = 0
    while kept < samples and tried < 20 * samples:
        tried += 1
        nu = perturb_measure(mu, delta, rng)
        if measures.prohorov_subset(nu, mu) < delta:
            kept += 1
            inner_ok &= W.contains(nu)
    out = Outcome({"W": W.to_json(), "radius": num(delta), "samples": samples, "perturbed_kept": kept})
    out.check("mu_in_W", W.contains(mu))
    out.check("W_inside_ball", outer_ok)
    out.check("ball_inside_W", inner_ok and kept == samples)
    return out


def _parse_n(v) -> int | None:
    return None if v in (None, "inf", "infinity") else int(v)


def run_lemma32(sc: Scenario) -> Outcome:
    W0, W1 = sc.nbhd(sc.params["W0"]), sc.nbhd(sc.params["W1"])
    n = _parse_n(sc.params.get("n"))
    samples = int(sc.params.get("samples", 50))
    lift = gwcert.lift_open_to_product(W0, W1, n)
    rng = named_rng(sc.seed, "lemma32")
    ok = True
    for W, boxes in zip((W0, W1), lift.boxes):
        for _ in range(samples):
            pts = [random_point(sc.subshift, rng, prefix=rng.choice(sorted(b.words))) for b in boxes]
            mu = measures.r_m(pts)
            ok &= W.contains(mu) and measures.in_m_n(mu, n)
    out = Outcome({
        "m": lift.m,
        "witness_sizes": list(lift.sizes),
        "boxes": [[b.to_json() for b in bs] for bs in lift.boxes],
    })
    out.check("boxes_map_into_opens", ok)
    if n is None:
        out.check("m_is_product_of_sizes", lift.m == lift.sizes[0] * lift.sizes[1])
    else:
        out.check("m_equals_n", lift.m == n)
    return out


def upe_transfer_demo(S: Subshift, n: int, m: int, horizon: int,
                      u0: ClopenSet | None = None, u1: ClopenSet | None = None) -> Outcome:
    """Both reduction directions on finite certificates for one subshift."""
    u0 = u0 or ClopenSet.cylinder(S, "0")
    u1 = u1 or ClopenSet.cylinder(S, "1")
    if u0.is_empty() or u1.is_empty() or not u0.is_disjoint(u1):
        raise ScenarioError("need disjoint nonempty U0, U1")
    I, dens = independence.max_independence_density((u0, u1), horizon)
    base = independence.base_certificate((u0, u1), I, horizon)
    lifted = independence.lift_base_to_measure(I, u0, u1, n, horizon=horizon)
    back = independence.reduce_measure_to_base_finite_n(lifted)
    out = Outcome({
        "I": list(I),
        "density": num(dens),
        "base_certificate": base.to_json(),
        "measure_certificate": lifted.to_json(),
        "reduced_certificate": back.to_json(),
    })
    out.check("round_trip_same_I", back.I == tuple(I))
    if is_standard_cover(u0, u1):
        J = tuple(j for j in I if j < m)
        wit = {}
        for sig, mu in lifted.witnesses.items():
            key = tuple(c for j, c in zip(I, sig) if j < m)
            if all(c == 0 for j, c in zip(I, sig) if j >= m):
                wit[key] = mu
        rep = gwcert.entropy_witness_pipeline(u0, u1, u0, u1, J, m, witnesses=wit)
        out.results["pipeline"] = rep.to_json()
        out.check("pipeline_separation", rep.separated_count == 2 ** len(J))
        out.results["exponent"] = str(rep.witness_exponent)
    return out


def run_upe_transfer(sc: Scenario) -> Outcome:
    p = sc.params
    u0, u1 = sc.cover()
    return upe_transfer_demo(sc.subshift, int(p.get("n", 2)), int(p.get("m", 8)), int(p.get("horizon", 8)), u0, u1)


RUNNERS = {
    "entropy": run_entropy,
    "prohorov": run_prohorov,
    "independence": run_independence,
    "certificate": run_certificate,
    "lemma31": run_lemma31,
    "lemma32": run_lemma32,
    "upe-transfer": run_upe_transfer,
}


def render_report(sc: Scenario, out: Outcome) -> str:
    report = {
        "report_version": REPORT_VERSION,
        "scenario": sc.name,
        "experiment": sc.experiment,
        "seed": sc.seed,
        "passed": out.passed,
        "checks": out.checks,
        "results": out.results,
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def execute(sc: Scenario, runner=None, **kw) -> Outcome:
    runner = runner or RUNNERS[sc.experiment]
    try:
        return runner(sc, **kw)
    except (InstanceTooLarge, GuardExceeded, gwcert.SearchBudgetExceeded) as e:
        raise ScenarioError(f"guard: {e}") from None
    except (CertificateError, AssertionError) as e:
        out = Outcome({"error": str(e)})
        out.check("run", False, error=str(e))
        return out


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    sc.guard_override = args.guard_override
    out = execute(sc)
    outdir = Path(args.out)
    _write(outdir / "report.json", render_report(sc, out))
    for name, text in out.files.items():
        _write(outdir / name, text)
    for c in out.checks:
        log.info("%s %s", "PASS" if c["passed"] else "FAIL", c["name"])
    return 0 if out.passed else 1


def cmd_entropy(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    sc.params["nmax"] = args.nmax
    sc.params["mode"] = "greedy" if args.greedy else "exact"
    out = execute(sc, run_entropy)
    if "entropy.csv" in out.files:
        _write(Path(args.out), out.files["entropy.csv"])
    return 0 if out.passed else 1


def cmd_independence(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    mode = "verify" if args.verify else "search"
    out = execute(sc, run_independence, mode=mode, horizon=args.horizon)
    _write(Path(args.out), render_report(sc, out))
    return 0 if out.passed else 1


def cmd_certificate(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    out = execute(sc, run_certificate, m=args.m)
    _write(Path(args.emit_report), render_report(sc, out))
    return 0 if out.passed else 1


def cmd_lemma32(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    out = execute(sc, run_lemma32)
    _write(Path(args.out), render_report(sc, out))
    return 0 if out.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entropylab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("scenario")
    r.add_argument("--out", default="out")
    r.add_argument("--seed", type=int)
    r.add_argument("--guard-override", action="store_true")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("entropy", help="cover entropy profile as CSV")
    e.add_argument("--scenario", required=True)
    e.add_argument("--nmax", type=int, required=True)
    g = e.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", default=True)
    g.add_argument("--greedy", action="store_true")
    e.add_argument("--out", required=True)
    e.add_argument("--seed", type=int)
    e.set_defaults(func=cmd_entropy)

    i = sub.add_parser("independence", help="search or verify independence sets")
    i.add_argument("--scenario", required=True)
    i.add_argument("--horizon", type=int, required=True)
    g = i.add_mutually_exclusive_group()
    g.add_argument("--search", action="store_true", default=True)
    g.add_argument("--verify", action="store_true")
    i.add_argument("--out", required=True)
    i.add_argument("--seed", type=int)
    i.set_defaults(func=cmd_independence)

    c = sub.add_parser("certificate", help="separation pipeline report")
    c.add_argument("--scenario", required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--emit-report", required=True)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=cmd_certificate)

    l2 = sub.add_parser("lemma32", help="lift weak* opens to product boxes")
    l2.add_argument("--scenario", required=True)
    l2.add_argument("--out", required=True)
    l2.add_argument("--seed", type=int)
    l2.set_defaults(func=cmd_lemma32)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"entropylab: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
