import csv
import json
from pathlib import Path

import pytest

from entropylab.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
PASSING = sorted(p.name for p in SCENARIOS.glob("*.json") if p.name != "single_point_rejected.json")


@pytest.mark.parametrize("name", PASSING)
def test_bundled_scenarios_pass(name, tmp_path):
    assert main(["run", str(SCENARIOS / name), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["report_version"] == 1 and report["passed"]


def test_single_point_rejected(tmp_path, capsys):
    assert main(["run", str(SCENARIOS / "single_point_rejected.json"), "--out", str(tmp_path)]) == 2
    assert "single point" in capsys.readouterr().err


def test_full_shift_entropy_csv(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["entropy", "--scenario", str(SCENARIOS / "full_shift_entropy.json"),
                 "--nmax", "8", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["N_n"]) for r in rows] == [2**n for n in range(1, 9)]
    assert all(float(r["log2N_over_n"]) == 1.0 for r in rows)


def test_golden_density(tmp_path):
    out = tmp_path / "i.json"
    assert main(["independence", "--scenario", str(SCENARIOS / "golden_mean_independence.json"),
                 "--horizon", "12", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["results"]["density"]["exact"] == "1/2"


def test_verify_mode_failure_exit_code(tmp_path):
    sc = json.loads((SCENARIOS / "golden_mean_independence.json").read_text())
    sc["params"] = {"sets": ["U0", "U1"], "horizon": 2, "mode": "verify", "I": [0, 1]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(sc))
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 1
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert not rep["passed"]


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad), "--out", str(tmp_path)]) == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_schema_violation(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "experiment": "entropy"}))
    assert main(["run", str(bad), "--out", str(tmp_path)]) == 2


def test_certificate_command(tmp_path):
    out = tmp_path / "c.json"
    assert main(["certificate", "--scenario", str(SCENARIOS / "full_shift_certificate.json"),
                 "--m", "4", "--emit-report", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["results"]["separated_count"] == 16


def test_determinism(tmp_path):
    for name in ("full_shift_prohorov.json", "golden_mean_lemma31.json", "full_shift_lemma32.json"):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", str(SCENARIOS / name), "--out", str(a), "--seed", "7"]) == 0
        assert main(["run", str(SCENARIOS / name), "--out", str(b), "--seed", "7"]) == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
