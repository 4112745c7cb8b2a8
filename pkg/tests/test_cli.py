"""Command-line interface: exit codes, determinism, schema conformance."""

import csv
import json
import subprocess
import sys
from importlib import resources

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from coop2 import cli


def _registry():
    reg = Registry()
    root = resources.files("coop2") / "schemas"
    for entry in root.iterdir():
        if entry.name.endswith(".json"):
            schema = json.loads(entry.read_text())
            reg = reg.with_resource(schema["$id"],
                                    Resource.from_contents(schema))
    return reg


REGISTRY = _registry()


def _validate(payload, schema_name):
    root = resources.files("coop2") / "schemas" / f"{schema_name}.schema.json"
    schema = json.loads(root.read_text())
    Draft202012Validator(schema, registry=REGISTRY).validate(payload)


def _run(argv):
    return cli.main(argv)


def test_certify_pass_and_schema(tmp_path):
    out = tmp_path / "cert.json"
    code = _run(["certify", "--model", "goodwin", "--n", "4",
                 "--alpha", "0.5,0.5,0.5,0.5", "--m", "10",
                 "--k", "2", "--strong", "--samples", "256",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    _validate(payload, "coop_certificate")
    assert payload["passed"]


def test_certify_k1_fails(tmp_path):
    out = tmp_path / "cert.json"
    code = _run(["certify", "--preset", "example2", "--k", "1",
                 "--samples", "64", "--out", str(out)])
    assert code == 2
    assert not json.loads(out.read_text())["passed"]


def test_usage_error_exit_code(capsys):
    code = _run(["certify", "--model", "goodwin"])  # missing --n/--alpha/--m
    assert code == 1
    code = _run(["simulate", "--preset", "example2", "--a", "0.1,0.2"])
    assert code == 1


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["certify", "--model", "nosuch"])
    assert exc.value.code == 1


def test_analyze_schema_and_values(tmp_path):
    out = tmp_path / "a.json"
    code = _run(["analyze", "--preset", "example2", "--samples", "256",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    _validate(payload, "analysis")
    assert payload["all_pass"]
    assert payload["equilibrium"]["unstable_count"] == 2
    assert len(payload["char_poly"]) == 5


def test_spectral_schema(tmp_path):
    out = tmp_path / "s.json"
    assert _run(["spectral", "--preset", "example2", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    _validate(payload, "spectral_split")
    assert payload["block_case"] == "ComplexPair"
    assert payload["gap"] > 1.0


def test_lyapunov_schema(tmp_path):
    out = tmp_path / "l.json"
    assert _run(["lyapunov", "--preset", "example2", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    _validate(payload, "lyapunov_certificate")
    assert payload["alpha"] > 0
    assert payload["verification"]["all_positive"]


def test_simulate_schema_and_csv(tmp_path):
    out = tmp_path / "r.json"
    traj = tmp_path / "run.csv"
    code = _run(["simulate", "--preset", "example2", "--horizon", "200",
                 "--out", str(out), "--csv", str(traj)])
    assert code == 0
    payload = json.loads(out.read_text())
    _validate(payload, "orbit_report")
    assert payload["verdict"] == "PeriodicOrbit"
    with open(traj) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x1", "x2", "x3", "x4", "s_minus"]
    assert len(rows) > 100


def test_simulate_from_equilibrium(tmp_path, goodwin_eq):
    out = tmp_path / "r.json"
    a = ",".join(f"{v:.15g}" for v in goodwin_eq.e)
    code = _run(["simulate", "--preset", "example2", "--a", a,
                 "--horizon", "50", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["verdict"] == "Equilibrium"


def test_json_determinism(tmp_path):
    a, b = tmp_path / "1.json", tmp_path / "2.json"
    for p in (a, b):
        assert _run(["certify", "--preset", "example3", "--samples", "128",
                     "--seed", "4", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_override(tmp_path, monkeypatch):
    a, b = tmp_path / "1.json", tmp_path / "2.json"
    monkeypatch.setenv("COOP2_SEED", "11")
    assert _run(["certify", "--preset", "example3", "--samples", "128",
                 "--seed", "4", "--out", str(a)]) == 0
    monkeypatch.delenv("COOP2_SEED")
    assert _run(["certify", "--preset", "example3", "--samples", "128",
                 "--seed", "11", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_csv_and_determinism(tmp_path):
    a, b = tmp_path / "1.csv", tmp_path / "2.csv"
    for p in (a, b):
        assert _run(["sweep", "--model", "goodwin",
                     "--sweep", "m=6,10", "--horizon", "300",
                     "--jobs", "2", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    with open(a) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert all(r["error"] == "" for r in rows)
    assert all(r["verdict"] == "PeriodicOrbit" for r in rows)


def test_sweep_single_point_matches_analyze(tmp_path):
    out = tmp_path / "sw.csv"
    assert _run(["sweep", "--model", "goodwin", "--sweep", "m=10",
                 "--horizon", "150", "--out", str(out)]) == 0
    with open(out) as fh:
        row = next(csv.DictReader(fh))
    assert row["unstable_count"] == "2"


def test_sweep_records_per_point_errors(tmp_path):
    out = tmp_path / "sw.csv"
    # m = 0 is invalid for the goodwin family; the sweep must keep going
    assert _run(["sweep", "--model", "goodwin", "--sweep", "m=0,10",
                 "--horizon", "100", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["error"] != "" and rows[0]["verdict"] == ""
    assert rows[1]["error"] == ""


def test_console_script_usage():
    proc = subprocess.run([sys.executable, "-m", "coop2.cli"],
                          capture_output=True)
    assert proc.returncode == 1
