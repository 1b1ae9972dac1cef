import json
import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))
from regen_golden import CASES, run  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"
EXPECTED_EXIT = {"simulate_nsd_small.json": 1}


@pytest.fixture(autouse=True)
def _repo_root(monkeypatch):
    monkeypatch.chdir(ROOT)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, out = run(CASES[name])
    assert code == EXPECTED_EXIT.get(name, 0)
    json.loads(out)
    assert out == (GOLDEN / name).read_text()


def test_describe_flags():
    _, out = run(["describe", "--spec", "specs/u2.json", "--format", "json"])
    rows = json.loads(out)["rows"]
    assert rows[0]["shared"] is True
    _, out = run(["describe", "--spec", "specs/nsd.json", "--format", "json"])
    assert not any(r["shared"] for r in json.loads(out)["rows"])


def test_describe_tsv_has_rational_cells():
    _, out = run(["describe", "--spec", "U2"])
    assert "1/2 (0.5)" in out.splitlines()[2]


def test_verify_reports_witness_and_branch():
    code, out = run(["verify", "--spec", "specs/u2.json"])
    doc = json.loads(out)
    assert code == 0 and doc["branches"] == {"indistinguishable": 0, "differ": 1}
    assert doc["reports"][0]["info"]["witness"]["observation"] == {"x": "1", "delta": 0}


def test_verify_forced_adapted_only_integrand():
    code, out = run(["verify", "--spec", "specs/u2.json", "--h", "deltaNC"])
    doc = json.loads(out)
    assert code == 0
    e = {x["name"]: x for x in doc["reports"][0]["expected_failures"]}["hypothesis_violation[deltaNC]"]
    assert e["violation_found"] and e["consistent"]


def test_verify_random_laws():
    code, out = run(["verify", "--spec", "NSD", "--seed", "3", "--random-laws", "4"])
    assert code == 0 and json.loads(out)["laws"] == 5


@pytest.mark.parametrize(
    "argv",
    [
        ["describe", "--spec", "missing.json"],
        ["verify", "--spec", "U2", "--h", "nonsense"],
        ["km", "--data", "data/u2_empirical.csv", "--level", "2"],
        ["simulate", "--spec", "U2", "--n", "0", "--reps", "5", "--t", "1"],
        ["simulate", "--spec", "U2", "--n", "10", "--reps", "5", "--t", "7/3"],
    ],
)
def test_input_errors_exit_2(argv, capsys):
    assert run(argv)[0] == 2


def test_malformed_spec(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text('{"margT": [], "margC": [[1, 1]]}')
    assert run(["describe", "--spec", str(p)])[0] == 2


def test_bad_csv_rows(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("time,status\n1,1\n2,2\n")
    assert run(["km", "--data", str(p)])[0] == 2
    assert "row 3" in capsys.readouterr().err


def test_km_frozen_marker():
    _, out = run(["km", "--data", "data/u2_empirical.csv", "--t", "1,5"])
    lines = out.splitlines()
    assert lines[1].endswith("false") and lines[2].endswith("true")


def test_ifcheck_skips_where_gdagger_vanishes(tmp_path):
    p = tmp_path / "law.json"
    p.write_text(json.dumps({"margT": [[2, 1]], "margC": [[1, "1/2"], [3, "1/2"]]}))
    code, out = run(["ifcheck", "--spec", str(p), "--t", "1,2,3"])
    doc = json.loads(out)
    assert code == 0
    assert [e["skipped"] for e in doc["entries"]] == [False, False, False]
    # a law censoring everything at 1 leaves Gdag(1) = 0
    p.write_text(json.dumps({"margT": [[2, 1]], "margC": [[1, 1]]}))
    code, out = run(["ifcheck", "--spec", str(p), "--t", "1"])
    entry = json.loads(out)["entries"][0]
    assert code == 0 and entry["skipped"] and "Gdag" in entry["reason"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "survmart", "describe", "--spec", "NSD"], capture_output=True, text=True, cwd=ROOT
    )
    assert proc.returncode == 0 and proc.stdout.startswith("# tau")
