"""Rewrite the golden CLI outputs in tests/golden/. Review the diff before committing."""

import contextlib
import io
from pathlib import Path

from survmart.cli import main

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"

CASES = {
    "describe_u2.json": ["describe", "--spec", "specs/u2.json", "--format", "json"],
    "describe_nsd.json": ["describe", "--spec", "specs/nsd.json", "--format", "json"],
    "ifcheck_u2.json": ["ifcheck", "--spec", "specs/u2.json", "--t", "1,2"],
    "km_u2_empirical.json": ["km", "--data", "data/u2_empirical.csv", "--t", "1,2,3", "--format", "json"],
    "simulate_nsd_small.json": ["simulate", "--spec", "specs/nsd.json", "--n", "500", "--reps", "50", "--t", "1,2", "--seed", "7"],
    "verify_nsd.json": ["verify", "--spec", "specs/nsd.json"],
}


def run(argv: list[str]) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


if __name__ == "__main__":
    import os

    os.chdir(ROOT)
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, argv in CASES.items():
        code, out = run(argv)
        (GOLDEN / name).write_text(out)
        print(f"{name}: exit {code}")
