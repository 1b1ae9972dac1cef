"""Print one PASS/FAIL line per acceptance criterion (same checks as tests/test_acceptance.py)."""

import runpy
import sys
from pathlib import Path

if __name__ == "__main__":
    path = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.argv = [str(path)]
    runpy.run_path(str(path), run_name="__main__")
