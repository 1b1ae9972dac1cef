"""Run the exact oracle suite on seeded random laws and tabulate the outcome per law.

    python scripts/random_law_census.py --seed 0 --count 50
"""

import argparse
import time

from survmart.oracle import run_suite
from survmart.randlaws import random_laws


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=50)
    args = ap.parse_args()

    start = time.perf_counter()
    print("law\tgrid\tshared\tbranch\tchecks\tviolations\twitnesses_consistent")
    bad = 0
    for name, law in random_laws(args.seed, args.count):
        rep = run_suite(law, name)
        bad += len(rep.violations)
        consistent = all(e["consistent"] for e in rep.expected_failures)
        print(
            f"{name}\t{','.join(rep.info['grid'])}\t{','.join(rep.info['shared_discontinuities']) or '-'}"
            f"\t{rep.info['indistinguishability']}\t{len(rep.checks)}\t{len(rep.violations)}\t{consistent}"
        )
    print(f"# total violations {bad}; {time.perf_counter() - start:.2f}s")


if __name__ == "__main__":
    main()
