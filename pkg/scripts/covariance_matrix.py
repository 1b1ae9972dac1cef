"""Empirical versus asymptotic covariance of the KM process at several times.

    python scripts/covariance_matrix.py --spec specs/nsd.json --t 1,2,3 --n 10000 --reps 1000
"""

import argparse

from survmart.cli import _law
from survmart.mc import ExperimentConfig, default_workers, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spec", default="specs/nsd.json")
    ap.add_argument("--t", default="1,2,3")
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--reps", type=int, default=1_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    cfg = ExperimentConfig(_law(args.spec), args.n, args.reps, tuple(args.t.split(",")), args.seed, workers=default_workers())
    res = run_experiment(cfg)
    print("s\tt\tempirical\tasymptotic")
    for t, row in res.per_t.items():
        print(f"{t}\t{t}\t{row['variance']:.5f}\t{res.population['sigma2'][t]['exact']}")
    for key, row in res.pairs.items():
        s, t = key.split(",")
        print(f"{s}\t{t}\t{row['covariance']:.5f}\t{res.population['sigma2_st'][key]['exact']}")


if __name__ == "__main__":
    main()
