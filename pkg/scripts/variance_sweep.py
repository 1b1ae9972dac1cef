"""Empirical Var of sqrt(n)(F_hat(t) - F(t)) across sample sizes, against the asymptotic sigma2(t).

    python scripts/variance_sweep.py --spec specs/u2.json --t 1 --reps 500
"""

import argparse

from survmart.cli import _law
from survmart.mc import ExperimentConfig, default_workers, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spec", default="specs/u2.json")
    ap.add_argument("--t", default="1")
    ap.add_argument("--sizes", default="50,200,1000,10000")
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    law = _law(args.spec)
    print("n\tt\tmean\tvariance\tsigma2\trel_err\tcoverage")
    for n in (int(v) for v in args.sizes.split(",")):
        res = run_experiment(ExperimentConfig(law, n, args.reps, (args.t,), args.seed, workers=default_workers()))
        for t, row in res.per_t.items():
            crit = res.criteria[f"variance[t={t}]"]
            err = crit.get("relative_error")
            print(
                f"{n}\t{t}\t{row['mean']:.4f}\t{row['variance']:.4f}\t{res.population['sigma2'][t]['decimal']}"
                f"\t{'n/a' if err is None else f'{err:.4f}'}\t{row['coverage']:.3f}"
            )


if __name__ == "__main__":
    main()
