"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a mathematical violation or a
failed criterion, 2 on bad input or usage.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import fmt
from .estim import KMEstimate, greenwood_variance, influence_function, km_confint, km_fit, read_csv
from .mc import ExperimentConfig, default_workers, run_experiment
from .model import FIXTURES, LatentLaw, SpecError, as_observed, load_spec, support_sets, to_fraction
from .oracle import run_suite
from .pathproc import FUNCTIONALS
from .popfn import (
    hazard_dagger_C,
    hazard_sharp_C,
    hazard_sharp_T,
    shared_discontinuity_set,
    survival_dagger,
    survival_sharp,
)
from .randlaws import random_laws

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _law(spec: str):
    """A spec file path, or the name of a built-in fixture."""
    if not Path(spec).exists() and spec in FIXTURES:
        return FIXTURES[spec]
    try:
        return load_spec(spec)
    except OSError as exc:
        raise InputError(f"cannot read spec: {exc}") from None


def _times(raw: str | None) -> list[Fraction] | None:
    if raw is None:
        return None
    out = []
    for part in raw.split(","):
        if part.strip():
            out.append(to_fraction(part.strip(), "--t"))
    if not out:
        raise InputError("--t needs at least one time")
    return out


def _emit(args, doc: dict, header: list[str] | None = None, rows: list[list] | None = None) -> None:
    if args.format == "json" or header is None:
        sys.stdout.write(fmt.dumps(doc))
    else:
        sys.stdout.write(fmt.tsv(header, rows))


def cmd_describe(args) -> int:
    law = _law(args.spec)
    obs = as_observed(law)
    lT, lCs, lCd = hazard_sharp_T(obs), hazard_sharp_C(obs), hazard_dagger_C(obs)
    F, G = survival_sharp(obs), survival_dagger(obs)
    shared = shared_discontinuity_set(obs)
    ss = support_sets(obs)
    header = ["u", "dLambda_T_sharp", "dLambda_C_sharp", "dLambda_C_dagger", "F_sharp", "G_dagger", "shared", "in_S_minus", "in_S", "in_S_plus"]
    rows = [
        [u, lT.jump(u), lCs.jump(u), lCd.jump(u), F(u), G(u), u in shared, u in ss.S_minus, u in ss.S, u in ss.S_plus]
        for u in obs.grid
    ]
    doc = {
        "latent": isinstance(law, LatentLaw),
        "tau": fmt.rational(ss.tau),
        "shared_discontinuities": [str(u) for u in sorted(shared)],
        "rows": [
            {h: (fmt.rational(v) if not isinstance(v, bool) else v) for h, v in zip(header, row)}
            for row in rows
        ],
    }
    if args.format == "tsv":
        sys.stdout.write(f"# tau\t{fmt.cell(ss.tau)}\n")
    _emit(args, doc, header, rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    law = _law(args.spec)
    for key in args.h:
        if key not in FUNCTIONALS:
            raise InputError(f"unknown functional {key!r}; choose from {', '.join(sorted(FUNCTIONALS))}")
    laws = [(Path(args.spec).stem if Path(args.spec).exists() else args.spec, law)]
    laws += random_laws(args.seed, args.random_laws)
    reports = [run_suite(l, name, extra=args.h) for name, l in laws]
    branches = {"indistinguishable": 0, "differ": 0}
    for r in reports:
        branches[r.info["indistinguishability"]] += 1
    violations = sum(len(r.violations) for r in reports)
    doc = {
        "ok": violations == 0,
        "laws": len(reports),
        "violations": violations,
        "branches": branches,
        "reports": [r.to_dict() for r in reports],
    }
    if args.format == "tsv":
        rows = [[r.name, r.ok, len(r.checks), len(r.violations), r.info["indistinguishability"]] for r in reports]
        _emit(args, doc, ["law", "ok", "checks", "violations", "branch"], rows)
    else:
        _emit(args, doc)
    return EXIT_OK if violations == 0 else EXIT_VIOLATION


def cmd_km(args) -> int:
    if not 0 < args.level < 1:
        raise InputError("--level must lie in (0, 1)")
    try:
        sample = read_csv(args.data)
    except OSError as exc:
        raise InputError(f"cannot read data: {exc}") from None
    fit = km_fit(sample)
    times = _times(args.t) or sorted({o.x for o in sample.counts if o.delta == 1}) or sorted({o.x for o in sample.counts})
    last = fit.last_time
    header = ["t", "F_hat", "G_dagger_hat", "sigma2_hat", "lower", "upper", "frozen"]
    rows, out = [], []
    for t in times:
        ci = km_confint(fit, t, args.level)
        s2 = greenwood_variance(fit, t)
        row = [t, fit.F_hat(t), fit.G_dagger_hat(t), s2, ci.lower, ci.upper, t > last]
        rows.append(row)
        out.append(
            {
                "t": fmt.rational(t),
                "F_hat": fmt.rational(fit.F_hat(t)),
                "G_dagger_hat": fmt.rational(fit.G_dagger_hat(t)),
                "sigma2_hat": fmt.rational(s2),
                "lower": ci.lower,
                "upper": ci.upper,
                "unbounded": ci.unbounded,
                "frozen": t > last,
            }
        )
    _emit(args, {"n": sample.n, "level": args.level, "rows": out}, header, rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    law = _law(args.spec)
    if not isinstance(law, LatentLaw):
        raise InputError("simulate needs a latent law (joint pmf or marginals)")
    try:
        cfg = ExperimentConfig(law, args.n, args.reps, tuple(_times(args.t)), args.seed, args.level, args.workers)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = run_experiment(cfg)
    doc = res.to_dict()
    if args.format == "tsv":
        rows = [[k, c.get("value"), c.get("reference", c.get("target", c.get("bound"))), c["pass"]] for k, c in res.criteria.items()]
        _emit(args, doc, ["criterion", "value", "reference", "pass"], rows)
    else:
        _emit(args, doc)
    return EXIT_OK if res.ok else EXIT_VIOLATION


def ifcheck(law, times) -> dict:
    """Atomwise comparison of the two influence-function forms plus their moments."""
    obs = as_observed(law)
    pop = KMEstimate.from_law(obs)
    entries, ok = [], True
    for t in times:
        if pop.G_dagger_hat(t) == 0:
            entries.append({"t": fmt.rational(t), "skipped": True, "reason": "Gdag(t) = 0"})
            continue
        atoms, mean, second = [], Fraction(0), Fraction(0)
        agree_all = True
        for o in obs.atoms:
            a = influence_function(o, obs, t, "censor-form")
            b = influence_function(o, obs, t, "failure-form")
            p = obs.prob(o.x, o.delta)
            mean += p * b
            second += p * b * b
            agree_all &= a == b
            atoms.append({"x": str(o.x), "delta": o.delta, "p": fmt.rational(p), "censor_form": fmt.rational(a), "failure_form": fmt.rational(b), "agree": a == b})
        s2 = greenwood_variance(pop, t)
        entry_ok = agree_all and mean == 0 and second == s2
        ok &= entry_ok
        entries.append(
            {
                "t": fmt.rational(t),
                "skipped": False,
                "atoms": atoms,
                "mean": fmt.rational(mean),
                "second_moment": fmt.rational(second),
                "sigma2": fmt.rational(s2),
                "ok": entry_ok,
            }
        )
    return {"ok": ok, "entries": entries}


def cmd_ifcheck(args) -> int:
    law = _law(args.spec)
    times = _times(args.t) or list(as_observed(law).grid)
    doc = ifcheck(law, times)
    if args.format == "tsv":
        rows = []
        for e in doc["entries"]:
            if e["skipped"]:
                rows.append([e["t"]["exact"], "skipped", e["reason"], "", ""])
            else:
                rows.append([e["t"]["exact"], e["ok"], e["mean"]["exact"], e["second_moment"]["exact"], e["sigma2"]["exact"]])
        _emit(args, doc, ["t", "ok", "mean", "second_moment", "sigma2"], rows)
    else:
        _emit(args, doc)
    return EXIT_OK if doc["ok"] else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="survmart", description="Exact checks for censored-data martingales and Kaplan-Meier asymptotics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help, default_format="tsv"):
        p = sub.add_parser(name, help=help)
        p.add_argument("--format", choices=("tsv", "json"), default=default_format)
        p.set_defaults(fn=fn)
        return p

    p = add("describe", cmd_describe, "population hazards, survival functions and support sets")
    p.add_argument("--spec", required=True, help="JSON spec file or fixture name (U2, NSD)")

    p = add("verify", cmd_verify, "run the exact oracle suite", default_format="json")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-laws", type=int, default=0, metavar="K")
    p.add_argument("--h", action="append", default=[], metavar="FUNCTIONAL", help="extra integrand for M_Cdag transforms")

    p = add("km", cmd_km, "Kaplan-Meier fit from a time,status CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--t", help="comma-separated evaluation times")
    p.add_argument("--level", type=float, default=0.95)

    p = add("simulate", cmd_simulate, "Monte Carlo check of variance, covariance and coverage", default_format="json")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--workers", type=int, default=None, help="defaults to $SURVMART_THREADS or 1")

    p = add("ifcheck", cmd_ifcheck, "compare the two influence-function forms exactly", default_format="json")
    p.add_argument("--spec", required=True)
    p.add_argument("--t")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "workers", 0) is None:
            args.workers = default_workers()
        return args.fn(args)
    except (SpecError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
