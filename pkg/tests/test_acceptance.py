"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line shown in the pytest terminal summary.
``python tests/test_acceptance.py`` prints the same lines without pytest.
"""

from __future__ import annotations

import functools
import random
import subprocess
import sys
import time
from fractions import Fraction as Q
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))
from conftest import record_acceptance  # noqa: E402

from survmart.cli import ifcheck
from survmart.estim import KMEstimate, Sample, empirical_law, greenwood_variance, km_fit
from survmart.mc import ExperimentConfig, run_experiment
from survmart.model import NSD, U2
from survmart.oracle import run_suite
from survmart.popfn import hazard_dagger_C, hazard_sharp_T, survival_dagger, survival_sharp
from survmart.randlaws import random_laws

ROOT = Path(__file__).resolve().parent.parent
RANDOM_SEED = 0
MC_SEED = 7


def _report(cid: int, ok: bool, detail: str) -> None:
    line = f"criterion {cid}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    record_acceptance(line)


@functools.lru_cache(maxsize=None)
def suite():
    laws = [("U2", U2), ("NSD", NSD)] + random_laws(RANDOM_SEED, 50)
    start = time.perf_counter()
    reports = [(name, law, run_suite(law, name)) for name, law in laws]
    return reports, time.perf_counter() - start


def _checks(prefixes, reports):
    bad, total = [], 0
    for name, _, rep in reports:
        for c in rep.checks:
            if c.name.startswith(prefixes):
                total += 1
                if not c.ok:
                    bad.append((name, c.name))
    return total, bad


def criterion_1():
    reports, elapsed = suite()
    names = (
        "martingale[M_C_dagger]",
        "g_drift[M_C_dagger]",
        "doob_sums",
        "dag_dm_decomposition",
        "sharp_dagger_relation",
    )
    total, bad = _checks(names, reports)
    ok = not bad and total == len(names) * len(reports) and elapsed < 10
    return ok, f"{total} checks on {len(reports)} laws, {len(bad)} violations, {elapsed:.2f}s (< 10s)"


def criterion_2():
    reports, _ = suite()
    rand = reports[2:]
    total, bad = _checks(("hazard_iff", "indistinguishability_iff"), rand)
    branches = [rep.info["indistinguishability"] for _, _, rep in rand]
    n_diff, n_same = branches.count("differ"), branches.count("indistinguishable")
    ok = not bad and n_diff >= 10 and n_same >= 10
    return ok, f"{total} iff checks, {len(bad)} violations; branches differ={n_diff} indistinguishable={n_same}"


def criterion_3():
    reports, _ = suite()
    total, bad = _checks(("transform[", "covariation[", "orthogonality["), reports)
    variants = {c.name.split(":")[0] for _, _, r in reports for c in r.checks if c.name.startswith("covariation[")}
    witnesses = [
        e for _, _, r in reports for e in r.expected_failures if e["name"] == "adapted_only_transform[deltaNC]"
    ]
    found = sum(e["violation_found"] for e in witnesses)
    consistent = all(e["consistent"] for e in witnesses)
    ok = not bad and len(variants) == 3 and found > 0 and consistent
    return ok, f"{total} checks, {len(bad)} violations, {len(variants)} covariation variants; adapted-only drift found on {found} laws"


def criterion_4():
    reports, _ = suite()
    indep = [(n, r) for n, law, r in reports[2:] if law.independent]
    bad = [n for n, r in indep if not any(c.name == "identification" and c.ok for c in r.checks)]
    return not bad and len(indep) > 0, f"{len(indep)} independent laws, {len(bad)} identification failures"


def criterion_5():
    out = {name: ifcheck(law, list(range(1, 5))) for name, law in (("U2", U2), ("NSD", NSD))}
    s2 = greenwood_variance(KMEstimate.from_law(U2), 1)
    evaluated = sum(not e["skipped"] for d in out.values() for e in d["entries"])
    ok = all(d["ok"] for d in out.values()) and s2 == Q(1, 4) and evaluated > 0
    return ok, f"{evaluated} (law, t) pairs agree with E[IF]=0 and E[IF^2]=sigma2; U2 sigma2(1) = {s2}"


def criterion_6():
    rng = random.Random(1)
    samples = []
    for _, law in random_laws(5, 40):
        cells = list(law.pmf)
        weights = [float(p) for p in law.pmf.values()]
        pairs = []
        for t, c in rng.choices(cells, weights, k=rng.randint(1, 60)):
            pairs.append((min(t, c), int(t <= c)))
        samples.append(Sample.from_pairs(pairs))
    bad = 0
    for s in samples:
        e, obs = km_fit(s), empirical_law(s)
        same = (
            e.F_hat == survival_sharp(obs)
            and e.G_dagger_hat == survival_dagger(obs)
            and e.Lambda_T_hat == hazard_sharp_T(obs)
            and e.Lambda_C_dagger_hat == hazard_dagger_C(obs)
        )
        bad += not same
    return bad == 0, f"{len(samples)} samples, {bad} mismatches"


def criterion_7():
    start = time.perf_counter()
    res = run_experiment(ExperimentConfig(U2, 10_000, 1_000, (1,), seed=MC_SEED))
    elapsed = time.perf_counter() - start
    v, c = res.criteria["variance[t=1]"], res.criteria["coverage[t=1]"]
    ok = v["pass"] is True and c["pass"] is True and elapsed < 60
    return ok, f"Var = {v['value']:.5f} (rel err {v['relative_error']:.4f} <= 0.05), coverage = {c['value']:.3f}, {elapsed:.1f}s"


def criterion_8():
    res = run_experiment(ExperimentConfig(NSD, 10_000, 1_000, (1, 2), seed=MC_SEED))
    c = res.criteria["covariance[1,2]"]
    ref = res.population["sigma2_st"]["1,2"]["exact"]
    return c["pass"] is True, f"Cov = {c['value']:.5f} vs {ref} (rel err {c['relative_error']:.4f} <= 0.10)"


def criterion_9():
    argv = [sys.executable, "-m", "survmart", "simulate", "--spec", "specs/u2.json", "--n", "10000",
            "--reps", "1000", "--t", "1", "--seed", str(MC_SEED)]
    runs = [subprocess.run(argv, capture_output=True, cwd=ROOT) for _ in range(2)]
    same = runs[0].stdout == runs[1].stdout and len(runs[0].stdout) > 0
    return same and runs[0].returncode == 0, f"two runs, {len(runs[0].stdout)} bytes each, identical={same}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("cid", range(1, len(CRITERIA) + 1))
def test_criterion(cid):
    ok, detail = CRITERIA[cid - 1]()
    _report(cid, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for i, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        _report(i, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
