"""Replicated Kaplan-Meier experiments against the asymptotic variance and covariance.

Replication ``r`` draws from its own Philox4x64-10 substream: key = seed and the
counter jumped by ``r * 2**128``, so any replication can be regenerated alone
and worker count never changes the output.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from statistics import NormalDist

import numpy as np

from .estim import KMEstimate, Sample, greenwood_variance, km_confint, km_covariance, km_fit
from .fmt import rational as _q
from .model import LatentLaw, Observation

__all__ = [
    "THREADS_ENV",
    "ExperimentConfig",
    "ExperimentResult",
    "replication_rng",
    "sample_latent",
    "run_experiment",
    "default_workers",
]

THREADS_ENV = "SURVMART_THREADS"
VARIANCE_RTOL = 0.05
COVARIANCE_RTOL = 0.10
COVERAGE_ATOL = 0.02


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    law: LatentLaw
    n: int
    replications: int
    t_points: tuple
    seed: int = 0
    level: float = 0.95
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        pts = tuple(sorted({Fraction(t) for t in self.t_points}))
        if not pts:
            raise ValueError("need at least one t point")
        grid = self.law.grid_T.union(self.law.grid_C)
        for t in pts:
            if t not in grid:
                raise ValueError(f"t={t} is not a grid time of the law")
        object.__setattr__(self, "t_points", pts)

    def echo(self) -> dict:
        return {
            "n": self.n,
            "replications": self.replications,
            "t_points": [str(t) for t in self.t_points],
            "seed": self.seed,
            "level": self.level,
            "rng": "numpy Philox4x64-10, key=seed, counter jumped by replication index",
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    population: dict
    per_t: dict
    pairs: dict
    degenerate: int
    criteria: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c["pass"] is not False for c in self.criteria.values())

    def to_dict(self) -> dict:
        return {
            "config": self.config.echo(),
            "population": self.population,
            "empirical": {"per_t": self.per_t, "pairs": self.pairs, "degenerate_fits": self.degenerate},
            "criteria": self.criteria,
            "ok": self.ok,
        }


def replication_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(r))


class _Sampler:
    """Inverse-CDF sampler over the latent cells of a law."""

    def __init__(self, cells: list):
        self.outcomes = [Observation(min(t, c), int(t <= c)) for (t, c), _ in cells]
        self.cdf = np.cumsum([float(p) for _, p in cells])
        self.cdf[-1] = 1.0

    def draw(self, n: int, rng: np.random.Generator) -> Sample:
        idx = np.searchsorted(self.cdf, rng.random(n), side="right")
        counts = np.bincount(idx, minlength=len(self.outcomes))
        out = Counter()
        for o, k in zip(self.outcomes, counts.tolist()):
            if k:
                out[o] += k
        return Sample(out)


def sample_latent(law: LatentLaw, n: int, rng: np.random.Generator) -> Sample:
    """``n`` i.i.d. draws of (T, C), reported as (T ^ C, I(T <= C))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _Sampler(sorted(law.pmf.items())).draw(n, rng)


def _replicate(args) -> list[tuple]:
    cells, n, seed, t_points, level, start, stop = args
    sampler = _Sampler(cells)
    rows = []
    for r in range(start, stop):
        fit = km_fit(sampler.draw(n, replication_rng(seed, r)))
        row = []
        for t in t_points:
            ci = km_confint(fit, t, level)
            row.append((float(fit.F_hat(t)), ci.lower, ci.upper, ci.unbounded))
        rows.append((r, row))
    return rows


def _chunks(B: int, workers: int) -> list[tuple[int, int]]:
    size = math.ceil(B / workers)
    return [(a, min(B, a + size)) for a in range(0, B, size)]


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Simulate ``cfg.replications`` fits and compare with the population references."""
    pop = KMEstimate.from_law(cfg.law)
    ts = cfg.t_points
    F = {t: pop.F_hat(t) for t in ts}
    sig = {t: greenwood_variance(pop, t) for t in ts}
    cov = {(s, t): km_covariance(pop, s, t) for s, t in combinations(ts, 2)}
    B, n = cfg.replications, cfg.n

    cells = [((t, c), p) for (t, c), p in sorted(cfg.law.pmf.items())]
    jobs = [(cells, n, cfg.seed, ts, cfg.level, a, b) for a, b in _chunks(B, cfg.workers)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(_replicate, jobs))
    else:
        parts = [_replicate(j) for j in jobs]
    rows = sorted((row for part in parts for row in part), key=lambda x: x[0])

    est = np.array([[c[0] for c in row] for _, row in rows])
    lo = np.array([[c[1] for c in row] for _, row in rows])
    hi = np.array([[c[2] for c in row] for _, row in rows])
    unbounded = int(sum(c[3] for _, row in rows for c in row))
    Fv = np.array([float(F[t]) for t in ts])
    Z = math.sqrt(n) * (est - Fv)
    covered = (lo <= Fv) & (Fv <= hi)

    per_t, criteria = {}, {}
    band = 2 * math.sqrt(cfg.level * (1 - cfg.level) / B)
    for j, t in enumerate(ts):
        key = str(t)
        mean = float(Z[:, j].mean())
        var = float(Z[:, j].var(ddof=1)) if B > 1 else None
        cover = float(covered[:, j].mean())
        s2 = sig[t]
        per_t[key] = {
            "mean": mean,
            "variance": var,
            "variance_defined": var is not None,
            "coverage": cover,
            "coverage_within_2se": abs(cover - cfg.level) <= band,
        }
        criteria[f"variance[t={key}]"] = _relative(var, s2, VARIANCE_RTOL)
        if s2 == math.inf:
            criteria[f"mean[t={key}]"] = {"value": mean, "bound": None, "pass": None}
        else:
            bound = 4 * math.sqrt(float(s2) / B)
            criteria[f"mean[t={key}]"] = {"value": mean, "bound": bound, "pass": abs(mean) < bound or mean == 0}
        criteria[f"coverage[t={key}]"] = {
            "value": cover,
            "target": cfg.level,
            "tolerance": COVERAGE_ATOL,
            "pass": abs(cover - cfg.level) <= COVERAGE_ATOL if s2 != 0 else None,
        }
        if s2 == 0:
            criteria[f"coverage[t={key}]"]["note"] = "degenerate interval, zero asymptotic variance"

    pairs = {}
    for (s, t), ref in cov.items():
        i, j = ts.index(s), ts.index(t)
        key = f"{s},{t}"
        c = float(np.cov(Z[:, i], Z[:, j], ddof=1)[0, 1]) if B > 1 else None
        pairs[key] = {"covariance": c}
        criteria[f"covariance[{key}]"] = _relative(c, ref, COVARIANCE_RTOL)

    population = {
        "F": {str(t): _q(F[t]) for t in ts},
        "sigma2": {str(t): _q(sig[t]) for t in ts},
        "sigma2_st": {f"{s},{t}": _q(v) for (s, t), v in cov.items()},
        "z": NormalDist().inv_cdf(0.5 + cfg.level / 2),
    }
    return ExperimentResult(cfg, population, per_t, pairs, unbounded, criteria)


def _relative(value, ref, rtol: float) -> dict:
    """Relative-error criterion; ``pass`` is None when it cannot be evaluated."""
    out = {"value": value, "reference": float(ref) if ref != math.inf else "inf", "tolerance": rtol}
    if value is None:
        out.update(pass_=None, note="undefined with a single replication")
    elif ref == 0 or ref == math.inf:
        out.update(pass_=None, note="relative error undefined for this reference")
    else:
        err = abs(value - float(ref)) / float(ref)
        out.update(relative_error=err, pass_=err <= rtol)
    out["pass"] = out.pop("pass_")
    return out
