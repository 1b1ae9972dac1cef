"""Kaplan-Meier fitting, variance and covariance, influence functions, Wald intervals."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from statistics import NormalDist
from typing import Iterable

from .model import LatentLaw, Observation, ObservedLaw, SpecError, TimeGrid, as_observed, to_fraction
from .pathproc import martingale_paths
from .popfn import hazard_dagger_C, hazard_sharp_T, survival_dagger, survival_sharp
from .stepfn import StepFunction

__all__ = [
    "Sample",
    "empirical_law",
    "KMEstimate",
    "km_fit",
    "km_variance",
    "km_cov",
    "greenwood_variance",
    "km_covariance",
    "influence_function",
    "ConfidenceInterval",
    "km_confint",
    "read_csv",
]


@dataclass(frozen=True, eq=False)
class Sample:
    """Multiset of observations, stored as counts per distinct ``(x, delta)``."""

    counts: Counter

    def __post_init__(self):
        if not self.counts or sum(self.counts.values()) < 1:
            raise ValueError("a sample needs at least one observation")
        if any(k <= 0 for k in self.counts.values()):
            raise ValueError("observation counts must be positive")

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "Sample":
        return cls(Counter(o if isinstance(o, Observation) else Observation(*o) for o in pairs))

    @property
    def n(self) -> int:
        return sum(self.counts.values())

    @property
    def observations(self) -> list[Observation]:
        return sorted(self.counts.elements())


def empirical_law(s: Sample) -> ObservedLaw:
    n = s.n
    return ObservedLaw(TimeGrid(sorted({o.x for o in s.counts})), {o: Fraction(k, n) for o, k in s.counts.items()})


@dataclass(frozen=True, eq=False)
class KMEstimate:
    """Kaplan-Meier fit or, with ``n=None``, the population functions of a law.

    ``F_hat`` estimates F#, ``G_dagger_hat`` the product integral of the dagger
    censoring hazard. Both are frozen beyond the last observed time.
    """

    F_hat: StepFunction
    G_dagger_hat: StepFunction
    Lambda_T_hat: StepFunction
    Lambda_C_dagger_hat: StepFunction
    n: int | None

    @classmethod
    def from_law(cls, law: LatentLaw | ObservedLaw) -> "KMEstimate":
        obs = as_observed(law)
        return cls(survival_sharp(obs), survival_dagger(obs), hazard_sharp_T(obs), hazard_dagger_C(obs), None)

    def sigma2(self, t) -> Fraction | float:
        return greenwood_variance(self, t)

    @property
    def last_time(self) -> Fraction:
        return self.F_hat.grid.last


def km_fit(s: Sample) -> KMEstimate:
    """Product-limit fit from the risk sets of a sample.

    At each distinct time u with d failures, c censorings and r subjects having
    X >= u, the failure hazard jumps by d/r and the dagger censoring hazard by
    c/(r - d), with 0/0 = 0.
    """
    if not isinstance(s, Sample):
        s = Sample.from_pairs(s)
    n = s.n
    times = sorted({o.x for o in s.counts})
    grid = TimeGrid(times)
    at_risk = n
    dT, dC, F, G = {}, {}, [], []
    f = g = Fraction(1)
    for u in times:
        d = s.counts.get(Observation(u, 1), 0)
        c = s.counts.get(Observation(u, 0), 0)
        hT = Fraction(d, at_risk) if at_risk else Fraction(0)
        r_dag = at_risk - d
        hC = Fraction(c, r_dag) if r_dag else Fraction(0)
        dT[u], dC[u] = hT, hC
        f *= 1 - hT
        g *= 1 - hC
        F.append(f)
        G.append(g)
        at_risk -= d + c
    return KMEstimate(
        StepFunction.from_values(grid, F, 1),
        StepFunction.from_values(grid, G, 1),
        StepFunction(grid, 0, dT),
        StepFunction(grid, 0, dC),
        n,
    )


def _integral(F: StepFunction, G: StepFunction, t) -> Fraction | float:
    """Integral over (0, t] of 1/G(u-) d(1/F(u)), for F(t) > 0."""
    total = Fraction(0)
    for u in F.grid:
        if u > t:
            break
        dF = F.jump(u)
        if not dF:
            continue
        g_left = G.left(u)
        if g_left == 0:
            return math.inf
        total += (1 / F(u) - 1 / F.left(u)) / g_left
    return total


def km_variance(F: StepFunction, G: StepFunction, t) -> Fraction | float:
    """F(t)^2 times the integral of 1/G(u-) d(1/F(u)) over (0, t]; zero where F(t) = 0."""
    ft = F(t)
    if ft == 0:
        return Fraction(0)
    integral = _integral(F, G, t)
    return integral if integral == math.inf else ft * ft * integral


def km_cov(F: StepFunction, G: StepFunction, s, t) -> Fraction | float:
    lo = min(Fraction(s), Fraction(t))
    fs, ft = F(s), F(t)
    if fs == 0 or ft == 0:
        return Fraction(0)
    integral = _integral(F, G, lo)
    return integral if integral == math.inf else fs * ft * integral


def greenwood_variance(e: KMEstimate, t) -> Fraction | float:
    """Plugin asymptotic variance of sqrt(n)(F_hat(t) - F#(t)); ``math.inf`` marks a blow-up."""
    return km_variance(e.F_hat, e.G_dagger_hat, t)


def km_covariance(e: KMEstimate, s, t) -> Fraction | float:
    return km_cov(e.F_hat, e.G_dagger_hat, s, t)


def _ratio_F(lam_T: StepFunction, u, t) -> Fraction:
    """F#(t)/F#(u) as the product of (1 - dLambda_T#) over (u, t]."""
    r = Fraction(1)
    for v, j in lam_T.jumps.items():
        if u < v <= t:
            r *= 1 - j
    return r


def influence_function(o: Observation, law, t, form: str = "failure-form") -> Fraction:
    """Kaplan-Meier influence function at ``t`` evaluated on one observation.

    ``censor-form`` writes it through the dagger censoring martingale and needs
    Gdag(t) > 0; ``failure-form`` integrates the failure martingale against
    1/Gdag(u-). The ratio F#(t)/F#(u) is taken as a product over (u, t], so
    points where F# vanishes need no special case.
    """
    if isinstance(law, KMEstimate):
        raise TypeError("pass the empirical ObservedLaw of the sample, not a KMEstimate")
    obs = as_observed(law)
    t = Fraction(t)
    F, G, lamT = survival_sharp(obs), survival_dagger(obs), hazard_sharp_T(obs)
    mp = martingale_paths(o, obs)
    if form == "censor-form":
        if G(t) == 0:
            raise ValueError(f"censor-form needs Gdag(t) > 0; Gdag({t}) = 0")
        value = Fraction(int(o.x > t)) / G(t) - F(t)
        for u, dm in mp.M_C_dagger.jumps.items():
            if u <= t:
                value += _ratio_F(lamT, u, t) * dm / G(u)
        return value
    if form == "failure-form":
        value = Fraction(0)
        for u, dm in mp.M_T_sharp.jumps.items():
            if u > t:
                continue
            term = _ratio_F(lamT, u, t) * dm
            if not term:
                continue
            g_left = G.left(u)
            if g_left == 0:
                raise ValueError(f"failure-form needs Gdag(u-) > 0; Gdag({u}-) = 0")
            value -= term / g_left
        return value
    raise ValueError(f"unknown form {form!r}")


@dataclass(frozen=True)
class ConfidenceInterval:
    estimate: float
    lower: float
    upper: float
    level: float
    unbounded: bool = False

    def covers(self, value) -> bool:
        return self.lower <= float(value) <= self.upper


def km_confint(e: KMEstimate, t, level: float = 0.95) -> ConfidenceInterval:
    """Wald interval F_hat(t) +/- z sqrt(sigma2_hat(t)/n), clipped to [0, 1]."""
    if e.n is None:
        raise ValueError("confidence intervals need a fitted estimate with a sample size")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    est = float(e.F_hat(t))
    var = greenwood_variance(e, t)
    if var == math.inf:
        return ConfidenceInterval(est, 0.0, 1.0, level, unbounded=True)
    z = NormalDist().inv_cdf(0.5 + level / 2)
    half = z * math.sqrt(float(var) / e.n)
    return ConfidenceInterval(est, max(0.0, est - half), min(1.0, est + half), level)


def read_csv(path: str | Path) -> Sample:
    """Read ``time,status`` rows; raises SpecError listing every bad row number."""
    bad, pairs = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:2]] != ["time", "status"]:
            raise SpecError("header must be 'time,status'", "line 1")
        for line, row in enumerate(reader, start=2):
            try:
                x = to_fraction((row.get("time") or "").strip())
                status = (row.get("status") or "").strip()
                if status not in ("0", "1"):
                    raise SpecError(f"status must be 0 or 1, got {status!r}")
                pairs.append(Observation(x, int(status)))
            except SpecError as exc:
                bad.append(f"row {line}: {exc}")
    if bad:
        raise SpecError("; ".join(bad), "data")
    if not pairs:
        raise SpecError("no observations", "data")
    return Sample.from_pairs(pairs)
