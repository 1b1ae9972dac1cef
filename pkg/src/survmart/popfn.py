"""Population-level functions of an observed (or latent) law.

Every hazard is built from its jump map with the 0/0 = 0 convention applied as
an explicit branch, so all results are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .model import LatentLaw, ObservedLaw, TimeGrid, induce_observed, support_sets
from .stepfn import StepFunction

__all__ = [
    "ExpectedIncrements",
    "expected_increments",
    "ratio",
    "hazard_sharp_T",
    "hazard_sharp_C",
    "hazard_dagger_C",
    "latent_hazards",
    "check_identification",
    "shared_discontinuity_set",
    "sharp_dagger_relation_check",
    "survival_sharp",
    "survival_dagger",
    "survival_factorization_check",
    "IdentityReport",
]

ZERO = Fraction(0)


def ratio(num: Fraction, den: Fraction) -> Fraction:
    """``num / den`` with 0/0 = 0. A nonzero numerator over zero is an error."""
    if den == 0:
        if num != 0:
            raise ZeroDivisionError(f"{num}/0 is not covered by the 0/0 convention")
        return ZERO
    return num / den


@dataclass(frozen=True)
class ExpectedIncrements:
    """Expected counting increments and at-risk expectations of a law.

    Each method accepts any time ``u``; off-grid times give zero increments and
    at-risk expectations computed from the pmf directly.
    """

    obs: ObservedLaw

    def dEN_T(self, u) -> Fraction:
        return self.obs.prob(u, 1) if u in self.obs.grid else ZERO

    def dEN_C(self, u) -> Fraction:
        return self.obs.prob(u, 0) if u in self.obs.grid else ZERO

    def EY_sharp(self, u) -> Fraction:
        return self.obs.expect(lambda o: o.x >= u)

    def EY_sharp_plus(self, u) -> Fraction:
        return self.obs.expect(lambda o: o.x > u)

    def EY_dagger(self, u) -> Fraction:
        return self.obs.expect(lambda o: o.x > u or (o.x == u and o.delta == 0))

    def table(self) -> list[tuple[Fraction, Fraction, Fraction, Fraction, Fraction]]:
        return [
            (u, self.dEN_T(u), self.dEN_C(u), self.EY_sharp(u), self.EY_dagger(u))
            for u in self.obs.grid
        ]


def expected_increments(obs: ObservedLaw) -> ExpectedIncrements:
    return ExpectedIncrements(obs)


@lru_cache(maxsize=1024)
def hazard_sharp_T(obs: ObservedLaw) -> StepFunction:
    """Failure hazard against the usual at-risk expectation E Y#."""
    m = expected_increments(obs)
    return StepFunction(obs.grid, 0, {u: ratio(m.dEN_T(u), m.EY_sharp(u)) for u in obs.grid})


@lru_cache(maxsize=1024)
def hazard_sharp_C(obs: ObservedLaw) -> StepFunction:
    """Censoring hazard against E Y# (the Doob-Meyer compensator's hazard)."""
    m = expected_increments(obs)
    return StepFunction(obs.grid, 0, {u: ratio(m.dEN_C(u), m.EY_sharp(u)) for u in obs.grid})


@lru_cache(maxsize=1024)
def hazard_dagger_C(obs: ObservedLaw) -> StepFunction:
    """Censoring hazard against the modified at-risk expectation E Ydag."""
    m = expected_increments(obs)
    return StepFunction(obs.grid, 0, {u: ratio(m.dEN_C(u), m.EY_dagger(u)) for u in obs.grid})


def _latent_hazard(marg: dict[Fraction, Fraction], grid: TimeGrid) -> StepFunction:
    jumps, surv = {}, sum(marg.values(), ZERO)
    for u in grid:
        p = marg.get(u, ZERO)
        jumps[u] = ratio(p, surv)
        surv -= p
    return StepFunction(grid, 0, jumps)


def latent_hazards(law: LatentLaw) -> tuple[StepFunction, StepFunction]:
    """Marginal cumulative hazards of T and C under the latent law."""
    return _latent_hazard(law.marginal_T(), law.grid_T), _latent_hazard(law.marginal_C(), law.grid_C)


@dataclass
class IdentityReport:
    """Outcome of an exact identity check. ``violations`` must be empty."""

    name: str
    checked: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"name": self.name, "checked": self.checked, "ok": self.ok, "violations": self.violations}


def check_identification(law: LatentLaw) -> IdentityReport:
    """Compare identified hazards with the latent ones where they are identified.

    Failure hazards are compared on ``{t: E Y#(t) > 0}`` and censoring hazards
    (dagger version) on ``{t: E Ydag(t) > 0}``, at every point of both grids.
    """
    if not law.independent:
        raise ValueError("identification requires a law flagged as independent")
    obs = induce_observed(law)
    m = expected_increments(obs)
    lam_T, lam_C = latent_hazards(law)
    lT, lC = hazard_sharp_T(obs), hazard_dagger_C(obs)
    rep = IdentityReport("identification")
    for t in obs.grid:
        if m.EY_sharp(t) > 0:
            rep.checked += 1
            if lT(t) != lam_T(t):
                rep.violations.append({"t": t, "hazard": "T", "identified": lT(t), "latent": lam_T(t)})
        if m.EY_dagger(t) > 0:
            rep.checked += 1
            if lC(t) != lam_C(t):
                rep.violations.append({"t": t, "hazard": "C", "identified": lC(t), "latent": lam_C(t)})
    return rep


def shared_discontinuity_set(obs: ObservedLaw) -> frozenset:
    """Grid points where both the failure hazard and the dagger censoring hazard jump."""
    lT, lC = hazard_sharp_T(obs), hazard_dagger_C(obs)
    return frozenset(u for u in obs.grid if lT.jump(u) * lC.jump(u) > 0)


def sharp_dagger_relation_check(obs: ObservedLaw) -> IdentityReport:
    """Check dLambda_C# = (1 - dLambda_T#) dLambda_Cdag and E Ydag / E Y# - 1 = -dLambda_T#."""
    m = expected_increments(obs)
    lT, lCs, lCd = hazard_sharp_T(obs), hazard_sharp_C(obs), hazard_dagger_C(obs)
    rep = IdentityReport("sharp_dagger_relation")
    for u in obs.grid:
        ey = m.EY_sharp(u)
        if ey == 0:
            continue
        rep.checked += 2
        lhs, rhs = lCs.jump(u), (1 - lT.jump(u)) * lCd.jump(u)
        if lhs != rhs:
            rep.violations.append({"u": u, "identity": "relation", "lhs": lhs, "rhs": rhs})
        lhs, rhs = m.EY_dagger(u) / ey - 1, -lT.jump(u)
        if lhs != rhs:
            rep.violations.append({"u": u, "identity": "at_risk_ratio", "lhs": lhs, "rhs": rhs})
    return rep


def _product_integral(hazard: StepFunction) -> StepFunction:
    values, acc = [], Fraction(1)
    for u in hazard.grid:
        acc *= 1 - hazard.jump(u)
        values.append(acc)
    return StepFunction.from_values(hazard.grid, values, 1)


@lru_cache(maxsize=1024)
def survival_sharp(obs: ObservedLaw) -> StepFunction:
    """Product integral of the failure hazard."""
    return _product_integral(hazard_sharp_T(obs))


@lru_cache(maxsize=1024)
def survival_dagger(obs: ObservedLaw) -> StepFunction:
    """Product integral of the dagger censoring hazard."""
    return _product_integral(hazard_dagger_C(obs))


def survival_factorization_check(obs: ObservedLaw) -> IdentityReport:
    """P(X > t) = F#(t) Gdag(t) at every grid point."""
    F, G = survival_sharp(obs), survival_dagger(obs)
    m = expected_increments(obs)
    rep = IdentityReport("survival_factorization")
    for t in obs.grid:
        rep.checked += 1
        if m.EY_sharp_plus(t) != F(t) * G(t):
            rep.violations.append({"t": t, "P(X>t)": m.EY_sharp_plus(t), "F*G": F(t) * G(t)})
    return rep


def support_check(obs: ObservedLaw) -> IdentityReport:
    """Nesting of the support sets S- within S within S+."""
    ss = support_sets(obs)
    rep = IdentityReport("support_nesting", checked=1)
    if not (ss.S_minus <= ss.S <= ss.S_plus):
        rep.violations.append({"S-": sorted(ss.S_minus), "S": sorted(ss.S), "S+": sorted(ss.S_plus)})
    return rep
