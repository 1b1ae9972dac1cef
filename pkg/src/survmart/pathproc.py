"""Pathwise counting processes, centering terms, martingales and transforms.

A path is a single observation evaluated on the law's grid. All Stieltjes
integrals are finite sums over grid jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Mapping

from .model import LatentLaw, Observation, ObservedLaw, TimeGrid, as_observed
from .popfn import hazard_dagger_C, hazard_sharp_C, hazard_sharp_T, IdentityReport
from .stepfn import StepFunction

__all__ = [
    "MEASURABILITY_CLASSES",
    "class_at_least",
    "PathProcess",
    "evaluate_processes",
    "IntegrandProcess",
    "FUNCTIONALS",
    "centering_dagger",
    "centering_dagger_sum",
    "centering_sharp",
    "MartingalePaths",
    "martingale_paths",
    "dag_dm_decomposition_check",
    "transform",
    "transform_path",
    "covariation_centering",
    "COVARIATION_VARIANTS",
]

# weakest to strongest
MEASURABILITY_CLASSES = ("not-adapted", "adapted-only", "half-predictable", "F-predictable")


def class_at_least(measured: str | None, required: str) -> bool:
    if measured is None:
        return False
    return MEASURABILITY_CLASSES.index(measured) >= MEASURABILITY_CLASSES.index(required)


@dataclass(frozen=True)
class PathProcess:
    """Indicator processes of one observation, evaluated at grid times."""

    observation: Observation
    grid: TimeGrid

    @property
    def x(self) -> Fraction:
        return self.observation.x

    @property
    def delta(self) -> int:
        return self.observation.delta

    def N_T(self, u) -> int:
        return int(self.delta == 1 and self.x <= u)

    def N_C(self, u) -> int:
        return int(self.delta == 0 and self.x <= u)

    def dN_T(self, u) -> int:
        return int(self.delta == 1 and self.x == u)

    def dN_C(self, u) -> int:
        return int(self.delta == 0 and self.x == u)

    def N_C_minus(self, u) -> int:
        return self.N_C(u) - self.dN_C(u)

    def Y_sharp(self, u) -> int:
        return int(self.x >= u)

    def Y_sharp_plus(self, u) -> int:
        return int(self.x > u)

    def Y_dagger(self, u) -> int:
        return int(self.N_C_minus(u) == 0 and self.N_T(u) == 0 and self.x >= u)

    def counting_T(self) -> StepFunction:
        return StepFunction.from_values(self.grid, [self.N_T(u) for u in self.grid])

    def counting_C(self) -> StepFunction:
        return StepFunction.from_values(self.grid, [self.N_C(u) for u in self.grid])


def evaluate_processes(o: Observation, grid: TimeGrid) -> PathProcess:
    if o.x not in grid:
        raise ValueError(f"observation time {o.x} is not a grid point")
    return PathProcess(o, grid)


def _path(o, law) -> tuple[PathProcess, ObservedLaw]:
    obs = as_observed(law)
    return (o if isinstance(o, PathProcess) else evaluate_processes(o, obs.grid)), obs


# Integrands -------------------------------------------------------------------

@dataclass(frozen=True)
class IntegrandProcess:
    """A bounded integrand ``H(u, path)`` with a declared measurability class.

    Deterministic integrands are F-predictable by construction. Path
    functionals must be certified by ``oracle.certify`` against a law before
    they can be integrated; ``certified`` then holds the measured class.
    """

    name: str
    rule: Callable[[Fraction, PathProcess], Fraction]
    bound: Fraction
    declared: str
    kind: str = "path-functional"
    certified: str | None = None

    def __call__(self, u, path: PathProcess) -> Fraction:
        v = Fraction(self.rule(u, path))
        if abs(v) > self.bound:
            raise ValueError(f"integrand {self.name} exceeds its bound {self.bound} at u={u}")
        return v

    @property
    def effective_class(self) -> str | None:
        if self.kind == "deterministic-step":
            return "F-predictable"
        return self.certified

    def require(self, required: str) -> None:
        cls = self.effective_class
        if cls is None:
            raise ValueError(f"integrand {self.name} has no verified measurability class")
        if not class_at_least(cls, required):
            raise ValueError(f"integrand {self.name} is {cls}, but {required} is required")

    @classmethod
    def constant(cls, c) -> "IntegrandProcess":
        c = Fraction(c)
        return cls(f"const({c})", lambda u, p: c, abs(c), "F-predictable", "deterministic-step")

    @classmethod
    def step(cls, values: Mapping | StepFunction, name: str = "step") -> "IntegrandProcess":
        """Deterministic integrand taking ``values[u]`` at grid time ``u`` (0 elsewhere)."""
        if isinstance(values, StepFunction):
            fn = values
            table = {u: fn(u) for u in fn.grid}
        else:
            table = {Fraction(u): Fraction(v) for u, v in values.items()}
        bound = max((abs(v) for v in table.values()), default=Fraction(0))
        return cls(name, lambda u, p: table.get(u, Fraction(0)), bound, "F-predictable", "deterministic-step")

    @classmethod
    def indicator_at(cls, a) -> "IntegrandProcess":
        a = Fraction(a)
        return cls.step({a: 1}, name=f"I(u={a})")

    @classmethod
    def functional(cls, name: str, rule, bound, declared: str) -> "IntegrandProcess":
        if declared not in MEASURABILITY_CLASSES:
            raise ValueError(f"unknown measurability class {declared!r}")
        return cls(name, rule, Fraction(bound), declared)

    def times(self, other: "IntegrandProcess") -> "IntegrandProcess":
        """Pointwise product; the declared class is the weaker of the two."""
        weaker = min(self.declared, other.declared, key=MEASURABILITY_CLASSES.index)
        kind = "deterministic-step" if self.kind == other.kind == "deterministic-step" else "path-functional"
        return IntegrandProcess(
            f"{self.name}*{other.name}",
            lambda u, p: self(u, p) * other(u, p),
            self.bound * other.bound,
            weaker,
            kind,
        )

    def certify_as(self, measured: str) -> "IntegrandProcess":
        return replace(self, certified=measured)


FUNCTIONALS: Mapping[str, Callable[[], IntegrandProcess]] = {
    "deltaNT": lambda: IntegrandProcess.functional("deltaNT", lambda u, p: p.dN_T(u), 1, "half-predictable"),
    "deltaNC": lambda: IntegrandProcess.functional("deltaNC", lambda u, p: p.dN_C(u), 1, "adapted-only"),
    "NT": lambda: IntegrandProcess.functional("NT", lambda u, p: p.N_T(u), 1, "half-predictable"),
    "NC": lambda: IntegrandProcess.functional("NC", lambda u, p: p.N_C(u), 1, "adapted-only"),
    "Ysharp": lambda: IntegrandProcess.functional("Ysharp", lambda u, p: p.Y_sharp(u), 1, "F-predictable"),
    "Ydagger": lambda: IntegrandProcess.functional("Ydagger", lambda u, p: p.Y_dagger(u), 1, "half-predictable"),
    "NCminus": lambda: IntegrandProcess.functional(
        "NCminus", lambda u, p: p.N_C_minus(u), 1, "F-predictable"
    ),
}


# Centering terms and martingales ----------------------------------------------

def centering_dagger(o, law) -> StepFunction:
    """A_Cdag on the path, from its closed form in X, delta and Lambda_Cdag."""
    path, obs = _path(o, law)
    lam = hazard_dagger_C(obs)
    at_x = lam(path.x) if path.delta == 0 else lam.left(path.x)
    return StepFunction.from_values(obs.grid, [lam(t) if path.x > t else at_x for t in obs.grid])


def centering_dagger_sum(o, law) -> StepFunction:
    """A_Cdag as the defining sum of Ydag(u) dLambda_Cdag(u)."""
    path, obs = _path(o, law)
    lam = hazard_dagger_C(obs)
    return StepFunction(obs.grid, 0, {u: path.Y_dagger(u) * lam.jump(u) for u in obs.grid})


def centering_sharp(o, law, cause: str = "C") -> StepFunction:
    """Integral of Y# against Lambda_C# (or Lambda_T# for ``cause="T"``)."""
    path, obs = _path(o, law)
    lam = hazard_sharp_C(obs) if cause == "C" else hazard_sharp_T(obs)
    return StepFunction(obs.grid, 0, {u: path.Y_sharp(u) * lam.jump(u) for u in obs.grid})


@dataclass(frozen=True)
class MartingalePaths:
    M_T_sharp: StepFunction
    M_C_sharp: StepFunction
    M_C_dagger: StepFunction

    def __getitem__(self, name: str) -> StepFunction:
        return {"T_sharp": self.M_T_sharp, "C_sharp": self.M_C_sharp, "C_dagger": self.M_C_dagger}[name]


def martingale_paths(o, law) -> MartingalePaths:
    path, obs = _path(o, law)
    return _martingale_paths(path, obs)


@lru_cache(maxsize=65536)
def _martingale_paths(path: PathProcess, obs: ObservedLaw) -> MartingalePaths:
    NT, NC = path.counting_T(), path.counting_C()
    return MartingalePaths(
        NT - centering_sharp(path, obs, "T"),
        NC - centering_sharp(path, obs, "C"),
        NC - centering_dagger(path, obs),
    )


def dag_dm_decomposition_check(o, law) -> IdentityReport:
    """M_Cdag(t) = M_C#(t) + sum over u <= t of dLambda_Cdag(u) dM_T#(u), at every grid t."""
    path, obs = _path(o, law)
    mp = martingale_paths(path, obs)
    lam = hazard_dagger_C(obs)
    correction = StepFunction(obs.grid, 0, {u: lam.jump(u) * mp.M_T_sharp.jump(u) for u in obs.grid})
    rhs = mp.M_C_sharp + correction
    rep = IdentityReport("dag_dm_decomposition")
    for t in obs.grid:
        rep.checked += 1
        if mp.M_C_dagger(t) != rhs(t):
            rep.violations.append(
                {"observation": path.observation, "t": t, "M_C_dagger": mp.M_C_dagger(t), "rhs": rhs(t)}
            )
    return rep


# Transforms and covariation centering -----------------------------------------

def transform(H: IntegrandProcess, M: StepFunction, t, path: PathProcess | None = None) -> Fraction:
    """Sum of H(u) dM(u) over grid u <= t."""
    if H.effective_class is None:
        raise ValueError(f"integrand {H.name} has no verified measurability class")
    if H.kind != "deterministic-step" and path is None:
        raise ValueError("a path-functional integrand needs the path it is evaluated on")
    return sum((H(u, path) * dm for u, dm in M.jumps.items() if u <= t), Fraction(0))


def transform_path(H: IntegrandProcess, M: StepFunction, path: PathProcess | None = None) -> StepFunction:
    """The whole transform as a step function on M's grid."""
    if H.effective_class is None:
        raise ValueError(f"integrand {H.name} has no verified measurability class")
    return _transform_path(H, M, path)


@lru_cache(maxsize=65536)
def _h_values(H: IntegrandProcess, path: PathProcess | None, grid: TimeGrid) -> dict:
    return {u: H(u, path) for u in grid}


@lru_cache(maxsize=65536)
def _transform_path(H: IntegrandProcess, M: StepFunction, path: PathProcess | None) -> StepFunction:
    h = _h_values(H, path, M.grid)
    return StepFunction(M.grid, 0, {u: h[u] * dm for u, dm in M.jumps.items()})


@lru_cache(maxsize=65536)
def _centering_weights(path: PathProcess, obs: ObservedLaw, full: bool) -> tuple:
    lT, lC = hazard_sharp_T(obs), hazard_dagger_C(obs)
    out = []
    for u in obs.grid:
        dC = lC.jump(u)
        if not dC:
            continue
        if full:
            w = (1 - lT.jump(u)) * (1 - dC) * path.Y_sharp(u)
        else:
            w = (1 - dC) * path.Y_dagger(u)
        if w:
            out.append((u, w * dC))
    return tuple(out)


COVARIATION_VARIANTS = {
    "half-pred": "half-predictable",
    "pred-full": "F-predictable",
    "pred-mixed": "F-predictable",
}


def covariation_centering(
    H1: IntegrandProcess, H2: IntegrandProcess, variant: str, o, law
) -> StepFunction:
    """Centering term making the product of two dagger-censoring transforms a martingale.

    ``half-pred`` and ``pred-mixed`` integrate (1 - dLambda_Cdag) Ydag against
    Lambda_Cdag; ``pred-full`` integrates (1 - dLambda_T#)(1 - dLambda_Cdag) Y#.
    The survival ratios G(u)/G(u-) and F(u)/F(u-) are written as one minus the
    hazard jump, which also covers points where the left limit vanishes.
    """
    if variant not in COVARIATION_VARIANTS:
        raise ValueError(f"unknown covariation variant {variant!r}")
    H1.require(COVARIATION_VARIANTS[variant])
    H2.require(COVARIATION_VARIANTS[variant])
    path, obs = _path(o, law)
    h1, h2 = _h_values(H1, path, obs.grid), _h_values(H2, path, obs.grid)
    weights = _centering_weights(path, obs, variant == "pred-full")
    return StepFunction(obs.grid, 0, {u: h1[u] * h2[u] * w for u, w in weights})
