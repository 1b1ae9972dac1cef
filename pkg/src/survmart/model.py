"""Time grids, latent and observed laws, observations and reference fixtures.

All probabilities are exact :class:`fractions.Fraction` values. Floating point
only appears when results are formatted for output.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

__all__ = [
    "SpecError",
    "TimeGrid",
    "Observation",
    "LatentLaw",
    "ObservedLaw",
    "SupportSets",
    "to_fraction",
    "induce_observed",
    "support_sets",
    "U2",
    "NSD",
    "FIXTURES",
    "parse_spec",
    "load_spec",
]


class SpecError(ValueError):
    """Invalid law or distribution spec. ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


def to_fraction(value, field: str | None = None) -> Fraction:
    """Parse an int, decimal string, ``"num/den"`` string or float exactly."""
    if isinstance(value, bool):
        raise SpecError(f"expected a number, got {value!r}", field)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # the shortest repr, not the binary expansion
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"cannot parse {value!r} as a rational", field) from None
    raise SpecError(f"expected a number, got {type(value).__name__}", field)


class _Time(Fraction):
    """A time point with its hash cached; times key most dictionaries here."""

    __slots__ = ("_hash",)

    def __new__(cls, value):
        self = super().__new__(cls, value)
        self._hash = Fraction.__hash__(self)
        return self

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Fraction({self.numerator}, {self.denominator})"


def as_time(value, field: str | None = None) -> Fraction:
    return value if type(value) is _Time else _Time(to_fraction(value, field))


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing, nonempty tuple of positive rational times."""

    points: tuple[Fraction, ...]

    def __init__(self, points: Iterable):
        pts = tuple(as_time(p) for p in points)
        if not pts:
            raise SpecError("time grid must be nonempty")
        if any(p <= 0 for p in pts):
            raise SpecError("time grid points must be strictly positive")
        if any(a >= b for a, b in zip(pts, pts[1:])):
            raise SpecError("time grid must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __iter__(self):
        return iter(self.points)

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.points)
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return self is other or self.points == other.points

    def __len__(self):
        return len(self.points)

    def __contains__(self, t) -> bool:
        return (t if isinstance(t, Fraction) else Fraction(t)) in self._index

    def __getitem__(self, i):
        return self.points[i]

    @property
    def _index(self) -> dict[Fraction, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {p: i for i, p in enumerate(self.points)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def index(self, t) -> int:
        return self._index[Fraction(t)]

    def union(self, other: "TimeGrid") -> "TimeGrid":
        return TimeGrid(sorted(set(self.points) | set(other.points)))

    @property
    def last(self) -> Fraction:
        return self.points[-1]


@dataclass(frozen=True, order=True)
class Observation:
    """One observed pair: time at risk ``x`` and failure indicator ``delta``."""

    x: Fraction
    delta: int

    def __post_init__(self):
        x = as_time(self.x, "x")
        if x <= 0:
            raise SpecError(f"observation time must be positive, got {x}", "x")
        if self.delta not in (0, 1):
            raise SpecError(f"failure indicator must be 0 or 1, got {self.delta!r}", "delta")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "delta", int(self.delta))

    def __repr__(self):
        return f"Observation({self.x}, {self.delta})"


def _check_pmf(pmf: Mapping, what: str) -> None:
    for key, p in pmf.items():
        if p < 0:
            raise SpecError(f"negative probability {p} at {key}", what)
    total = sum(pmf.values(), Fraction(0))
    if total != 1:
        raise SpecError(f"probabilities sum to {total}, not 1", what)


@dataclass(frozen=True, eq=False)
class LatentLaw:
    """Joint pmf of the latent failure time T and censoring time C.

    ``pmf`` maps ``(t, c)`` to a probability. Setting ``independent`` asserts
    that the pmf factorizes exactly into its marginals; this is checked.
    """

    grid_T: TimeGrid
    grid_C: TimeGrid
    pmf: Mapping[tuple[Fraction, Fraction], Fraction]
    independent: bool = False

    def __post_init__(self):
        clean = {}
        for (t, c), p in self.pmf.items():
            t, c, p = to_fraction(t), to_fraction(c), to_fraction(p)
            if t not in self.grid_T:
                raise SpecError(f"t={t} is not on grid_T", "pmf")
            if c not in self.grid_C:
                raise SpecError(f"c={c} is not on grid_C", "pmf")
            if p:
                clean[(t, c)] = clean.get((t, c), Fraction(0)) + p
        _check_pmf(clean, "pmf")
        object.__setattr__(self, "pmf", MappingProxyType(clean))
        if self.independent:
            mt, mc = self.marginal_T(), self.marginal_C()
            for t in self.grid_T:
                for c in self.grid_C:
                    if self.pmf.get((t, c), 0) != mt.get(t, 0) * mc.get(c, 0):
                        raise SpecError(
                            f"independent flag set but pmf({t},{c}) does not factorize", "independent"
                        )

    @classmethod
    def from_marginals(cls, marg_T: Mapping, marg_C: Mapping) -> "LatentLaw":
        mt = {to_fraction(k): to_fraction(v) for k, v in marg_T.items()}
        mc = {to_fraction(k): to_fraction(v) for k, v in marg_C.items()}
        _check_pmf(mt, "margT")
        _check_pmf(mc, "margC")
        pmf = {(t, c): pt * pc for t, pt in mt.items() for c, pc in mc.items() if pt and pc}
        return cls(TimeGrid(sorted(mt)), TimeGrid(sorted(mc)), pmf, independent=True)

    def marginal_T(self) -> dict[Fraction, Fraction]:
        out: dict[Fraction, Fraction] = defaultdict(Fraction)
        for (t, _), p in self.pmf.items():
            out[t] += p
        return dict(out)

    def marginal_C(self) -> dict[Fraction, Fraction]:
        out: dict[Fraction, Fraction] = defaultdict(Fraction)
        for (_, c), p in self.pmf.items():
            out[c] += p
        return dict(out)


@dataclass(frozen=True, eq=False)
class ObservedLaw:
    """Pmf over observed atoms ``(x, delta)`` on a time grid.

    Zero-mass atoms are dropped at construction; ``atoms`` lists the support.
    """

    grid: TimeGrid
    pmf: Mapping[Observation, Fraction]

    def __post_init__(self):
        clean: dict[Observation, Fraction] = {}
        for key, p in self.pmf.items():
            o = key if isinstance(key, Observation) else Observation(*key)
            p = to_fraction(p)
            if o.x not in self.grid:
                raise SpecError(f"x={o.x} is not on the grid", "pmf")
            if p:
                clean[o] = clean.get(o, Fraction(0)) + p
        _check_pmf(clean, "pmf")
        object.__setattr__(self, "pmf", MappingProxyType(dict(sorted(clean.items()))))

    @property
    def atoms(self) -> list[Observation]:
        return list(self.pmf)

    def prob(self, x, delta: int) -> Fraction:
        return self.pmf.get(Observation(Fraction(x), delta), Fraction(0))

    def expect(self, fn) -> Fraction:
        """Exact expectation of ``fn(observation)`` over the support."""
        return sum((p * fn(o) for o, p in self.pmf.items()), Fraction(0))


def induce_observed(law: LatentLaw) -> ObservedLaw:
    """Push a latent law through ``X = min(T, C)`` and ``delta = I(T <= C)``."""
    pmf: dict[Observation, Fraction] = defaultdict(Fraction)
    for (t, c), p in law.pmf.items():
        if t <= c:
            pmf[Observation(t, 1)] += p
        else:
            pmf[Observation(c, 0)] += p
    return ObservedLaw(law.grid_T.union(law.grid_C), pmf)


@dataclass(frozen=True)
class SupportSets:
    S_minus: frozenset
    S: frozenset
    S_plus: frozenset
    tau: Fraction


def support_sets(obs: ObservedLaw) -> SupportSets:
    """Grid points where E Y#(s+), E Ydag(s) and E Y#(s) are positive, and tau."""
    s_minus, s, s_plus = set(), set(), set()
    for u in obs.grid:
        if obs.expect(lambda o: o.x > u) > 0:
            s_minus.add(u)
        if obs.expect(lambda o: o.x > u or (o.x == u and o.delta == 0)) > 0:
            s.add(u)
        if obs.expect(lambda o: o.x >= u) > 0:
            s_plus.add(u)
    return SupportSets(frozenset(s_minus), frozenset(s), frozenset(s_plus), max(s_plus))


# Reference fixtures -----------------------------------------------------------

_half = Fraction(1, 2)

U2 = LatentLaw.from_marginals({1: _half, 2: _half}, {1: _half, 2: _half})
NSD = LatentLaw.from_marginals({1: _half, 3: _half}, {2: _half, 4: _half})
FIXTURES: Mapping[str, LatentLaw] = MappingProxyType({"U2": U2, "NSD": NSD})


# Distribution spec files --------------------------------------------------------

def _require(doc: dict, key: str):
    if key not in doc:
        raise SpecError("missing required field", key)
    return doc[key]


def _marginal(entries, key: str, time_key: str) -> dict[Fraction, Fraction]:
    if not isinstance(entries, list) or not entries:
        raise SpecError("expected a nonempty list", key)
    out: dict[Fraction, Fraction] = {}
    for i, e in enumerate(entries):
        where = f"{key}[{i}]"
        if isinstance(e, dict):
            t, p = e.get(time_key, e.get("x")), e.get("p")
            if t is None or p is None:
                raise SpecError(f"entry needs '{time_key}' and 'p'", where)
        elif isinstance(e, (list, tuple)) and len(e) == 2:
            t, p = e
        else:
            raise SpecError("expected {'%s': .., 'p': ..} or [time, p]" % time_key, where)
        t = to_fraction(t, where + "." + time_key)
        out[t] = out.get(t, Fraction(0)) + to_fraction(p, where + ".p")
    return out


def parse_spec(doc) -> LatentLaw | ObservedLaw:
    """Build a law from a decoded distribution spec document.

    Accepted forms: a joint ``pmf`` with ``grid_T``/``grid_C``; marginal
    shorthand ``margT``/``margC`` (independent); or ``observed``, a list of
    ``{"x", "delta", "p"}`` entries giving an observed law directly.
    """
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    if "observed" in doc:
        entries = doc["observed"]
        if not isinstance(entries, list) or not entries:
            raise SpecError("expected a nonempty list", "observed")
        pmf: dict[Observation, Fraction] = defaultdict(Fraction)
        for i, e in enumerate(entries):
            where = f"observed[{i}]"
            if not isinstance(e, dict) or not {"x", "delta", "p"} <= set(e):
                raise SpecError("entry needs 'x', 'delta' and 'p'", where)
            if e["delta"] not in (0, 1) or isinstance(e["delta"], bool):
                raise SpecError(f"delta must be 0 or 1, got {e['delta']!r}", where + ".delta")
            pmf[Observation(to_fraction(e["x"], where + ".x"), e["delta"])] += to_fraction(
                e["p"], where + ".p"
            )
        grid = doc.get("grid") or sorted({o.x for o in pmf})
        return ObservedLaw(TimeGrid(grid), pmf)
    if "margT" in doc or "margC" in doc:
        if doc.get("independent", True) is not True:
            raise SpecError("marginal shorthand implies independence", "independent")
        return LatentLaw.from_marginals(
            _marginal(_require(doc, "margT"), "margT", "t"),
            _marginal(_require(doc, "margC"), "margC", "c"),
        )
    gT = _require(doc, "grid_T")
    gC = _require(doc, "grid_C")
    entries = _require(doc, "pmf")
    if not isinstance(entries, list) or not entries:
        raise SpecError("expected a nonempty list", "pmf")
    try:
        grid_T = TimeGrid([to_fraction(v, "grid_T") for v in gT])
        grid_C = TimeGrid([to_fraction(v, "grid_C") for v in gC])
    except SpecError as exc:
        raise SpecError(str(exc).split(": ", 1)[-1], exc.field or "grid") from None
    latent: dict[tuple[Fraction, Fraction], Fraction] = defaultdict(Fraction)
    for i, e in enumerate(entries):
        where = f"pmf[{i}]"
        if not isinstance(e, dict) or not {"t", "c", "p"} <= set(e):
            raise SpecError("entry needs 't', 'c' and 'p'", where)
        key = (to_fraction(e["t"], where + ".t"), to_fraction(e["c"], where + ".c"))
        latent[key] += to_fraction(e["p"], where + ".p")
    independent = doc.get("independent", False)
    if not isinstance(independent, bool):
        raise SpecError("expected a boolean", "independent")
    return LatentLaw(grid_T, grid_C, latent, independent=independent)


def load_spec(path: str | Path) -> LatentLaw | ObservedLaw:
    """Read and validate a JSON distribution spec file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} col {exc.colno}") from None
    return parse_spec(doc)


def as_observed(law: LatentLaw | ObservedLaw) -> ObservedLaw:
    return law if isinstance(law, ObservedLaw) else induce_observed(law)
