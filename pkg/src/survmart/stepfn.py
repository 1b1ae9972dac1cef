"""Right-continuous step functions on a finite time grid."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

from .model import TimeGrid

__all__ = ["StepFunction"]


_ZERO = Fraction(0)


def _q(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """``value(t) = value_at_0 + sum of jump(u) for grid u <= t``.

    Only nonzero jumps are stored. Queries off the grid, including beyond its
    last point, return the value at the nearest grid point to the left.
    """

    grid: TimeGrid
    value_at_0: Fraction
    jumps: Mapping[Fraction, Fraction]

    def __post_init__(self):
        jumps = {_q(u): _q(j) for u, j in self.jumps.items() if j}
        index = self.grid._index
        for u in jumps:
            if u not in index:
                raise ValueError(f"jump at {u} is off the grid")
        object.__setattr__(self, "value_at_0", _q(self.value_at_0))
        object.__setattr__(self, "jumps", MappingProxyType(jumps))
        cum, acc = [], self.value_at_0
        for u in self.grid:
            acc += jumps.get(u, 0)
            cum.append(acc)
        object.__setattr__(self, "_cum", tuple(cum))

    @classmethod
    def _raw(cls, grid: TimeGrid, value_at_0: Fraction, cum: list) -> "StepFunction":
        # trusted inputs: Fraction values at every grid point, in order
        self = object.__new__(cls)
        jumps, prev = {}, value_at_0
        for u, v in zip(grid.points, cum):
            if v != prev:
                jumps[u] = v - prev
            prev = v
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "value_at_0", value_at_0)
        object.__setattr__(self, "jumps", MappingProxyType(jumps))
        object.__setattr__(self, "_cum", tuple(cum))
        return self

    @classmethod
    def from_values(cls, grid: TimeGrid, values, value_at_0=0) -> "StepFunction":
        """Build from the function's value at every grid point, in order."""
        values = [_q(v) for v in values]
        if len(values) != len(grid):
            raise ValueError("need one value per grid point")
        return cls._raw(grid, _q(value_at_0), values)

    @classmethod
    def zero(cls, grid: TimeGrid) -> "StepFunction":
        return cls(grid, 0, {})

    def __call__(self, t) -> Fraction:
        k = bisect_right(self.grid.points, t)
        return self._cum[k - 1] if k else self.value_at_0

    def left(self, t) -> Fraction:
        """Left limit at ``t``."""
        return self(t) - self.jump(t)

    def jump(self, t) -> Fraction:
        return self.jumps.get(t if isinstance(t, Fraction) else Fraction(t), _ZERO)

    def values(self) -> tuple[Fraction, ...]:
        """Values at the grid points, in order."""
        return self._cum

    def __add__(self, other: "StepFunction") -> "StepFunction":
        self._same_grid(other)
        return StepFunction._raw(
            self.grid, self.value_at_0 + other.value_at_0, [a + b for a, b in zip(self._cum, other._cum)]
        )

    def __neg__(self) -> "StepFunction":
        return StepFunction._raw(self.grid, -self.value_at_0, [-a for a in self._cum])

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        self._same_grid(other)
        return StepFunction._raw(
            self.grid, self.value_at_0 - other.value_at_0, [a - b for a, b in zip(self._cum, other._cum)]
        )

    def __mul__(self, other: "StepFunction") -> "StepFunction":
        """Pointwise product."""
        self._same_grid(other)
        return StepFunction._raw(
            self.grid, self.value_at_0 * other.value_at_0, [a * b for a, b in zip(self._cum, other._cum)]
        )

    def scale(self, c) -> "StepFunction":
        c = Fraction(c)
        return StepFunction(self.grid, c * self.value_at_0, {u: c * j for u, j in self.jumps.items()})

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.value_at_0 == other.value_at_0
            and dict(self.jumps) == dict(other.jumps)
        )

    __hash__ = object.__hash__

    def _same_grid(self, other: "StepFunction") -> None:
        if self.grid is not other.grid and self.grid != other.grid:
            raise ValueError("step functions live on different grids")

    def __repr__(self):
        body = ", ".join(f"{u}: {j}" for u, j in sorted(self.jumps.items()))
        return f"StepFunction(value_at_0={self.value_at_0}, jumps={{{body}}})"
