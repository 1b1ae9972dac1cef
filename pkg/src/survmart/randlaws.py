"""Seeded random rational latent laws for exhaustive oracle testing.

Grids have 1-5 points drawn from {1, ..., 8}; marginal or joint weights are
integer compositions of a denominator at most 64.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .model import LatentLaw, TimeGrid

__all__ = ["KINDS", "random_law", "random_laws"]

KINDS = ("independent-shared", "independent-disjoint", "dependent-shared", "dependent-disjoint")


def _weights(rng: random.Random, k: int, max_den: int = 64) -> list[Fraction]:
    """k positive rationals with a common denominator at most ``max_den``, summing to 1."""
    den = rng.randint(k, max_den)
    cuts = sorted(rng.sample(range(1, den), k - 1)) if k > 1 else []
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return [Fraction(p, den) for p in parts]


def _grid(rng: random.Random, pool, size: int) -> list[int]:
    return sorted(rng.sample(sorted(pool), size))


def random_law(rng: random.Random, kind: str) -> LatentLaw:
    """Draw one latent law of the given kind.

    ``*-shared`` laws are built so that failure and censoring share at least
    one discontinuity; ``*-disjoint`` laws use disjoint grids for T and C,
    which rules shared discontinuities out.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    pool = range(1, 9)
    if kind.endswith("shared"):
        u = rng.randint(1, 7)
        gT = sorted(set(_grid(rng, [p for p in pool if p != u], rng.randint(0, 3))) | {u})
        if max(gT) == u:
            gT.append(rng.randint(u + 1, 8))
        gC = sorted(set(_grid(rng, [p for p in pool if p != u], rng.randint(0, 4))) | {u})
    else:
        size_T = rng.randint(1, 5)
        gT = _grid(rng, pool, size_T)
        rest = [p for p in pool if p not in gT]
        gC = _grid(rng, rest, rng.randint(1, min(5, len(rest))))

    if kind.startswith("independent"):
        wT, wC = _weights(rng, len(gT)), _weights(rng, len(gC))
        return LatentLaw.from_marginals(dict(zip(gT, wT)), dict(zip(gC, wC)))

    cells = [(t, c) for t in gT for c in gC]
    chosen = set(rng.sample(cells, rng.randint(1, min(len(cells), 8))))
    if kind == "dependent-shared":
        # (u, c >= u) gives a failure at u; (t > u, u) a censoring at u
        chosen.add((u, rng.choice([c for c in gC if c >= u])))
        chosen.add((rng.choice([t for t in gT if t > u]), u))
    chosen = sorted(chosen)
    w = _weights(rng, len(chosen))
    return LatentLaw(TimeGrid(gT), TimeGrid(gC), dict(zip(chosen, w)), independent=False)


def random_laws(seed: int, count: int) -> list[tuple[str, LatentLaw]]:
    """``count`` laws cycling through :data:`KINDS`, deterministic in ``seed``."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        kind = KINDS[i % len(KINDS)]
        out.append((f"random[{seed}:{i}:{kind}]", random_law(rng, kind)))
    return out
