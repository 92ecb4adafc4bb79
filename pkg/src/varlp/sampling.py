"""Seeded random generators shared by the checkers and the verification suites.

Every generator takes an explicit ``random.Random``; nothing here touches global state.
"""

from __future__ import annotations

import cmath
import math
import random
from typing import Sequence

from .space import ExponentSequence, Regime, SparseSequence

DISK_RADIUS = 10.0
MAX_SUPPORT = 16


def trial_rng(seed: int, label: str, trial: int) -> random.Random:
    # str seeds go through sha512, so this is stable across runs and platforms
    return random.Random(f"{seed}:{label}:{trial}")


def random_disk(rng: random.Random, radius: float = DISK_RADIUS, floor: float = 0.0) -> complex:
    """Uniform on the annulus floor <= |z| <= radius (the full disk when floor = 0)."""
    r = math.sqrt(rng.uniform(floor * floor, radius * radius))
    return cmath.rect(r, rng.uniform(-math.pi, math.pi))


def random_sparse(
    rng: random.Random,
    indices: Sequence[int],
    *,
    max_support: int = MAX_SUPPORT,
    radius: float = DISK_RADIUS,
) -> SparseSequence:
    size = rng.randint(1, min(max_support, len(indices)))
    chosen = rng.sample(list(indices), size)
    return SparseSequence({n: random_disk(rng, radius) for n in chosen})


def random_exponent_value(rng: random.Random, regime: Regime) -> float:
    if regime is Regime.ALL_BELOW_TWO:
        return rng.uniform(1.0, 1.9)
    if regime is Regime.ALL_ABOVE_TWO:
        return rng.uniform(2.1, 20.0)
    return rng.choice((rng.uniform(1.0, 1.9), rng.uniform(2.1, 20.0)))


def random_exponents(rng: random.Random, regime: Regime, length: int = 8) -> ExponentSequence:
    """A periodic exponent sequence whose values respect ``regime`` with a 0.1 margin from 2."""
    pattern = [random_exponent_value(rng, regime) for _ in range(length)]
    if regime is Regime.MIXED and length >= 2:
        pattern[0] = rng.uniform(1.0, 1.9)
        pattern[1] = rng.uniform(2.1, 20.0)
    return ExponentSequence.periodic(pattern)


def random_weights(rng: random.Random, count: int) -> list[float]:
    """Positive weights summing to one (flat Dirichlet)."""
    raw = [rng.expovariate(1.0) + 1e-3 for _ in range(count)]
    total = math.fsum(raw)
    return [w / total for w in raw]
