"""Finite assorter-value populations used by the simulation harness.

Point masses are materialized with exact, deterministic counts (rounding
half-up on N * mass); only a mixture's uniform remainder consumes randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleCounts
from .assorters import theta_prime


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Binary:
    """round(N*theta) ones, the rest zeros; population mean ~ theta."""

    theta: float


@dataclass(frozen=True)
class Blanks:
    """A fraction b of cards score 1/2; theta is the winner's share of the
    valid remainder. Population mean is theta*(1-b) + b/2."""

    theta: float
    b: float


@dataclass(frozen=True)
class ComparisonMix:
    """Mass 0.001 at 0, mass m at 1, remaining mass uniform on [0, 1]."""

    m: float
    mass_zero: float = 0.001


PopulationKind = Binary | Blanks | ComparisonMix


@dataclass(frozen=True)
class PopulationSpec:
    kind: PopulationKind
    N: int

    def mean_target(self) -> float:
        """Analytic population mean (exact for point masses, 1/2 mean for
        the uniform remainder)."""
        k = self.kind
        if isinstance(k, Binary):
            return k.theta
        if isinstance(k, Blanks):
            return theta_prime(k.theta, k.b)
        return k.mass_zero * 0.0 + k.m * 1.0 + (1.0 - k.m - k.mass_zero) * 0.5

    def label(self) -> str:
        k = self.kind
        if isinstance(k, Binary):
            return f"binary(theta={k.theta},N={self.N})"
        if isinstance(k, Blanks):
            return f"blanks(theta={k.theta},b={k.b},N={self.N})"
        return f"compmix(m={k.m},N={self.N})"


def materialize_population(spec: PopulationSpec, rng: np.random.Generator) -> np.ndarray:
    """Values of the population as a length-N array.

    Counts for point masses are deterministic; the uniform remainder of a
    comparison mixture is drawn from rng. Raises InfeasibleCounts if the
    rounded point masses exceed N.
    """
    n = spec.N
    k = spec.kind
    if isinstance(k, Binary):
        ones = _round_half_up(n * k.theta)
        if ones > n:
            raise InfeasibleCounts(f"{ones} ones will not fit in N={n}")
        return np.concatenate([np.ones(ones), np.zeros(n - ones)])
    if isinstance(k, Blanks):
        blanks = _round_half_up(n * k.b)
        valid = n - blanks
        if valid < 0:
            raise InfeasibleCounts(f"{blanks} blanks will not fit in N={n}")
        ones = _round_half_up(valid * k.theta)
        if ones > valid:
            raise InfeasibleCounts(f"{ones} ones will not fit in {valid} valid cards")
        return np.concatenate(
            [np.ones(ones), np.zeros(valid - ones), np.full(blanks, 0.5)]
        )
    zeros = _round_half_up(n * k.mass_zero)
    ones = _round_half_up(n * k.m)
    rest = n - zeros - ones
    if rest < 0:
        raise InfeasibleCounts(f"point masses exceed N={n}")
    return np.concatenate([np.zeros(zeros), np.ones(ones), rng.random(rest)])
