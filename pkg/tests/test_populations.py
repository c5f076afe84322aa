"""Population materialization tests."""

import numpy as np
import pytest

from riskaudit.assorters import theta_prime
from riskaudit.errors import InfeasibleCounts
from riskaudit.populations import (
    Binary,
    Blanks,
    ComparisonMix,
    PopulationSpec,
    materialize_population,
)
from riskaudit.rng import rng_for


class TestBinary:
    def test_exact_counts(self):
        pop = materialize_population(PopulationSpec(Binary(0.52), 100), rng_for(1))
        assert len(pop) == 100
        assert int(pop.sum()) == 52
        assert set(np.unique(pop)) == {0.0, 1.0}

    def test_rounding_half_up(self):
        pop = materialize_population(PopulationSpec(Binary(0.525), 10), rng_for(1))
        assert int(pop.sum()) == 5  # 5.25 rounds to 5
        pop = materialize_population(PopulationSpec(Binary(0.55), 10), rng_for(1))
        assert int(pop.sum()) == 6  # 5.5 rounds up


class TestBlanks:
    def test_mean_matches_theta_prime(self):
        pop = materialize_population(
            PopulationSpec(Blanks(0.55, 0.5), 1000), rng_for(1)
        )
        assert pop.mean() == pytest.approx(theta_prime(0.55, 0.5))
        assert pop.mean() == pytest.approx(0.525)

    def test_counts(self):
        pop = materialize_population(PopulationSpec(Blanks(0.6, 0.25), 1000), rng_for(1))
        assert np.count_nonzero(pop == 0.5) == 250
        assert np.count_nonzero(pop == 1.0) == 450
        assert np.count_nonzero(pop == 0.0) == 300


class TestComparisonMix:
    def test_counts_for_heavy_mass(self):
        pop = materialize_population(
            PopulationSpec(ComparisonMix(0.99), 10_000), rng_for(2)
        )
        assert np.count_nonzero(pop == 0.0) == 10
        assert np.count_nonzero(pop == 1.0) == 9_900
        uniforms = pop[(pop != 0.0) & (pop != 1.0)]
        assert len(uniforms) == 90

    def test_uniform_component_mean(self):
        n = 100_000
        pop = materialize_population(PopulationSpec(ComparisonMix(0.1), n), rng_for(3))
        spec_mean = PopulationSpec(ComparisonMix(0.1), n).mean_target()
        n_uniform = n - round(n * 0.1) - round(n * 0.001)
        tol = 4 * (1 / np.sqrt(12 * n_uniform)) * (n_uniform / n)
        assert pop.mean() == pytest.approx(spec_mean, abs=tol)

    def test_infeasible(self):
        with pytest.raises(InfeasibleCounts):
            materialize_population(
                PopulationSpec(ComparisonMix(0.9999, mass_zero=0.1), 10), rng_for(4)
            )

    def test_deterministic_in_rng(self):
        a = materialize_population(PopulationSpec(ComparisonMix(0.5), 1000), rng_for(9, "p"))
        b = materialize_population(PopulationSpec(ComparisonMix(0.5), 1000), rng_for(9, "p"))
        assert np.array_equal(a, b)
