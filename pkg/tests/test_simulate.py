"""Simulation harness tests: the vectorized path must agree with the scalar
state machine step for step, and the engine must be deterministic."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskaudit.martingale import (
    AlphaTest,
    AprioriKelly,
    FixedEta,
    FromLambda,
    KaplanKolmogorov,
    KaplanWald,
    Sampling,
    SequentialTest,
    ShrinkTrunc,
    SprtWoR,
    SqKellyMixture,
    Status,
    TestConfig as Config,
)
from riskaudit.populations import Binary, ComparisonMix, PopulationSpec
from riskaudit.rng import rng_for
from riskaudit.simulate import (
    ExperimentSpec,
    _Stepper,
    geo_mean_ratio_summary,
    run_cell,
    run_experiment,
    run_replication,
    simulate_once,
)
from riskaudit.errors import MissingCell

COMPARATORS = [
    AlphaTest(FixedEta(0.7)),
    AlphaTest(ShrinkTrunc(0.7, 10.0)),
    AlphaTest(ShrinkTrunc(0.55, 100.0)),
    AlphaTest(FromLambda(0.8)),
    AprioriKelly(0.7),
    SprtWoR(0.7),
    KaplanWald(0.9),
    KaplanKolmogorov(0.1),
    SqKellyMixture(5),
]


def scalar_trajectory(comparator, xs, cfg):
    """Per-step log statistic from the one-draw-at-a-time state machine."""
    t = SequentialTest(cfg, comparator)
    out = []
    for x in xs:
        if t.status is not Status.RUNNING:
            break
        t.step(float(x))
        state = t.state
        out.append(state.log_mix if hasattr(state, "log_mix") else state.logT)
    return np.array(out)


def vector_trajectory(comparator, xs, cfg):
    stepper = _Stepper(
        comparator,
        wor=cfg.sampling is Sampling.WITHOUT_REPLACEMENT,
        N=cfg.N,
        mu0=cfg.mu0,
        u=cfg.u,
        alpha=cfg.alpha,
    )
    return stepper.trajectory(np.asarray(xs, dtype=float))


class TestVectorScalarAgreement:
    @pytest.mark.parametrize("comparator", COMPARATORS, ids=str)
    def test_without_replacement_binary(self, comparator):
        n = 120
        xs = rng_for(21, "traj", str(comparator)).integers(0, 2, size=n).astype(float)
        cfg = Config(alpha=0.05, N=n, sampling=Sampling.WITHOUT_REPLACEMENT)
        scalar = scalar_trajectory(comparator, xs, cfg)
        vector = vector_trajectory(comparator, xs, cfg)[: len(scalar)]
        np.testing.assert_allclose(vector, scalar, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("comparator", COMPARATORS, ids=str)
    def test_with_replacement_continuous(self, comparator):
        xs = rng_for(22, "traj", str(comparator)).random(200)
        cfg = Config(alpha=0.01)
        scalar = scalar_trajectory(comparator, xs, cfg)
        vector = vector_trajectory(comparator, xs, cfg)[: len(scalar)]
        finite = np.isfinite(scalar)
        np.testing.assert_allclose(vector[finite], scalar[finite], rtol=0, atol=1e-12)
        assert np.array_equal(np.isposinf(vector[: len(scalar)]), np.isposinf(scalar))

    def test_exhaustion_certainty_agrees(self):
        # tiny population with mean above 1/2: both paths must reject by N
        xs = np.array([1.0, 0.0, 1.0, 1.0])
        cfg = Config(alpha=1e-9, N=4, sampling=Sampling.WITHOUT_REPLACEMENT)
        comp = AlphaTest(FixedEta(0.7))
        scalar = scalar_trajectory(comp, xs, cfg)
        assert scalar[-1] == math.inf
        out = simulate_once(
            comp, xs, without_replacement=True, mu0=0.5, u=1.0, alpha=1e-9,
            cap=None, recount_addin=False, rng=rng_for(1, "exh"),
        )
        assert out.rejected


class TestVectorScalarProperty:
    @given(
        seed=st.integers(0, 10_000),
        u=st.sampled_from([0.5, 1.0, 2.0]),
        mu_frac=st.floats(0.2, 0.8),
        kind=st.sampled_from(["fixed", "shrink", "bet", "sprt", "kw", "kk"]),
    )
    @settings(max_examples=40, deadline=None)
    def test_agreement_on_random_configs(self, seed, u, mu_frac, kind):
        mu0 = u * mu_frac
        rng = rng_for(seed, "prop")
        n = 50
        # draws hit the edges 0, mu0, u/2, and u with positive probability
        pool = np.array([0.0, u, u / 2, mu0, float(rng.uniform(0, u))])
        xs = pool[rng.integers(0, len(pool), size=n)]
        comparator = {
            "fixed": AlphaTest(FixedEta(mu0 + 0.6 * (u - mu0))),
            "shrink": AlphaTest(ShrinkTrunc(mu0 + 0.6 * (u - mu0), 20.0)),
            "bet": AlphaTest(FromLambda(0.7 / mu0)),
            "sprt": SprtWoR(mu0 + 0.6 * (u - mu0)),
            "kw": KaplanWald(0.9),
            "kk": KaplanKolmogorov(u / 10),
        }[kind]
        cfg = Config(alpha=1e-300, u=u, mu0=mu0, N=n,
                     sampling=Sampling.WITHOUT_REPLACEMENT)
        scalar = scalar_trajectory(comparator, xs, cfg)
        vector = vector_trajectory(comparator, xs, cfg)[: len(scalar)]
        finite = np.isfinite(scalar)
        np.testing.assert_allclose(vector[finite], scalar[finite], rtol=0, atol=1e-12)
        assert np.array_equal(np.isposinf(vector), np.isposinf(scalar))
        assert np.array_equal(np.isneginf(vector), np.isneginf(scalar))


class TestSimulateOnce:
    def test_rejects_match_scalar_stop(self):
        values = np.concatenate([np.ones(70), np.zeros(30)])
        comp = AlphaTest(ShrinkTrunc(0.7, 50.0))
        rng = rng_for(31, "stop")
        out = simulate_once(
            comp, values, without_replacement=True, mu0=0.5, u=1.0,
            alpha=0.05, cap=None, recount_addin=False, rng=rng,
        )
        # replay the same permutation through the state machine
        order = rng_for(31, "stop").permutation(100)
        cfg = Config(alpha=0.05, N=100, sampling=Sampling.WITHOUT_REPLACEMENT)
        t = SequentialTest(cfg, comp)
        steps = 0
        for idx in order:
            t.step(float(values[idx]))
            steps += 1
            if t.status is not Status.RUNNING:
                break
        assert t.status is Status.REJECTED
        assert out.rejected
        assert out.draws == steps

    def test_recount_addin_charges_full_count(self):
        values = np.concatenate([np.ones(52), np.zeros(48)])  # narrow margin
        comp = SprtWoR(0.52)
        charged = []
        for i in range(200):
            cost, rejected = run_replication(
                comp, values, without_replacement=True, cap=10, alpha=0.05,
                rng=rng_for(33, "recount", i), recount_addin=True,
            )
            charged.append((cost, rejected))
        assert any(not r and c == 100.0 for c, r in charged)  # full count charged
        assert all(c == 100.0 or r for c, r in charged)

    def test_with_replacement_cap_overflow(self):
        values = np.concatenate([np.ones(50), np.zeros(50)])  # exact null
        out = simulate_once(
            AlphaTest(FixedEta(0.7)), values, without_replacement=False,
            mu0=0.5, u=1.0, alpha=0.05, cap=500, recount_addin=False,
            rng=rng_for(35, "cap"),
        )
        if not out.rejected:
            assert out.overflowed
            assert out.cost == 500


class TestDeterminism:
    def test_identical_reruns(self):
        spec = ExperimentSpec(
            method=AlphaTest(ShrinkTrunc(0.7, 10.0)),
            population=PopulationSpec(ComparisonMix(0.9), 2_000),
            without_replacement=True,
            reps=50,
        )
        a = run_cell(spec, 77)
        b = run_cell(spec, 77)
        assert a == b

    def test_jobs_do_not_change_results(self):
        grid = [
            ExperimentSpec(
                method=m,
                population=PopulationSpec(Binary(0.7), 1_000),
                without_replacement=True,
                reps=40,
            )
            for m in (AlphaTest(FixedEta(0.7)), SprtWoR(0.7))
        ]
        seq = run_experiment(grid, 5, jobs=1)
        par = run_experiment(grid, 5, jobs=2)
        assert seq == par

    def test_single_replication_grid_equals_the_replication(self):
        spec = ExperimentSpec(
            method=AlphaTest(FixedEta(0.7)),
            population=PopulationSpec(Binary(0.7), 500),
            without_replacement=True,
            reps=1,
        )
        row = run_cell(spec, 23)
        values = np.concatenate([np.ones(350), np.zeros(150)])
        cost, rejected = run_replication(
            AlphaTest(FixedEta(0.7)), values, without_replacement=True,
            cap=None, alpha=0.05, rng=rng_for(23, "rep", spec.cell_key(), 0),
        )
        assert row["mean_n"] == cost
        assert row["reject_rate"] == float(rejected)

    def test_seed_changes_results(self):
        spec = ExperimentSpec(
            method=AlphaTest(ShrinkTrunc(0.7, 10.0)),
            population=PopulationSpec(Binary(0.7), 1_000),
            without_replacement=True,
            reps=40,
        )
        assert run_cell(spec, 1)["mean_n"] != run_cell(spec, 2)["mean_n"]


class TestWithReplacementRisk:
    def test_rejection_rate_bounded_at_cap(self):
        values = np.concatenate([np.ones(100), np.zeros(100)])  # exact null
        reps, cap = 3000, 2000
        rejected = 0
        for i in range(reps):
            out = simulate_once(
                AlphaTest(ShrinkTrunc(0.7, 10.0)), values,
                without_replacement=False, mu0=0.5, u=1.0, alpha=0.05,
                cap=cap, recount_addin=False, rng=rng_for(61, "wr-risk", i),
            )
            rejected += out.rejected
        bound = 0.05 + 4 * math.sqrt(0.05 * 0.95 / reps)
        assert rejected / reps <= bound


class TestMonotonicitySmoke:
    def test_mean_sample_size_nonincreasing_in_theta(self):
        # at eta = theta, larger margins need fewer draws (3 sigma slack)
        results = []
        for theta in (0.55, 0.6, 0.7):
            spec = ExperimentSpec(
                method=AlphaTest(ShrinkTrunc(theta, 100.0)),
                population=PopulationSpec(Binary(theta), 10_000),
                without_replacement=False,
                reps=300,
                cap=100_000,
            )
            results.append(run_cell(spec, 99)["mean_n"])
        assert results[0] > results[1] > results[2]


class TestMartingaleMean:
    def test_t5_mean_near_one_under_null(self):
        # E[T_5] = 1 for binary draws at the null mean, any estimator
        reps, horizon = 100_000, 5
        rng = rng_for(41, "mart-mean")
        xs = rng.integers(0, 2, size=(reps, horizon)).astype(float)
        comp = AlphaTest(ShrinkTrunc(0.7, 10.0))
        t_vals = np.empty(reps)
        for i in range(reps):
            stepper = _Stepper(comp, wor=False, N=math.inf, mu0=0.5, u=1.0, alpha=0.05)
            t_vals[i] = math.exp(stepper.trajectory(xs[i])[-1])
        se = t_vals.std(ddof=1) / math.sqrt(reps)
        assert abs(t_vals.mean() - 1.0) <= 4 * se


class TestGeoMeanSummary:
    def test_always_best_scores_one(self):
        means = {"a": {"c1": 10.0, "c2": 20.0}, "b": {"c1": 12.0, "c2": 30.0}}
        scores = geo_mean_ratio_summary(means)
        assert scores["a"] == pytest.approx(1.0)
        assert scores["b"] == pytest.approx(math.sqrt(1.2 * 1.5))

    def test_two_conditions_root_two(self):
        means = {"a": {"c1": 1.0, "c2": 2.0}, "b": {"c1": 1.0, "c2": 1.0}}
        assert geo_mean_ratio_summary(means)["a"] == pytest.approx(math.sqrt(2.0))

    def test_missing_cell(self):
        with pytest.raises(MissingCell):
            geo_mean_ratio_summary({"a": {"c1": 1.0}, "b": {"c1": 1.0, "c2": 2.0}})


class TestSprProductOracle:
    """Independent product-form oracle for the binary fixed-alternative case."""

    @staticmethod
    def spr_product(ys, eta, mu=0.5):
        t = 1.0
        out = []
        for y in ys:
            t *= y * (eta / mu) + (1 - y) * ((1 - eta) / (1 - mu))
            out.append(t)
        return np.array(out)

    def test_fixed_eta_equals_spr(self):
        ys = rng_for(47, "spr").integers(0, 2, size=250).astype(float)
        cfg = Config(alpha=1e-12)  # keep it running the whole stream
        scalar = scalar_trajectory(AlphaTest(FixedEta(0.7)), ys, cfg)
        oracle = np.log(self.spr_product(ys, 0.7))[: len(scalar)]
        np.testing.assert_allclose(scalar, oracle, rtol=0, atol=1e-12)

    def test_harness_replication_follows_spr(self):
        values = np.concatenate([np.ones(70), np.zeros(30)])
        rng = rng_for(49, "spr-rep")
        out = simulate_once(
            AlphaTest(FixedEta(0.7)), values, without_replacement=False,
            mu0=0.5, u=1.0, alpha=0.05, cap=10_000, recount_addin=False, rng=rng,
        )
        # regenerate the same draw stream and locate the oracle's crossing
        rng2 = rng_for(49, "spr-rep")
        ys = values[rng2.integers(0, 100, size=out.draws)]
        oracle = self.spr_product(ys, 0.7)
        assert out.rejected
        assert oracle[-1] >= 1 / 0.05
        assert all(t < 1 / 0.05 for t in oracle[:-1])
