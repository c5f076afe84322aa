"""Deterministic Monte-Carlo engine for audit sample-size experiments.

Replications are evaluated in vectorized blocks: a block of draws is turned
into per-draw log growth factors, cumulative sums locate the first crossing
of log(1/alpha), and the without-replacement certainty rule (running sum
exceeding N*mu0) is applied by mask. The per-draw arithmetic mirrors
``martingale`` exactly, and the test suite holds the two paths to within
1e-12 per step.

Seeding: every replication draws from ``rng_for(seed, "rep", cell, i)``;
populations with a random component are drawn from the same per-replication
stream, point-mass populations once per cell. Results are identical
regardless of execution order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, MissingCell
from .martingale import (
    AlphaTest,
    AprioriKelly,
    ComparatorSpec,
    FixedEta,
    FromLambda,
    KaplanKolmogorov,
    KaplanWald,
    ShrinkTrunc,
    SprtWoR,
    SqKellyMixture,
    eta_to_lambda,
    mixture_bets,
)
from .populations import ComparisonMix, PopulationSpec, materialize_population
from .rng import rng_for

DEGENERATE_REL = 1e-12


# ---------------------------------------------------------------------------
# Vectorized per-draw evaluation
# ---------------------------------------------------------------------------


@dataclass
class _Carry:
    """Running scalars threaded between blocks of one replication."""

    j: int = 0
    S: float = 0.0
    logT: float = 0.0
    logTs: np.ndarray | None = None  # mixture components


class _Stepper:
    """Evaluates one method's stopping behavior over blocks of draws."""

    def __init__(self, comparator: ComparatorSpec, *, wor: bool, N: float,
                 mu0: float, u: float, alpha: float):
        self.c = comparator
        self.wor = wor
        self.N = float(N)
        self.mu0 = mu0
        self.u = u
        self.thresh = -math.log(alpha)
        self.carry = _Carry()
        if isinstance(comparator, SqKellyMixture):
            lams, weights = mixture_bets(comparator, mu0)
            self.lams = np.asarray(lams)
            self.log_w = np.log(np.asarray(weights))
            self.carry.logTs = np.zeros(len(lams))
        elif isinstance(comparator, AprioriKelly):
            self.lam = eta_to_lambda(comparator.eta, mu0, u)

    # -- null means for a block -------------------------------------------
    def _null_means(self, n: int, s_prev: np.ndarray, jj: np.ndarray) -> np.ndarray:
        if self.wor and math.isfinite(self.N):
            m = (self.N * self.mu0 - s_prev) / (self.N - jj + 1)
            if self.carry.j == 0:
                m[0] = self.mu0  # matches the state machine's exact initial value
            return m
        return np.full(n, self.mu0)

    # -- eta / factor per comparator --------------------------------------
    def _log_factors(self, x: np.ndarray, m: np.ndarray, s_prev: np.ndarray,
                     jj: np.ndarray) -> np.ndarray:
        u, mu0 = self.u, self.mu0
        c = self.c
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if isinstance(c, KaplanWald):
                factor = c.g * (x / m - 1.0) + 1.0
                factor = np.where(
                    m <= 0.0, np.where(x > 0.0, np.inf, 1.0 - c.g), factor
                )
                return np.log(factor)
            if isinstance(c, KaplanKolmogorov):
                factor = np.where(
                    m + c.g <= 0.0,
                    np.where(x > 0.0, np.inf, 1.0),
                    (x + c.g) / (m + c.g),
                )
                return np.log(factor)

            if isinstance(c, AprioriKelly) or (
                isinstance(c, AlphaTest) and isinstance(c.est, FromLambda)
            ):
                lam0 = self.lam if isinstance(c, AprioriKelly) else c.est.lam
                lam = np.minimum(lam0, 1.0 / m)
                factor = 1.0 + lam * (x - m)
                factor = np.where(m >= u * (1.0 - DEGENERATE_REL), 1.0, factor)
                factor = np.where(
                    m <= 0.0, np.where(x > 0.0, np.inf, 1.0), factor
                )
                return np.log(np.maximum(factor, 0.0))

            # eta-based: fixed, shrinkage, or the without-replacement SPRT
            if isinstance(c, SprtWoR):
                if math.isfinite(self.N):
                    eta = (self.N * c.eta - s_prev) / (self.N - jj + 1)
                    eta = np.minimum(np.maximum(eta, m), u)
                else:
                    eta = np.full(len(x), c.eta)
                degenerate = m >= u * (1.0 - DEGENERATE_REL)
            elif isinstance(c.est, ShrinkTrunc):
                est = c.est
                cshr = (est.eta0 - mu0) / 2 if est.c is None else est.c
                eps_u = u * 1e-6 if est.eps_u is None else est.eps_u
                shrunk = (est.d * est.eta0 + s_prev) / (est.d + jj - 1)
                floor = m + cshr / np.sqrt(est.d + jj - 1)
                eta = np.minimum(np.maximum(shrunk, floor), u - eps_u)
                degenerate = m >= (u - eps_u)
            elif isinstance(c.est, FixedEta):
                eta = np.minimum(np.maximum(c.est.eta0, m), u)
                degenerate = m >= u * (1.0 - DEGENERATE_REL)
            else:
                raise InvalidConfig(f"no vector path for {c!r}")
            lam = (eta / m - 1.0) / (u - m)
            factor = 1.0 + lam * (x - m)
            factor = np.where(degenerate, 1.0, factor)
            factor = np.where(
                m <= 0.0, np.where(x > 0.0, np.inf, (u - eta) / u), factor
            )
            return np.log(np.maximum(factor, 0.0))

    def consume(self, x: np.ndarray) -> tuple[str, int]:
        """Feed a block; returns ("reject", offset), ("dead", n), or ("run", n)."""
        n = len(x)
        cum = np.cumsum(x)
        s_prev = self.carry.S + np.concatenate(([0.0], cum[:-1]))
        s_cum = self.carry.S + cum
        jj = self.carry.j + np.arange(1, n + 1, dtype=float)
        m = self._null_means(n, s_prev, jj)
        if self.wor and math.isfinite(self.N):
            null_neg = (self.N * self.mu0 - s_cum) < 0.0
        else:
            null_neg = np.zeros(n, dtype=bool)

        if isinstance(self.c, SqKellyMixture):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                lam = np.minimum(self.lams[None, :], 1.0 / m[:, None])
                factor = 1.0 + lam * (x - m)[:, None]
                factor = np.where((m >= self.u * (1.0 - DEGENERATE_REL))[:, None], 1.0, factor)
                bad = (m <= 0.0)[:, None]
                factor = np.where(bad, np.where((x > 0.0)[:, None], np.inf, 1.0), factor)
                lf = np.log(np.maximum(factor, 0.0))
                absorbed_cols = np.maximum.accumulate(
                    np.isneginf(self.carry.logTs)[None, :] | (lf == -np.inf), axis=0
                )
                clog = self.carry.logTs[None, :] + np.cumsum(lf, axis=0)
                clog = np.where(absorbed_cols, -np.inf, clog)
                shifted = clog + self.log_w[None, :]
                peak = shifted.max(axis=1)
                log_mix = np.where(
                    np.isneginf(peak),
                    -np.inf,
                    peak + np.log(np.exp(shifted - peak[:, None]).sum(axis=1)),
                )
            all_dead = absorbed_cols.all(axis=1)
            reject = (log_mix >= self.thresh) | (null_neg & ~all_dead)
            if reject.any():
                off = int(np.argmax(reject))
                return "reject", off
            if all_dead[-1]:
                return "dead", n
            self.carry.j += n
            self.carry.S = float(s_cum[-1])
            self.carry.logTs = clog[-1].copy()
            return "run", n

        lf = self._log_factors(x, m, s_prev, jj)
        with np.errstate(invalid="ignore"):
            clog = self.carry.logT + np.cumsum(lf)
        absorbed = np.cumsum(lf == -np.inf) > 0
        with np.errstate(invalid="ignore"):
            reject = (clog >= self.thresh) | (null_neg & ~absorbed)
        if reject.any():
            off = int(np.argmax(reject))
            if not absorbed[off]:
                return "reject", off
        if absorbed[-1]:
            return "dead", n
        self.carry.j += n
        self.carry.S = float(s_cum[-1])
        self.carry.logT = float(clog[-1])
        return "run", n

    def trajectory(self, x: np.ndarray) -> np.ndarray:
        """Full logT (or log mixture) path over x, without stopping.

        Mirrors the state machine's conventions exactly: certain rejection
        (+inf) once the running sum exceeds N*mu0, except that a statistic
        already absorbed at zero stays at -inf forever.
        """
        n = len(x)
        cum = np.cumsum(x)
        s_prev = self.carry.S + np.concatenate(([0.0], cum[:-1]))
        s_cum = self.carry.S + cum
        jj = self.carry.j + np.arange(1, n + 1, dtype=float)
        m = self._null_means(n, s_prev, jj)
        if self.wor and math.isfinite(self.N):
            certain = np.maximum.accumulate((self.N * self.mu0 - s_cum) < 0.0)
        else:
            certain = np.zeros(n, dtype=bool)
        if isinstance(self.c, SqKellyMixture):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                lam = np.minimum(self.lams[None, :], 1.0 / m[:, None])
                factor = 1.0 + lam * (x - m)[:, None]
                factor = np.where((m >= self.u * (1.0 - DEGENERATE_REL))[:, None], 1.0, factor)
                bad = (m <= 0.0)[:, None]
                factor = np.where(bad, np.where((x > 0.0)[:, None], np.inf, 1.0), factor)
                lf = np.log(np.maximum(factor, 0.0))
                absorbed_cols = np.maximum.accumulate(lf == -np.inf, axis=0)
                clog = np.cumsum(lf, axis=0)
                clog = np.where(absorbed_cols, -np.inf, clog)
                shifted = clog + self.log_w[None, :]
                peak = shifted.max(axis=1)
                log_path = np.where(
                    np.isneginf(peak),
                    -np.inf,
                    peak + np.log(np.exp(shifted - peak[:, None]).sum(axis=1)),
                )
                dead = absorbed_cols.all(axis=1)
        else:
            lf = self._log_factors(x, m, s_prev, jj)
            dead = np.maximum.accumulate(lf == -np.inf)
            with np.errstate(invalid="ignore"):
                log_path = np.cumsum(lf)
        log_path = np.where(certain, np.inf, log_path)
        return np.where(dead, -np.inf, log_path)


# ---------------------------------------------------------------------------
# Replications and experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RepOutcome:
    draws: int
    rejected: bool
    cost: float
    overflowed: bool


@dataclass(frozen=True)
class ExperimentSpec:
    """One table cell: a method, a population, and a sampling protocol.

    cap bounds the number of draws examined (required for sampling with
    replacement). recount_addin charges a full count of N cards to any
    replication not confirmed within the cap. overflow_dash reproduces the
    with-replacement table convention that a cell whose cap is ever exceeded
    reports no mean at all.
    """

    method: ComparatorSpec
    population: PopulationSpec
    without_replacement: bool
    alpha: float = 0.05
    reps: int = 1000
    cap: int | None = None
    recount_addin: bool = False
    overflow_dash: bool = False
    mu0: float = 0.5
    u: float = 1.0

    def cell_key(self) -> str:
        mode = "wor" if self.without_replacement else "wr"
        return (
            f"{method_label(self.method)}|{self.population.label()}|{mode}"
            f"|cap={self.cap}|alpha={self.alpha}|mu0={self.mu0}|u={self.u}"
            f"|recount={self.recount_addin}"
        )


def method_label(c: ComparatorSpec) -> str:
    if isinstance(c, AlphaTest):
        e = c.est
        if isinstance(e, FixedEta):
            return f"fixed(eta0={e.eta0:g})"
        if isinstance(e, ShrinkTrunc):
            return f"shrink(eta0={e.eta0:g},d={e.d:g})"
        return f"bet(lam={e.lam:g})"
    if isinstance(c, AprioriKelly):
        return f"apkelly(eta={c.eta:g})"
    if isinstance(c, SqKellyMixture):
        return f"sqkelly(k={c.k})"
    if isinstance(c, SprtWoR):
        return f"sprt(eta={c.eta:g})"
    if isinstance(c, KaplanWald):
        return f"kw(g={c.g:g})"
    return f"kk(g={c.g:g})"


def simulate_once(
    method: ComparatorSpec,
    values: np.ndarray,
    *,
    without_replacement: bool,
    mu0: float,
    u: float,
    alpha: float,
    cap: int | None,
    recount_addin: bool,
    rng: np.random.Generator,
) -> RepOutcome:
    """Run one replication: sample from values, stop at the first rejection."""
    n_pop = len(values)
    if without_replacement:
        horizon = n_pop if cap is None else min(cap, n_pop)
    else:
        if cap is None:
            raise InvalidConfig("sampling with replacement needs a draw cap")
        horizon = cap
    stepper = _Stepper(
        method,
        wor=without_replacement,
        N=n_pop if without_replacement else math.inf,
        mu0=mu0,
        u=u,
        alpha=alpha,
    )
    order = rng.permutation(n_pop) if without_replacement else None
    drawn = 0
    block = 256
    while drawn < horizon:
        b = min(block, horizon - drawn)
        if without_replacement:
            x = values[order[drawn : drawn + b]]
        else:
            x = values[rng.integers(0, n_pop, size=b)]
        verdict, off = stepper.consume(x)
        if verdict == "reject":
            j = drawn + off + 1
            return RepOutcome(draws=j, rejected=True, cost=float(j), overflowed=False)
        if verdict == "dead":
            # absorbed at zero: the test can never reject, so the run plays
            # out to its budget without confirmation
            break
        drawn += b
        block = min(block * 4, 1 << 16)
    draws = horizon
    if without_replacement and horizon == n_pop:
        return RepOutcome(draws=draws, rejected=False, cost=float(n_pop), overflowed=False)
    if without_replacement and recount_addin:
        return RepOutcome(draws=draws, rejected=False, cost=float(n_pop), overflowed=False)
    if without_replacement:
        return RepOutcome(draws=draws, rejected=False, cost=float(horizon), overflowed=True)
    return RepOutcome(draws=draws, rejected=False, cost=float(horizon), overflowed=True)


def run_replication(
    method: ComparatorSpec,
    values: np.ndarray,
    *,
    without_replacement: bool,
    cap: int | None,
    alpha: float,
    rng: np.random.Generator,
    mu0: float = 0.5,
    u: float = 1.0,
    recount_addin: bool = False,
) -> tuple[float, bool]:
    """(charged sample size, rejected?) for a single replication."""
    out = simulate_once(
        method,
        values,
        without_replacement=without_replacement,
        mu0=mu0,
        u=u,
        alpha=alpha,
        cap=cap,
        recount_addin=recount_addin,
        rng=rng,
    )
    return out.cost, out.rejected


def run_cell(spec: ExperimentSpec, seed: int) -> dict:
    """All replications of one cell; deterministic in (seed, spec) alone.

    Populations with a random component (the uniform remainder of a
    comparison mixture) are drawn afresh per replication from the
    replication's own stream, so cell means average over population
    realizations instead of inheriting one realization's bias. Point-mass
    populations are built once.
    """
    key = spec.cell_key()
    random_pop = isinstance(spec.population.kind, ComparisonMix)
    values = None
    if not random_pop:
        values = materialize_population(spec.population, rng_for(seed, "pop", key))
    costs = np.empty(spec.reps)
    rejected = np.zeros(spec.reps, dtype=bool)
    overflow = False
    completed = spec.reps
    for i in range(spec.reps):
        rng = rng_for(seed, "rep", key, i)
        if random_pop:
            values = materialize_population(spec.population, rng)
        out = simulate_once(
            spec.method,
            values,
            without_replacement=spec.without_replacement,
            mu0=spec.mu0,
            u=spec.u,
            alpha=spec.alpha,
            cap=spec.cap,
            recount_addin=spec.recount_addin,
            rng=rng,
        )
        costs[i] = out.cost
        rejected[i] = out.rejected
        if out.overflowed:
            overflow = True
            if spec.overflow_dash:
                # the cell reports no mean once any replication exceeds the
                # cap, so the remaining replications cannot change the row
                completed = i + 1
                break
    dashed = overflow and spec.overflow_dash
    return {
        "cell": key,
        "method": method_label(spec.method),
        "population": spec.population.label(),
        "mode": "wor" if spec.without_replacement else "wr",
        "alpha": spec.alpha,
        "cap": spec.cap,
        "reps": completed,
        "mean_n": None if dashed else float(np.mean(costs[:completed])),
        "reject_rate": None if dashed else float(np.mean(rejected[:completed])),
        "overflow": overflow,
    }


def run_experiment(grid: list[ExperimentSpec], seed: int, jobs: int = 1) -> list[dict]:
    """Evaluate a grid of cells; output order and content depend only on
    (grid order, seed), never on jobs."""
    if jobs <= 1:
        return [run_cell(spec, seed) for spec in grid]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, grid, [seed] * len(grid)))


def geo_mean_ratio_summary(
    means: dict[str, dict[str, float]]
) -> dict[str, float]:
    """Geometric mean, per method, of mean-sample-size ratios to the best
    method in each condition.

    means maps method -> {condition -> mean sample size}; every method must
    cover every condition (MissingCell otherwise). The best possible score is
    1.0, achieved only by a method that is best in every condition.
    """
    conditions: set[str] = set()
    for per_cond in means.values():
        conditions.update(per_cond)
    for method, per_cond in means.items():
        missing = conditions - set(per_cond)
        if missing:
            raise MissingCell(f"method {method} missing conditions {sorted(missing)}")
    scores: dict[str, float] = {}
    for method, per_cond in means.items():
        logs = []
        for cond in conditions:
            best = min(means[m][cond] for m in means)
            logs.append(math.log(per_cond[cond] / best))
        scores[method] = math.exp(sum(logs) / len(logs))
    return scores
