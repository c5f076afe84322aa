"""Batch-polling and batch-level comparison audits.

Batches are sampled either with equal probability (after rescaling totals so
their mean equals the card-level assorter mean) or with probability
proportional to an a priori bound on each batch's assorter total. PPS draws
feed a generalized betting test whose upper bound changes from draw to draw.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import Exhausted, InvalidConfig, OutOfRange, StepAfterFinish
from .martingale import (
    EstimatorSpec,
    FixedEta,
    FromLambda,
    ShrinkTrunc,
    Status,
    TestState,
    alpha_factor,
    bet_factor,
)

MANIFEST_COLUMNS = ("batch_id", "cards", "assorter_total", "upper_bound")


@dataclass(frozen=True)
class BatchCollection:
    """Per-batch assorter totals, card counts, and a priori upper bounds."""

    ids: tuple[str, ...]
    sizes: tuple[int, ...]
    totals: tuple[float, ...]
    bounds: tuple[float, ...]

    def __post_init__(self) -> None:
        n = len(self.ids)
        if not (n == len(self.sizes) == len(self.totals) == len(self.bounds)) or n == 0:
            raise InvalidConfig("batch collection needs matching, nonempty columns")
        for i in range(n):
            if self.sizes[i] < 1:
                raise InvalidConfig(f"batch {self.ids[i]} has no cards")
            if not (0.0 <= self.totals[i] <= self.bounds[i]):
                raise InvalidConfig(
                    f"batch {self.ids[i]}: total {self.totals[i]} outside [0, {self.bounds[i]}]"
                )
        if not sum(self.bounds) > 0:
            raise InvalidConfig("sum of batch bounds must be positive")

    @property
    def cards(self) -> int:
        return sum(self.sizes)

    @property
    def bound_sum(self) -> float:
        return float(sum(self.bounds))

    @classmethod
    def with_default_bounds(
        cls,
        ids: tuple[str, ...],
        sizes: tuple[int, ...],
        totals: tuple[float, ...],
        u: float,
    ) -> "BatchCollection":
        """Use the always-admissible bound u * |B_k| for every batch."""
        return cls(ids, sizes, totals, tuple(u * s for s in sizes))


def read_batch_manifest(path: str) -> BatchCollection:
    """Load a delimited batch manifest.

    Columns (exact names): batch_id, cards, assorter_total, upper_bound.
    """
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in MANIFEST_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise InvalidConfig(f"manifest missing columns: {missing}")
        ids, sizes, totals, bounds = [], [], [], []
        for row in reader:
            ids.append(row["batch_id"])
            sizes.append(int(row["cards"]))
            totals.append(float(row["assorter_total"]))
            bounds.append(float(row["upper_bound"]))
    return BatchCollection(tuple(ids), tuple(sizes), tuple(totals), tuple(bounds))


def rescale_equal_prob(batches: BatchCollection) -> tuple[np.ndarray, float]:
    """Totals rescaled for equal-probability batch sampling.

    Returns (values, u_tilde): values[k] = A_k * K / D has mean equal to the
    card-level assorter mean, and every value lies in [0, u_tilde] where
    u_tilde = max_k bound_k * K / D. Feed these to the ballot-level tests with
    population size K and upper bound u_tilde.
    """
    k = len(batches.ids)
    d = batches.cards
    values = np.array([t * k / d for t in batches.totals], dtype=float)
    u_tilde = max(b * k / d for b in batches.bounds)
    return values, u_tilde


def check_commensurable(
    bounds_j: tuple[float, ...], bounds_k: tuple[float, ...], rel_tol: float = 1e-9
) -> bool:
    """True iff the two assorters' batch bounds are in a constant ratio."""
    if len(bounds_j) != len(bounds_k) or not bounds_j:
        return False
    ratio = bounds_j[0] / bounds_k[0]
    return all(
        math.isclose(bj / bk, ratio, rel_tol=rel_tol)
        for bj, bk in zip(bounds_j, bounds_k)
    )


# ---------------------------------------------------------------------------
# PPS draws with a draw-dependent bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchDrawState:
    """Sampling bookkeeping plus the embedded test statistic.

    Between pps_draw and batch_alpha_step, `pending` is True and test.muj
    still holds the null mean the pending draw was selected under; the step
    consumes it and refreshes muj for the next selection.
    """

    batches: BatchCollection
    alpha: float
    mu0: float
    without_replacement: bool
    remaining: tuple[int, ...]
    bound_rem: float
    cards_rem: int
    drawn_total: float
    test: TestState
    pending: bool = False

    @property
    def u_hat(self) -> float:
        """Current population bound per card: U / |D| over the remaining set."""
        return self.bound_rem / self.cards_rem

    @property
    def log_threshold(self) -> float:
        return -math.log(self.alpha)


def init_batch_audit(
    batches: BatchCollection,
    alpha: float,
    mu0: float = 0.5,
    without_replacement: bool = True,
) -> BatchDrawState:
    if not (0.0 < alpha < 1.0):
        raise InvalidConfig(f"alpha must be in (0,1), got {alpha}")
    test = TestState(
        j=0, logT=0.0, max_logT=0.0, S=0.0, muj=mu0, finished=Status.RUNNING
    )
    return BatchDrawState(
        batches=batches,
        alpha=alpha,
        mu0=mu0,
        without_replacement=without_replacement,
        remaining=tuple(range(len(batches.ids))),
        bound_rem=batches.bound_sum,
        cards_rem=batches.cards,
        drawn_total=0.0,
        test=test,
    )


def batch_null_mean(state: BatchDrawState, mu0: float) -> float:
    """(|D|*mu0 - sum of drawn totals) / cards remaining; negative means
    the null is impossible."""
    return (state.batches.cards * mu0 - state.drawn_total) / state.cards_rem


def pps_draw(
    state: BatchDrawState, rng: np.random.Generator
) -> tuple[tuple[int, float, float], BatchDrawState]:
    """Select a batch with probability bound_k / U over the remaining set.

    Returns ((batch index, A_hat, u_hat), new state). A_hat = A_k * U /
    (bound_k * |D|) lies in [0, u_hat] with u_hat = U / |D|. Without
    replacement the batch leaves the remaining set and U, |D| shrink; the
    already-selected null mean stays on the state until batch_alpha_step
    consumes it.
    """
    if state.pending:
        raise StepAfterFinish("previous draw has not been stepped yet")
    if not state.remaining:
        raise Exhausted("no batches remain")
    b = state.batches
    u_hat = state.u_hat
    r = rng.random() * state.bound_rem
    acc = 0.0
    k = state.remaining[-1]
    for idx in state.remaining:
        acc += b.bounds[idx]
        if r < acc:
            k = idx
            break
    a_hat = b.totals[k] * state.bound_rem / (b.bounds[k] * state.cards_rem)
    if state.without_replacement:
        new_state = replace(
            state,
            remaining=tuple(i for i in state.remaining if i != k),
            bound_rem=state.bound_rem - b.bounds[k],
            cards_rem=state.cards_rem - b.sizes[k],
            drawn_total=state.drawn_total + b.totals[k],
            pending=True,
        )
    else:
        new_state = replace(state, pending=True)
    return (k, a_hat, u_hat), new_state


def _batch_eta(
    est: EstimatorSpec, j: int, s: float, mu: float, u_hat: float, mu0: float
) -> float:
    """Alternative mean clamped into (mu, u_hat] for the draw-dependent bound."""
    if isinstance(est, ShrinkTrunc):
        c = (est.eta0 - mu0) / 2 if est.c is None else est.c
        eps = u_hat * 1e-6
        cap = u_hat - eps
        if mu >= cap:
            return mu  # degenerate: no admissible eta, bet nothing
        shrunk = (est.d * est.eta0 + s) / (est.d + j - 1)
        floor = mu + c / math.sqrt(est.d + j - 1)
        return min(max(shrunk, floor), cap)
    if isinstance(est, FixedEta):
        return min(max(est.eta0, mu), u_hat)
    raise InvalidConfig(f"estimator {est!r} not usable for batch audits")


def batch_alpha_step(
    state: BatchDrawState, a_hat: float, u_hat: float, est: EstimatorSpec
) -> BatchDrawState:
    """Fold one PPS draw into the embedded test.

    Multiplies T by (A_hat/mu)*(eta - mu)/(u_hat - mu) + (u_hat - eta)/(u_hat - mu)
    in log domain, with eta from the estimator clamped into (mu, u_hat].
    Termination mirrors the ballot-level rules: certainty when the drawn
    totals exceed |D|*mu0, rejection at 1/alpha, exhaustion when no batches
    remain.
    """
    t = state.test
    if t.finished is not Status.RUNNING:
        raise StepAfterFinish(f"batch audit already {t.finished.value}")
    if not (0.0 <= a_hat <= u_hat * (1 + 1e-12)):
        raise OutOfRange(f"A_hat {a_hat} outside [0, {u_hat}]")
    mu = t.muj
    if isinstance(est, FromLambda):
        factor = bet_factor(a_hat, mu, est.lam, u_hat)
    else:
        eta = _batch_eta(est, t.j + 1, t.S, mu, u_hat, state.mu0)
        factor = alpha_factor(a_hat, mu, eta, u_hat)

    if t.logT == -math.inf:
        log_t = -math.inf
    elif factor == math.inf:
        log_t = math.inf
    elif factor <= 0.0:
        log_t = -math.inf
    else:
        log_t = t.logT + math.log(factor)

    j = t.j + 1
    s = t.S + a_hat
    if state.without_replacement:
        null_mass = state.batches.cards * state.mu0 - state.drawn_total
        if null_mass < 0.0 and log_t != -math.inf:
            log_t = math.inf
        muj = null_mass / state.cards_rem if state.cards_rem > 0 else state.mu0
    else:
        muj = state.mu0

    finished = Status.RUNNING
    if log_t >= state.log_threshold:
        finished = Status.REJECTED
    elif state.without_replacement and not state.remaining:
        finished = Status.EXHAUSTED
    new_test = TestState(
        j=j, logT=log_t, max_logT=max(t.max_logT, log_t), S=s, muj=muj, finished=finished
    )
    return replace(state, test=new_test, pending=False)
