"""Sequential tests of H0: population mean <= mu0 for bounded values in [0, u].

Every test here is a nonnegative (super)martingale under the null, tracked in
log domain, with rejection when the statistic reaches 1/alpha and an anytime
P-value of min(1, 1/max_j T_j). The adaptive test multiplies, per draw,

    T <- T * (x*eta_j/mu_j + (u - x)*(u - eta_j)/(u - mu_j)) / u

which is computed here in the algebraically identical betting form
1 + lambda_j*(x - mu_j) with lambda_j = (eta_j/mu_j - 1)/(u - mu_j). The
betting form makes an on-null draw (x == mu_j) multiply T by exactly 1.0 and
never divides by u - mu_j when the bet is supplied directly.

Sampling without replacement updates the conditional null mean after each
draw; once the running sum exceeds N*mu0 the null is impossible and T is set
to +infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    DegenerateNull,
    InvalidConfig,
    OutOfRange,
    StepAfterFinish,
)

# Relative window below u inside which the conditional null mean leaves no
# room for any alternative; the test then cannot grow (factor 1).
DEGENERATE_REL = 1e-12


class Sampling(str, Enum):
    WITH_REPLACEMENT = "with_replacement"
    WITHOUT_REPLACEMENT = "without_replacement"


class Status(str, Enum):
    RUNNING = "running"
    REJECTED = "rejected"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class TestConfig:
    """Parameters of one sequential test.

    alpha: risk limit in (0, 1).
    u: upper bound on the population values (> 0).
    mu0: hypothesized population mean, in [0, u].
    N: population size; math.inf permitted for sampling with replacement.
    sampling: with or without replacement. Without replacement requires
        finite N >= 1.
    """

    alpha: float
    u: float = 1.0
    mu0: float = 0.5
    N: float = math.inf
    sampling: Sampling = Sampling.WITH_REPLACEMENT

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise InvalidConfig(f"alpha must be in (0,1), got {self.alpha}")
        if not (self.u > 0.0) or not math.isfinite(self.u):
            raise InvalidConfig(f"u must be a positive real, got {self.u}")
        if not (0.0 <= self.mu0 <= self.u):
            raise InvalidConfig(f"mu0 must be in [0,u], got {self.mu0}")
        if self.sampling is Sampling.WITHOUT_REPLACEMENT:
            if not (math.isfinite(self.N) and self.N >= 1 and float(self.N).is_integer()):
                raise InvalidConfig(
                    "sampling without replacement requires a finite integer N >= 1"
                )
        else:
            if self.N != math.inf and not (
                math.isfinite(self.N) and self.N >= 1 and float(self.N).is_integer()
            ):
                raise InvalidConfig(f"N must be a positive integer or inf, got {self.N}")

    @property
    def log_threshold(self) -> float:
        """log T at which the test rejects: T >= 1/alpha."""
        return -math.log(self.alpha)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.N)


# ---------------------------------------------------------------------------
# Estimator strategies for the alternative mean eta_j
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedEta:
    """eta_j = eta0 on every draw (floored at the current null mean)."""

    eta0: float


@dataclass(frozen=True)
class ShrinkTrunc:
    """Truncated shrinkage estimate of the population mean.

    eta_j = ((d*eta0 + S)/(d + j - 1)  v  (mu_j + c/sqrt(d + j - 1)))  ^  (u - eps_u)

    where S is the sample sum before draw j. d >= 0 weights eta0 as if it were
    the mean of d prior draws (d need not be an integer); c >= 0 scales the
    floor above the null mean; eps_u in (0, u) keeps eta strictly below u so
    the statistic can never be absorbed at zero. c defaults to (eta0 - mu0)/2
    and eps_u to u * 1e-6.
    """

    eta0: float
    d: float
    c: float | None = None
    eps_u: float | None = None


@dataclass(frozen=True)
class FromLambda:
    """A fixed bet fraction: the test multiplies by 1 + lam*(x - mu_j).

    Equivalent to choosing eta_j = mu_j*(1 + lam*(u - mu_j)); lam is capped
    at 1/mu_j per draw so the factor stays nonnegative.
    """

    lam: float


EstimatorSpec = FixedEta | ShrinkTrunc | FromLambda


def resolve_estimator(est: EstimatorSpec, config: TestConfig) -> EstimatorSpec:
    """Validate est against config and fill in defaulted parameters."""
    if isinstance(est, FixedEta):
        if not (config.mu0 < est.eta0 <= config.u):
            raise InvalidConfig(f"Fixed eta0 must be in (mu0, u], got {est.eta0}")
        return est
    if isinstance(est, ShrinkTrunc):
        if not (config.mu0 < est.eta0 <= config.u):
            raise InvalidConfig(f"ShrinkTrunc eta0 must be in (mu0, u], got {est.eta0}")
        if not est.d > 0:
            # the shrinkage weight divides by d + j - 1, undefined at j=1 for d=0
            raise InvalidConfig(f"ShrinkTrunc d must be > 0, got {est.d}")
        c = (est.eta0 - config.mu0) / 2 if est.c is None else est.c
        eps_u = config.u * 1e-6 if est.eps_u is None else est.eps_u
        if c < 0:
            raise InvalidConfig(f"ShrinkTrunc c must be >= 0, got {c}")
        if not (0.0 < eps_u < config.u):
            raise InvalidConfig(f"ShrinkTrunc eps_u must be in (0,u), got {eps_u}")
        return ShrinkTrunc(est.eta0, est.d, c, eps_u)
    if isinstance(est, FromLambda):
        if config.mu0 <= 0:
            raise InvalidConfig("FromLambda requires mu0 > 0")
        if not (0.0 <= est.lam <= 1.0 / config.mu0):
            raise InvalidConfig(f"lambda must be in [0, 1/mu0], got {est.lam}")
        return est
    raise InvalidConfig(f"unknown estimator {est!r}")


# ---------------------------------------------------------------------------
# Test state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestState:
    """One test's evolving statistic.

    j: draws consumed.  logT: natural log of T_j (+inf means certain
    rejection, -inf means T was absorbed at zero).  max_logT: running maximum
    of logT, which determines the anytime P-value.  S: running sample sum.
    muj: conditional null mean for the next draw.  finished: life-cycle flag.
    """

    j: int
    logT: float
    max_logT: float
    S: float
    muj: float
    finished: Status


def init_test(config: TestConfig, est: EstimatorSpec) -> TestState:
    """Fresh state with T_0 = 1 for the given config and estimator."""
    resolve_estimator(est, config)
    return TestState(
        j=0, logT=0.0, max_logT=0.0, S=0.0, muj=config.mu0, finished=Status.RUNNING
    )


def null_mean_wor(N: float, mu0: float, S: float, j: int) -> float:
    """Mean of the numbers remaining before draw j under the null.

    S is the sum of the first j-1 draws. The value (N*mu0 - S)/(N - j + 1)
    may be negative, which the caller interprets as the null being impossible.
    """
    return (N * mu0 - S) / (N - j + 1)


def eta_shrink_trunc(
    j: int, S: float, config: TestConfig, spec: ShrinkTrunc, muj: float
) -> float:
    """Truncated shrinkage alternative for draw j given sample sum S.

    Raises DegenerateNull when muj >= u - eps_u, where no admissible
    alternative remains; callers treat such a step as unable to grow.
    """
    spec = (
        spec
        if spec.c is not None and spec.eps_u is not None
        else resolve_estimator(spec, config)
    )
    cap = config.u - spec.eps_u
    if muj >= cap:
        raise DegenerateNull(f"null mean {muj} leaves no eta below {cap}")
    shrunk = (spec.d * spec.eta0 + S) / (spec.d + j - 1)
    floor = muj + spec.c / math.sqrt(spec.d + j - 1)
    return min(max(shrunk, floor), cap)


def lambda_to_eta(lam: float, muj: float, u: float) -> float:
    """Alternative mean implied by betting the fraction lam at null mean muj."""
    if not (0.0 < muj < u):
        raise OutOfRange(f"muj must be in (0,u), got {muj}")
    if not (0.0 <= lam <= 1.0 / muj):
        raise OutOfRange(f"lambda must be in [0, 1/muj], got {lam}")
    return muj * (1.0 + lam * (u - muj))


def eta_to_lambda(eta: float, muj: float, u: float) -> float:
    """Bet fraction equivalent to the alternative mean eta at null mean muj."""
    if not (0.0 < muj < u):
        raise OutOfRange(f"muj must be in (0,u), got {muj}")
    if not (muj <= eta <= u):
        raise OutOfRange(f"eta must be in [muj, u], got {eta}")
    return (eta / muj - 1.0) / (u - muj)


def p_value(state: TestState) -> float:
    """Anytime P-value min(1, 1/max_j T_j); 0 once T has hit +infinity."""
    if state.max_logT == math.inf:
        return 0.0
    return min(1.0, math.exp(-state.max_logT))


# ---------------------------------------------------------------------------
# Per-draw growth factors
# ---------------------------------------------------------------------------


def _eta_for_draw(est: EstimatorSpec, j: int, S: float, muj: float, config: TestConfig) -> float:
    """Alternative mean for draw j. Estimators never bet below the null mean."""
    if isinstance(est, FixedEta):
        return min(max(est.eta0, muj), config.u)
    if isinstance(est, ShrinkTrunc):
        return eta_shrink_trunc(j, S, config, est, muj)
    raise InvalidConfig(f"estimator {est!r} has no eta form")


def alpha_factor(x: float, muj: float, eta: float, u: float) -> float:
    """Multiplicative growth for one draw, in the betting form.

    Handles the null-mean edge cases: muj <= 0 with x > 0 means the null is
    impossible (factor +inf); muj <= 0 with x == 0 uses the limit (u - eta)/u;
    muj within DEGENERATE_REL of u leaves no admissible bet (factor 1).
    """
    if muj <= 0.0:
        return math.inf if x > 0.0 else (u - eta) / u
    if muj >= u * (1.0 - DEGENERATE_REL):
        return 1.0
    lam = (eta / muj - 1.0) / (u - muj)
    return 1.0 + lam * (x - muj)


def bet_factor(x: float, muj: float, lam: float, u: float) -> float:
    """Growth for a fixed bet fraction, capping lam at 1/muj per draw."""
    if muj <= 0.0:
        return math.inf if x > 0.0 else 1.0
    if muj >= u * (1.0 - DEGENERATE_REL):
        return 1.0
    lam = min(lam, 1.0 / muj)
    return 1.0 + lam * (x - muj)


def kaplan_wald_factor(x: float, muj: float, g: float, u: float) -> float:
    """Growth g*(x/theta - 1) + 1 with theta the current null mean."""
    if muj <= 0.0:
        return math.inf if x > 0.0 else 1.0 - g
    return g * (x / muj - 1.0) + 1.0


def kaplan_kolmogorov_factor(x: float, muj: float, g: float, u: float) -> float:
    """Growth (x + g)/(theta + g) with theta the current null mean."""
    if muj + g <= 0.0:
        return math.inf if x > 0.0 else 1.0
    return (x + g) / (muj + g)


# ---------------------------------------------------------------------------
# Step mechanics shared by every method
# ---------------------------------------------------------------------------


def _check_step(state: TestState, x: float, config: TestConfig) -> None:
    if state.finished is not Status.RUNNING:
        raise StepAfterFinish(f"test already {state.finished.value}")
    if not (0.0 <= x <= config.u):
        raise OutOfRange(f"draw {x} outside [0, {config.u}]")


def _apply_factor(state: TestState, x: float, factor: float, config: TestConfig) -> TestState:
    """Fold one draw's factor into the state and apply the termination rules."""
    if state.logT == -math.inf:
        log_t = -math.inf  # absorbed at zero; nothing can revive it
    elif factor == math.inf:
        log_t = math.inf
    elif factor <= 0.0:
        log_t = -math.inf  # stake lost entirely (eta = u and x = 0)
    else:
        log_t = state.logT + math.log(factor)

    j = state.j + 1
    s = state.S + x

    if config.finite and config.sampling is Sampling.WITHOUT_REPLACEMENT:
        remaining = config.N - j
        null_mass = config.N * config.mu0 - s
        if null_mass < 0.0 and log_t != -math.inf:
            # every completion of the population now has mean > mu0
            log_t = math.inf
        muj = null_mass / remaining if remaining > 0 else config.mu0
    else:
        muj = config.mu0

    max_log_t = max(state.max_logT, log_t)
    finished = Status.RUNNING
    if log_t >= config.log_threshold:
        finished = Status.REJECTED
    elif config.sampling is Sampling.WITHOUT_REPLACEMENT and j >= config.N:
        finished = Status.EXHAUSTED
    return TestState(j=j, logT=log_t, max_logT=max_log_t, S=s, muj=muj, finished=finished)


def alpha_step(state: TestState, x: float, config: TestConfig, est: EstimatorSpec) -> TestState:
    """Consume one draw with the adaptive betting test.

    The estimator produces eta_j from (j, S, mu_j); the state is advanced in
    log domain and the without-replacement null mean is updated. Raises
    OutOfRange if x is outside [0, u] and StepAfterFinish if the test is done.
    """
    _check_step(state, x, config)
    if isinstance(est, FromLambda):
        factor = bet_factor(x, state.muj, est.lam, config.u)
    else:
        try:
            eta = _eta_for_draw(est, state.j + 1, state.S, state.muj, config)
        except DegenerateNull:
            return _apply_factor(state, x, 1.0, config)
        factor = alpha_factor(x, state.muj, eta, config.u)
    return _apply_factor(state, x, factor, config)


def sprt_wor_step(state: TestState, x: float, config: TestConfig, eta0: float) -> TestState:
    """One draw of the without-replacement SPRT against a fixed alternative.

    The alternative mean is the mean of the remaining population if the
    original mean were eta0: (N*eta0 - S)/(N - j + 1). If that falls to the
    null mean or below, the bet is zero; if it exceeds u the alternative puts
    zero probability on the data and T is absorbed at zero via eta = u.
    """
    _check_step(state, x, config)
    if config.finite:
        eta = (config.N * eta0 - state.S) / (config.N - state.j)
        eta = min(max(eta, state.muj), config.u)
    else:
        eta = eta0
    factor = alpha_factor(x, state.muj, eta, config.u)
    return _apply_factor(state, x, factor, config)


def kaplan_wald_step(state: TestState, x: float, config: TestConfig, g: float) -> TestState:
    """One draw of the hedged likelihood test with factor g*(x/theta - 1) + 1."""
    if not (0.0 <= g <= 1.0):
        raise OutOfRange(f"Kaplan-Wald g must be in [0,1], got {g}")
    _check_step(state, x, config)
    factor = kaplan_wald_factor(x, state.muj, g, config.u)
    return _apply_factor(state, x, factor, config)


def kaplan_kolmogorov_step(state: TestState, x: float, config: TestConfig, g: float) -> TestState:
    """One draw of the shifted-ratio test with factor (x + g)/(theta + g)."""
    if g < 0.0:
        raise OutOfRange(f"Kaplan-Kolmogorov g must be >= 0, got {g}")
    _check_step(state, x, config)
    factor = kaplan_kolmogorov_factor(x, state.muj, g, config.u)
    return _apply_factor(state, x, factor, config)


# ---------------------------------------------------------------------------
# Convex mixtures of fixed-bet streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixtureState:
    """States of the component streams plus the mixture statistic."""

    components: tuple[TestState, ...]
    log_mix: float
    max_log_mix: float
    finished: Status

    @property
    def j(self) -> int:
        return self.components[0].j


def init_mixture(config: TestConfig, lams: tuple[float, ...], weights: tuple[float, ...]) -> MixtureState:
    if len(lams) != len(weights) or not lams:
        raise InvalidConfig("mixture needs matching, nonempty lams and weights")
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise InvalidConfig("mixture weights must be nonnegative and sum to 1")
    for lam in lams:
        resolve_estimator(FromLambda(lam), config)
    comps = tuple(init_test(config, FromLambda(lam)) for lam in lams)
    return MixtureState(comps, 0.0, 0.0, Status.RUNNING)


def _log_weighted_sum(weights: tuple[float, ...], log_ts: list[float]) -> float:
    if any(lt == math.inf for lt in log_ts):
        return math.inf
    m = max(log_ts)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(w * math.exp(lt - m) for w, lt in zip(weights, log_ts)))


def mixture_step(
    state: MixtureState,
    x: float,
    config: TestConfig,
    lams: tuple[float, ...],
    weights: tuple[float, ...],
) -> MixtureState:
    """Advance every component one draw; reject when sum_k w_k T_k >= 1/alpha."""
    if state.finished is not Status.RUNNING:
        raise StepAfterFinish(f"mixture already {state.finished.value}")
    new_comps = []
    for comp, lam in zip(state.components, lams):
        # components carry no individual rejection; the mixture decides
        running = replace(comp, finished=Status.RUNNING)
        new_comps.append(alpha_step(running, x, config, FromLambda(lam)))
    log_mix = _log_weighted_sum(weights, [c.logT for c in new_comps])
    max_log_mix = max(state.max_log_mix, log_mix)
    finished = Status.RUNNING
    if log_mix >= config.log_threshold:
        finished = Status.REJECTED
    elif new_comps[0].finished is Status.EXHAUSTED:
        finished = Status.EXHAUSTED
    return MixtureState(tuple(new_comps), log_mix, max_log_mix, finished)


def mixture_p_value(state: MixtureState) -> float:
    if state.max_log_mix == math.inf:
        return 0.0
    return min(1.0, math.exp(-state.max_log_mix))


# ---------------------------------------------------------------------------
# Comparator menu and a single-stream driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaTest:
    est: EstimatorSpec


@dataclass(frozen=True)
class AprioriKelly:
    """Fixed bet chosen up front: lam = (eta/mu0 - 1)/(u - mu0)."""

    eta: float


@dataclass(frozen=True)
class SqKellyMixture:
    """Convex mixture of K fixed bets lam_k = (k/K)*(0.99/mu0), weights ~ 1/k.

    The mixture favors small bets (small margins). This comparator is an
    approximation: it carries the mixture idea, not externally tuned weights.
    """

    k: int = 10
    weights: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SprtWoR:
    eta: float


@dataclass(frozen=True)
class KaplanWald:
    g: float


@dataclass(frozen=True)
class KaplanKolmogorov:
    g: float


ComparatorSpec = (
    AlphaTest | AprioriKelly | SqKellyMixture | SprtWoR | KaplanWald | KaplanKolmogorov
)


def mixture_bets(spec: SqKellyMixture, mu0: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Bet grid and weights for the mixture comparator."""
    if spec.k < 1:
        raise InvalidConfig(f"mixture needs K >= 1, got {spec.k}")
    lams = tuple((k / spec.k) * (1.0 / mu0) * 0.99 for k in range(1, spec.k + 1))
    if spec.weights is None:
        raw = [1.0 / k for k in range(1, spec.k + 1)]
        tot = sum(raw)
        weights = tuple(w / tot for w in raw)
    else:
        if len(spec.weights) != spec.k:
            raise InvalidConfig("mixture weights must have length K")
        if any(w < 0 for w in spec.weights) or abs(sum(spec.weights) - 1.0) > 1e-9:
            raise InvalidConfig("mixture weights must be nonnegative and sum to 1")
        weights = tuple(spec.weights)
    return lams, weights


class SequentialTest:
    """Owns one assertion's running test: config + comparator + state.

    Single-owner by design: callers feed draws one at a time and read the
    anytime P-value. All heavy lifting is delegated to the pure step
    functions, so two drivers fed the same draws agree exactly.
    """

    def __init__(self, config: TestConfig, comparator: ComparatorSpec):
        self.config = config
        self.comparator = comparator
        if isinstance(comparator, SqKellyMixture):
            self._lams, self._weights = mixture_bets(comparator, config.mu0)
            self.state: TestState | MixtureState = init_mixture(
                config, self._lams, self._weights
            )
        elif isinstance(comparator, AlphaTest):
            self._est = resolve_estimator(comparator.est, config)
            self.state = init_test(config, self._est)
        elif isinstance(comparator, AprioriKelly):
            lam = eta_to_lambda(comparator.eta, config.mu0, config.u)
            self._est = FromLambda(lam)
            self.state = init_test(config, self._est)
        elif isinstance(comparator, (SprtWoR, KaplanWald, KaplanKolmogorov)):
            if isinstance(comparator, SprtWoR) and not (
                config.mu0 < comparator.eta <= config.u
            ):
                raise InvalidConfig(f"SPRT eta must be in (mu0, u], got {comparator.eta}")
            if isinstance(comparator, KaplanWald) and not (0.0 <= comparator.g <= 1.0):
                raise InvalidConfig(f"Kaplan-Wald g must be in [0,1], got {comparator.g}")
            if isinstance(comparator, KaplanKolmogorov) and comparator.g < 0.0:
                raise InvalidConfig(f"Kaplan-Kolmogorov g must be >= 0, got {comparator.g}")
            self.state = TestState(
                j=0, logT=0.0, max_logT=0.0, S=0.0, muj=config.mu0,
                finished=Status.RUNNING,
            )
        else:
            raise InvalidConfig(f"unknown comparator {comparator!r}")

    def step(self, x: float) -> None:
        c = self.comparator
        if isinstance(c, SqKellyMixture):
            self.state = mixture_step(self.state, x, self.config, self._lams, self._weights)
        elif isinstance(c, (AlphaTest, AprioriKelly)):
            self.state = alpha_step(self.state, x, self.config, self._est)
        elif isinstance(c, SprtWoR):
            self.state = sprt_wor_step(self.state, x, self.config, c.eta)
        elif isinstance(c, KaplanWald):
            self.state = kaplan_wald_step(self.state, x, self.config, c.g)
        else:
            self.state = kaplan_kolmogorov_step(self.state, x, self.config, c.g)

    @property
    def status(self) -> Status:
        return self.state.finished

    @property
    def draws(self) -> int:
        return self.state.j

    def p_value(self) -> float:
        if isinstance(self.state, MixtureState):
            return mixture_p_value(self.state)
        return p_value(self.state)
