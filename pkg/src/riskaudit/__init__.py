"""Risk-limiting election audit engine.

Anytime-valid sequential tests of bounded-population means, ballot- and
batch-level audit machinery, a deterministic Monte-Carlo harness, and a
persisted live-audit session service.
"""

from .assorters import (
    CardInterpretation,
    ReportedTallies,
    Vote,
    plurality_assort,
    polling_eta0,
    theta_prime,
)
from .batch import (
    BatchCollection,
    BatchDrawState,
    batch_alpha_step,
    batch_null_mean,
    check_commensurable,
    init_batch_audit,
    pps_draw,
    read_batch_manifest,
    rescale_equal_prob,
)
from .martingale import (
    AlphaTest,
    AprioriKelly,
    ComparatorSpec,
    EstimatorSpec,
    FixedEta,
    FromLambda,
    KaplanKolmogorov,
    KaplanWald,
    MixtureState,
    Sampling,
    SequentialTest,
    ShrinkTrunc,
    SprtWoR,
    SqKellyMixture,
    Status,
    TestConfig,
    TestState,
    alpha_step,
    eta_shrink_trunc,
    eta_to_lambda,
    init_mixture,
    init_test,
    kaplan_kolmogorov_step,
    kaplan_wald_step,
    lambda_to_eta,
    mixture_p_value,
    mixture_step,
    null_mean_wor,
    p_value,
    sprt_wor_step,
)
from .populations import (
    Binary,
    Blanks,
    ComparisonMix,
    PopulationSpec,
    materialize_population,
)
from .rng import rng_for
from .session import AssertionConfig, AuditSession, SessionConfig
from .simulate import (
    ExperimentSpec,
    geo_mean_ratio_summary,
    run_experiment,
    run_replication,
    simulate_once,
)

__all__ = [name for name in dir() if not name.startswith("_")]
