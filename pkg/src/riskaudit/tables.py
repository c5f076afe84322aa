"""Named experiment grids at desk scale.

Each table is a named reference protocol, cut down so the whole set runs
on a laptop in minutes (fewer grid points, and replication counts documented
per table). Cells are deterministic in (table, seed); reruns are byte
identical.

    t1  ballot polling, sampling with replacement, binary populations.
        1,000 reps, 100,000-draw cap with the dash convention: a cell whose
        cap is ever exceeded reports no mean.
    t2  ballot polling without replacement, N = 20,000, sampling capped at
        2,000 draws; replications not confirmed by the cap are charged a full
        count. 10,000 reps.
    t3  ballot polling without replacement with blank cards, N = 10,000,
        500 reps. t4 summarizes t3 by geometric mean ratio.
    t5/t6  comparison-audit mixture populations (mass 0.001 at 0, mass m at
        1, uniform remainder), N = 10,000, run to exhaustion. t5: 10,000
        reps; t6: 1,000 reps (500 for the two slowest conditions).
    t7  geometric-mean-ratio summary over the t5/t6 conditions.
"""

from __future__ import annotations

import csv
import io

from .martingale import (
    AlphaTest,
    AprioriKelly,
    ComparatorSpec,
    FixedEta,
    KaplanKolmogorov,
    KaplanWald,
    ShrinkTrunc,
    SprtWoR,
    SqKellyMixture,
)
from .populations import Binary, Blanks, ComparisonMix, PopulationSpec
from .simulate import (
    ExperimentSpec,
    geo_mean_ratio_summary,
    run_experiment,
)

CSV_COLUMNS = [
    "table", "method", "population", "mode", "alpha", "cap",
    "reps", "mean_n", "reject_rate", "overflow",
]

SUMMARY_COLUMNS = ["table", "method", "score", "conditions"]


def t1_grid() -> list[ExperimentSpec]:
    methods: list[ComparatorSpec] = [AlphaTest(FixedEta(0.7))] + [
        AlphaTest(ShrinkTrunc(0.7, d)) for d in (10, 100, 500, 1000)
    ]
    grid = []
    for theta in (0.6, 0.65, 0.7):
        pop = PopulationSpec(Binary(theta), 10_000)
        for m in methods:
            grid.append(
                ExperimentSpec(
                    method=m,
                    population=pop,
                    without_replacement=False,
                    reps=1000,
                    cap=100_000,
                    overflow_dash=True,
                )
            )
    return grid


def t2_grid() -> list[ExperimentSpec]:
    methods: list[ComparatorSpec] = [
        SprtWoR(0.7),
        SprtWoR(0.55),
        AlphaTest(ShrinkTrunc(0.7, 100)),
        AlphaTest(ShrinkTrunc(0.55, 1000)),
        AprioriKelly(0.7),
        SqKellyMixture(),
    ]
    grid = []
    for theta in (0.55, 0.6, 0.7):
        pop = PopulationSpec(Binary(theta), 20_000)
        for m in methods:
            grid.append(
                ExperimentSpec(
                    method=m,
                    population=pop,
                    without_replacement=True,
                    reps=10_000,
                    cap=2_000,
                    recount_addin=True,
                )
            )
    return grid


def t3_grid() -> list[ExperimentSpec]:
    methods: list[ComparatorSpec] = [
        AprioriKelly(0.55),
        AprioriKelly(0.6),
        AlphaTest(ShrinkTrunc(0.55, 100)),
        AlphaTest(ShrinkTrunc(0.6, 100)),
        AlphaTest(ShrinkTrunc(0.7, 100)),
        AlphaTest(FixedEta(0.6)),
        SqKellyMixture(),
    ]
    grid = []
    for theta in (0.55, 0.6, 0.7):
        for b in (0.1, 0.25, 0.5):
            pop = PopulationSpec(Blanks(theta, b), 10_000)
            for m in methods:
                grid.append(
                    ExperimentSpec(
                        method=m,
                        population=pop,
                        without_replacement=True,
                        reps=500,
                    )
                )
    return grid


COMPARISON_METHODS: list[ComparatorSpec] = (
    [AprioriKelly(e) for e in (0.99, 0.9, 0.75, 0.55)]
    + [
        AlphaTest(ShrinkTrunc(eta0, d))
        for eta0 in (0.99, 0.9, 0.75, 0.55)
        for d in (10, 100)
    ]
    + [KaplanKolmogorov(g) for g in (0.01, 0.1, 0.2)]
    + [KaplanWald(g) for g in (0.99, 0.9, 0.8)]
    + [SqKellyMixture()]
)


def _comparison_grid(masses: tuple[float, ...], reps_for) -> list[ExperimentSpec]:
    grid = []
    for m in masses:
        pop = PopulationSpec(ComparisonMix(m), 10_000)
        for method in COMPARISON_METHODS:
            grid.append(
                ExperimentSpec(
                    method=method,
                    population=pop,
                    without_replacement=True,
                    reps=reps_for(m),
                )
            )
    return grid


def t5_grid() -> list[ExperimentSpec]:
    return _comparison_grid((0.99, 0.9, 0.75), lambda m: 10_000)


def t6_grid() -> list[ExperimentSpec]:
    return _comparison_grid(
        (0.5, 0.25, 0.1, 0.01), lambda m: 500 if m <= 0.1 else 1000
    )


def t7_grid() -> list[ExperimentSpec]:
    """Conditions feeding the comparison-suite summary score."""
    return _comparison_grid(
        (0.99, 0.9, 0.75, 0.5, 0.25, 0.1, 0.01),
        lambda m: 4000 if m >= 0.75 else (1000 if m >= 0.25 else 500),
    )


def summarize(rows: list[dict], exclude: tuple[str, ...] = ("sqkelly",)) -> dict[str, float]:
    """Geometric-mean-ratio score per method over a finished grid's rows.

    The mixture comparator is excluded by default: its weights are an
    approximation here, so it neither competes for "best in condition" nor
    receives a score.
    """
    means: dict[str, dict[str, float]] = {}
    for row in rows:
        if any(row["method"].startswith(prefix) for prefix in exclude):
            continue
        means.setdefault(row["method"], {})[row["population"]] = row["mean_n"]
    return geo_mean_ratio_summary(means)


def rows_to_csv(table: str, rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(
            [
                table,
                r["method"],
                r["population"],
                r["mode"],
                f"{r['alpha']:g}",
                "" if r["cap"] is None else r["cap"],
                r["reps"],
                "" if r["mean_n"] is None else f"{r['mean_n']:.4f}",
                "" if r["reject_rate"] is None else f"{r['reject_rate']:.6f}",
                "true" if r["overflow"] else "false",
            ]
        )
    return buf.getvalue()


def scores_to_csv(table: str, scores: dict[str, float], conditions: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for method, score in sorted(scores.items(), key=lambda kv: kv[1]):
        w.writerow([table, method, f"{score:.6f}", conditions])
    return buf.getvalue()


def run_table(name: str, seed: int, jobs: int = 1) -> str:
    """Compute one named table and return its CSV text."""
    if name == "t1":
        return rows_to_csv("t1", run_experiment(t1_grid(), seed, jobs))
    if name == "t2":
        return rows_to_csv("t2", run_experiment(t2_grid(), seed, jobs))
    if name == "t3":
        return rows_to_csv("t3", run_experiment(t3_grid(), seed, jobs))
    if name == "t4":
        rows = run_experiment(t3_grid(), seed, jobs)
        scores = summarize(rows)
        return scores_to_csv("t4", scores, conditions=9)
    if name == "t5":
        return rows_to_csv("t5", run_experiment(t5_grid(), seed, jobs))
    if name == "t6":
        return rows_to_csv("t6", run_experiment(t6_grid(), seed, jobs))
    if name == "t7":
        rows = run_experiment(t7_grid(), seed, jobs)
        scores = summarize(rows)
        return scores_to_csv("t7", scores, conditions=7)
    raise ValueError(f"unknown table {name!r}; choose from t1..t7")


TABLE_NAMES = ("t1", "t2", "t3", "t4", "t5", "t6", "t7")
