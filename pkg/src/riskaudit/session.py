"""Persisted live-audit sessions.

A session owns a seed, a population of ballot cards (or batches) to sample,
and one sequential test per assertion; all assertions share the same draws
and each is tested at the full risk limit (no multiplicity adjustment). The
session file is the only persistence: it stores the configuration and the
append-only draw log, and every load replays the log through the same test
code, so a crash between any two operations is invisible after restart.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
import uuid
from dataclasses import dataclass

from .assorters import CardInterpretation, Vote, plurality_assort
from .errors import (
    Exhausted,
    InvalidConfig,
    OutOfRange,
    SessionClosed,
    StaleSequence,
)
from .martingale import (
    AlphaTest,
    AprioriKelly,
    ComparatorSpec,
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
    TestConfig,
)
from .rng import rng_for

SCHEMA = "audit-session/1"

OPEN = "open"
ALL_CONFIRMED = "all_confirmed"
ESCALATED = "escalated"


# ---------------------------------------------------------------------------
# Wire format for test specs
# ---------------------------------------------------------------------------

def comparator_to_wire(c: ComparatorSpec) -> dict:
    if isinstance(c, AlphaTest):
        e = c.est
        if isinstance(e, FixedEta):
            return {"kind": "fixed", "eta0": e.eta0}
        if isinstance(e, ShrinkTrunc):
            out = {"kind": "shrink", "eta0": e.eta0, "d": e.d}
            if e.c is not None:
                out["c"] = e.c
            if e.eps_u is not None:
                out["eps_u"] = e.eps_u
            return out
        return {"kind": "bet", "lam": e.lam}
    if isinstance(c, AprioriKelly):
        return {"kind": "apkelly", "eta": c.eta}
    if isinstance(c, SqKellyMixture):
        return {"kind": "sqkelly", "k": c.k}
    if isinstance(c, SprtWoR):
        return {"kind": "sprt", "eta": c.eta}
    if isinstance(c, KaplanWald):
        return {"kind": "kw", "g": c.g}
    if isinstance(c, KaplanKolmogorov):
        return {"kind": "kk", "g": c.g}
    raise InvalidConfig(f"cannot serialize comparator {c!r}")


def comparator_from_wire(spec: dict) -> ComparatorSpec:
    try:
        kind = spec["kind"]
        if kind == "fixed":
            return AlphaTest(FixedEta(float(spec["eta0"])))
        if kind == "shrink":
            return AlphaTest(
                ShrinkTrunc(
                    float(spec["eta0"]),
                    float(spec["d"]),
                    float(spec["c"]) if "c" in spec else None,
                    float(spec["eps_u"]) if "eps_u" in spec else None,
                )
            )
        if kind == "bet":
            return AlphaTest(FromLambda(float(spec["lam"])))
        if kind == "apkelly":
            return AprioriKelly(float(spec["eta"]))
        if kind == "sqkelly":
            return SqKellyMixture(int(spec.get("k", 10)))
        if kind == "sprt":
            return SprtWoR(float(spec["eta"]))
        if kind == "kw":
            return KaplanWald(float(spec["g"]))
        if kind == "kk":
            return KaplanKolmogorov(float(spec["g"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad test spec {spec!r}: {exc}") from exc
    raise InvalidConfig(f"unknown test kind {spec.get('kind')!r}")


@dataclass(frozen=True)
class AssertionConfig:
    """One assertion: an assorter plus the sequential test that audits it."""

    assertion_id: str
    assorter_kind: str  # "plurality_pair" | "generic_bounded"
    winner: str | None
    loser: str | None
    upper_bound: float
    test: ComparatorSpec

    @classmethod
    def from_wire(cls, spec: dict) -> "AssertionConfig":
        assorter = spec.get("assorter", {})
        kind = assorter.get("kind")
        if kind == "plurality_pair":
            winner, loser = assorter.get("winner"), assorter.get("loser")
            if not winner or not loser or winner == loser:
                raise InvalidConfig("plurality_pair needs distinct winner and loser")
            u = 1.0
        elif kind == "generic_bounded":
            winner = loser = None
            u = float(assorter.get("upper_bound", 0))
            if not u > 0:
                raise InvalidConfig("generic_bounded needs upper_bound > 0")
        else:
            raise InvalidConfig(f"unknown assorter kind {kind!r}")
        if "id" not in spec or not spec["id"]:
            raise InvalidConfig("assertion needs an id")
        return cls(
            assertion_id=str(spec["id"]),
            assorter_kind=kind,
            winner=winner,
            loser=loser,
            upper_bound=u,
            test=comparator_from_wire(spec.get("test", {})),
        )

    def to_wire(self) -> dict:
        out: dict = {"id": self.assertion_id, "test": comparator_to_wire(self.test)}
        if self.assorter_kind == "plurality_pair":
            out["assorter"] = {
                "kind": "plurality_pair", "winner": self.winner, "loser": self.loser
            }
        else:
            out["assorter"] = {
                "kind": "generic_bounded", "upper_bound": self.upper_bound
            }
        return out

    def interpret(self, value) -> float:
        """Map an operator-entered value to this assorter's [0, u] scale."""
        if self.assorter_kind == "plurality_pair":
            if isinstance(value, str):
                try:
                    vote = Vote(value)
                except ValueError as exc:
                    raise OutOfRange(f"unknown vote {value!r}") from exc
                return plurality_assort(CardInterpretation(True, vote))
            raise OutOfRange("plurality assertions take winner/loser/other/invalid")
        x = float(value)
        if not (0.0 <= x <= self.upper_bound):
            raise OutOfRange(f"value {x} outside [0, {self.upper_bound}]")
        return x


@dataclass(frozen=True)
class SessionConfig:
    seed: int
    population_size: int
    sampling: Sampling
    risk_limit: float
    assertions: tuple[AssertionConfig, ...]
    compliance_attested: bool = False

    @classmethod
    def from_wire(cls, spec: dict) -> "SessionConfig":
        try:
            seed = int(spec["seed"])
            n = int(spec["population_size"])
            alpha = float(spec["risk_limit"])
            sampling = Sampling(spec.get("sampling", "without_replacement"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad session config: {exc}") from exc
        raw = spec.get("assertions", [])
        if not raw:
            raise InvalidConfig("a session needs at least one assertion")
        assertions = tuple(AssertionConfig.from_wire(a) for a in raw)
        ids = [a.assertion_id for a in assertions]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("assertion ids must be unique")
        if n < 1:
            raise InvalidConfig("population_size must be >= 1")
        return cls(
            seed=seed,
            population_size=n,
            sampling=sampling,
            risk_limit=alpha,
            assertions=assertions,
            compliance_attested=bool(spec.get("compliance_attested", False)),
        )

    def to_wire(self) -> dict:
        return {
            "seed": self.seed,
            "population_size": self.population_size,
            "sampling": self.sampling.value,
            "risk_limit": self.risk_limit,
            "assertions": [a.to_wire() for a in self.assertions],
            "compliance_attested": self.compliance_attested,
        }


class AuditSession:
    """Single-owner live audit; callers serialize operations per session."""

    def __init__(self, config: SessionConfig, session_id: str | None = None):
        self.config = config
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.status = OPEN
        self.draw_log: list[dict] = []
        self.tests: dict[str, SequentialTest] = {}
        for a in config.assertions:
            tc = TestConfig(
                alpha=config.risk_limit,
                u=a.upper_bound,
                mu0=a.upper_bound / 2.0,
                N=(
                    config.population_size
                    if config.sampling is Sampling.WITHOUT_REPLACEMENT
                    else math.inf
                ),
                sampling=config.sampling,
            )
            self.tests[a.assertion_id] = SequentialTest(tc, a.test)
        self._order = None
        if config.sampling is Sampling.WITHOUT_REPLACEMENT:
            self._order = rng_for(config.seed, "order").permutation(
                config.population_size
            )

    # -- selection ---------------------------------------------------------
    def _index_for(self, sequence: int) -> int:
        """Card selected for 1-based draw `sequence`; pure in (seed, N, mode)."""
        if self._order is not None:
            return int(self._order[sequence - 1])
        return int(
            rng_for(self.config.seed, "draw", sequence).integers(
                0, self.config.population_size
            )
        )

    def next_draw(self) -> dict:
        """The pending selection; idempotent until its interpretation lands."""
        if self.status != OPEN:
            raise SessionClosed(f"session is {self.status}")
        sequence = len(self.draw_log) + 1
        if (
            self.config.sampling is Sampling.WITHOUT_REPLACEMENT
            and sequence > self.config.population_size
        ):
            raise Exhausted("every card has been audited")
        return {"sequence": sequence, "index": self._index_for(sequence)}

    # -- recording ---------------------------------------------------------
    def record_interpretation(self, sequence: int, values: dict) -> dict:
        """Step every running assertion with the entered values.

        values maps assertion id to a vote string (plurality) or a number in
        [0, u] (generic). Raises StaleSequence on duplicates or gaps so a
        retried submission cannot double-count.
        """
        if self.status != OPEN:
            raise SessionClosed(f"session is {self.status}")
        pending = len(self.draw_log) + 1
        if sequence != pending:
            raise StaleSequence(f"sequence {sequence} is not pending ({pending})")
        running = [
            a for a in self.config.assertions
            if self.tests[a.assertion_id].status is Status.RUNNING
        ]
        interpreted: dict[str, float] = {}
        for a in running:
            if a.assertion_id not in values:
                raise OutOfRange(f"missing value for assertion {a.assertion_id}")
            interpreted[a.assertion_id] = a.interpret(values[a.assertion_id])
        for a in running:
            self.tests[a.assertion_id].step(interpreted[a.assertion_id])
        self.draw_log.append(
            {
                "sequence": sequence,
                "index": self._index_for(sequence),
                "values": {k: values[k] for k in interpreted},
                "recorded_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            }
        )
        self._refresh_status()
        return self.status_report()

    def _refresh_status(self) -> None:
        states = [t.status for t in self.tests.values()]
        if all(s is Status.REJECTED for s in states):
            self.status = ALL_CONFIRMED
        elif any(s is Status.EXHAUSTED for s in states):
            # sampling ran out before confirming: a full count is the recourse
            self.status = ESCALATED

    def escalate(self) -> dict:
        if self.status != OPEN:
            raise SessionClosed(f"session is {self.status}")
        self.status = ESCALATED
        return self.status_report()

    # -- reporting ----------------------------------------------------------
    def status_report(self) -> dict:
        pending = None
        if self.status == OPEN:
            sequence = len(self.draw_log) + 1
            if (
                self.config.sampling is not Sampling.WITHOUT_REPLACEMENT
                or sequence <= self.config.population_size
            ):
                pending = {"sequence": sequence, "index": self._index_for(sequence)}
        assertions = []
        for a in self.config.assertions:
            t = self.tests[a.assertion_id]
            p = t.p_value()
            assertions.append(
                {
                    "id": a.assertion_id,
                    "assorter_kind": a.assorter_kind,
                    "upper_bound": a.upper_bound,
                    "draws": t.draws,
                    "p_value": p,
                    "measured_risk": p,
                    "state": t.status.value,
                }
            )
        return {
            "schema": "audit-session-report/1",
            "session_id": self.session_id,
            "status": self.status,
            "risk_limit": self.config.risk_limit,
            "population_size": self.config.population_size,
            "sampling": self.config.sampling.value,
            "draws_taken": len(self.draw_log),
            "pending": pending,
            "assertions": assertions,
            "history": [
                {
                    "sequence": e["sequence"],
                    "index": e["index"],
                    "values": e["values"],
                }
                for e in self.draw_log
            ],
        }

    # -- persistence ---------------------------------------------------------
    def to_wire(self) -> dict:
        return {
            "schema": SCHEMA,
            "session_id": self.session_id,
            "status": self.status,
            "config": self.config.to_wire(),
            "draw_log": self.draw_log,
        }

    def save(self, path: str) -> None:
        """Atomic write: the file is either the old or the new session."""
        payload = json.dumps(self.to_wire(), indent=1)
        d = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".session-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as f:
                f.write(payload)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    @classmethod
    def load(cls, path: str) -> "AuditSession":
        """Rebuild from disk by replaying the draw log through the tests."""
        with open(path) as f:
            wire = json.load(f)
        if wire.get("schema") != SCHEMA:
            raise InvalidConfig(f"unsupported session schema {wire.get('schema')!r}")
        config = SessionConfig.from_wire(wire["config"])
        session = cls(config, session_id=wire["session_id"])
        for entry in wire.get("draw_log", []):
            session.record_interpretation(entry["sequence"], entry["values"])
        # recorded timestamps and terminal status come from the file, not replay
        session.draw_log = wire.get("draw_log", [])
        if wire["status"] == ESCALATED:
            session.status = ESCALATED
        return session
