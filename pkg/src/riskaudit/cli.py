"""Command-line entry points.

`sim` runs one experiment cell to CSV, or regenerates the named tables:

    sim --method shrink --params eta0=0.7,d=100 --pop binary --theta 0.7 \
        --N 20000 --mode wor --cap 2000 --recount --reps 1000 --seed 7 --out run.csv
    sim tables t1 t5 --out-dir results --seed 7

`audit` drives live sessions against a session store, mirroring the HTTP API:

    audit new --store ./store --config session.json
    audit draw|record|status|escalate --store ./store --session <id> ...
    audit serve --store ./store --port 8765 [--ui frontend/dist]
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import AuditError
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
)
from .populations import Binary, Blanks, ComparisonMix, PopulationSpec
from .simulate import ExperimentSpec, run_experiment
from .tables import TABLE_NAMES, rows_to_csv, run_table

METHODS = ("fixed", "shrink", "bet", "apkelly", "sprt", "kw", "kk", "sqkelly")


def parse_params(text: str | None) -> dict[str, float]:
    out: dict[str, float] = {}
    if not text:
        return out
    for part in text.split(","):
        if not part:
            continue
        key, _, val = part.partition("=")
        out[key.strip()] = float(val)
    return out


def build_method(name: str, params: dict[str, float]) -> ComparatorSpec:
    if name == "fixed":
        return AlphaTest(FixedEta(params["eta0"]))
    if name == "shrink":
        return AlphaTest(
            ShrinkTrunc(
                params["eta0"], params["d"], params.get("c"), params.get("eps_u")
            )
        )
    if name == "bet":
        return AlphaTest(FromLambda(params["lam"]))
    if name == "apkelly":
        return AprioriKelly(params["eta"])
    if name == "sprt":
        return SprtWoR(params["eta"])
    if name == "kw":
        return KaplanWald(params["g"])
    if name == "kk":
        return KaplanKolmogorov(params["g"])
    if name == "sqkelly":
        return SqKellyMixture(int(params.get("k", 10)))
    raise SystemExit(f"unknown method {name!r}; choose from {METHODS}")


def _sim_tables(argv: list[str]) -> int:
    p = argparse.ArgumentParser(prog="sim tables")
    p.add_argument("names", nargs="+", help="t1..t7, or 'all'")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--seed", type=int, default=20240901)
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args(argv)
    names = TABLE_NAMES if "all" in args.names else tuple(args.names)
    os.makedirs(args.out_dir, exist_ok=True)
    for name in names:
        csv_text = run_table(name, args.seed, args.jobs)
        path = os.path.join(args.out_dir, f"{name}.csv")
        with open(path, "w", newline="") as f:
            f.write(csv_text)
        print(f"wrote {path}")
    return 0


def sim_main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] == "tables":
        return _sim_tables(argv[1:])
    p = argparse.ArgumentParser(
        prog="sim", description="Monte-Carlo audit sample-size experiments"
    )
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--params", default="", help="comma list, e.g. eta0=0.7,d=100")
    p.add_argument("--pop", required=True, choices=("binary", "blanks", "compmix"))
    p.add_argument("--theta", type=float, default=0.6)
    p.add_argument("--blanks", type=float, default=0.0)
    p.add_argument("--mass1", type=float, default=0.9)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--mode", choices=("wr", "wor"), default="wor")
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--recount", action="store_true",
                   help="charge a full count to replications not confirmed by the cap")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=20240901)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    args = p.parse_args(argv)

    if args.pop == "binary":
        kind = Binary(args.theta)
    elif args.pop == "blanks":
        kind = Blanks(args.theta, args.blanks)
    else:
        kind = ComparisonMix(args.mass1)
    spec = ExperimentSpec(
        method=build_method(args.method, parse_params(args.params)),
        population=PopulationSpec(kind, args.N),
        without_replacement=args.mode == "wor",
        alpha=args.alpha,
        reps=args.reps,
        cap=args.cap,
        recount_addin=args.recount,
    )
    rows = run_experiment([spec], args.seed, args.jobs)
    csv_text = rows_to_csv("run", rows)
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


# ---------------------------------------------------------------------------
# audit CLI
# ---------------------------------------------------------------------------


def _print(obj) -> None:
    print(json.dumps(obj, indent=1))


def audit_main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    p = argparse.ArgumentParser(prog="audit", description="live audit sessions")
    sub = p.add_subparsers(dest="command", required=True)

    new = sub.add_parser("new", help="create a session from a JSON config file")
    new.add_argument("--store", required=True)
    new.add_argument("--config", required=True)

    for name in ("draw", "status", "escalate"):
        sp = sub.add_parser(name)
        sp.add_argument("--store", required=True)
        sp.add_argument("--session", required=True)

    rec = sub.add_parser("record", help="record one draw's interpretations")
    rec.add_argument("--store", required=True)
    rec.add_argument("--session", required=True)
    rec.add_argument("--sequence", type=int, required=True)
    rec.add_argument("--values", required=True,
                     help='JSON object, e.g. \'{"a1": "winner"}\'')

    srv = sub.add_parser("serve", help="run the local HTTP API")
    srv.add_argument("--store", required=True)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--ui", default=None, help="directory of built console assets")

    args = p.parse_args(argv)
    from .service import SessionStore

    try:
        if args.command == "new":
            with open(args.config) as f:
                config = json.load(f)
            store = SessionStore(args.store)
            session = store.create(config)
            _print(session.status_report())
        elif args.command == "draw":
            store = SessionStore(args.store)
            _print(store.load(args.session).next_draw())
        elif args.command == "status":
            store = SessionStore(args.store)
            _print(store.load(args.session).status_report())
        elif args.command == "escalate":
            store = SessionStore(args.store)
            session = store.load(args.session)
            report = session.escalate()
            store.save(session)
            _print(report)
        elif args.command == "record":
            store = SessionStore(args.store)
            session = store.load(args.session)
            report = session.record_interpretation(
                args.sequence, json.loads(args.values)
            )
            store.save(session)
            _print(report)
        elif args.command == "serve":
            import uvicorn

            from .service import create_app

            app = create_app(args.store, ui_dir=args.ui)
            uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: no session {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    """Dispatch `python -m riskaudit.cli {sim,audit} ...`."""
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv[0] not in ("sim", "audit"):
        print("usage: riskaudit.cli {sim,audit} ...", file=sys.stderr)
        return 2
    return sim_main(argv[1:]) if argv[0] == "sim" else audit_main(argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
