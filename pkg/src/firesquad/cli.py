"""Command-line front end: ``firesquad run|oracle|check|sweep``.

Exit status: 0 when nothing is violated in the checked window, 1 on a
property violation, 2 on usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .checker import FsVerdict, check_fs, verdict
from .core import Config, Trace, ValidationError
from .engine import run
from .explorer import BudgetError, SweepReport, SweepSpec, sweep
from .fileformat import (
    FormatError,
    ScenarioFile,
    config_from_json,
    failures_from_json,
    failures_to_json,
    load_json,
    read_scenario,
    read_trace,
    write_trace,
)
from .oracle import oracle_table
from .protocol import VARIANTS

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("firesquad")


class UsageError(Exception):
    pass


def _emit(data, fmt: str, text: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(data, sort_keys=True) + "\n")
    else:
        out.write(text + "\n")


def _window_check(trace: Trace, start: int | None):
    k = trace.config.t + 1 if start is None else start
    return k, check_fs(trace, k)


def _verdict_text(v: FsVerdict, fires: list) -> str:
    stab = "undecided" if v.stab is None else str(v.stab)
    lines = [
        f"fire times: {fires}",
        f"stab: {stab} (decidable up to {v.window})",
        f"earliest hold: simultaneity={v.simultaneity_from} liveness={v.liveness_from} safety={v.safety_from}",
    ]
    for viol in v.violations:
        note = " (before stabilization)" if v.stab is not None and viol.time < v.stab else ""
        lines.append(f"  {viol.prop} at {viol.time}: {viol.detail}{note}")
    if v.pending:
        lines.append(f"pending GOs past the window: {list(v.pending)}")
    return "\n".join(lines)


def _check_text(k: int, result) -> str:
    if result.ok is None:
        return f"check from {k}: undecided (trace too short)"
    if result.ok:
        return f"check from {k}: ok"
    lines = [f"check from {k}: {len(result.violations)} violation(s)"]
    lines += [f"  {v.prop} at {v.time}: {v.detail}" for v in result.violations]
    return "\n".join(lines)


def _status(result) -> int:
    return EXIT_VIOLATION if result.ok is False else EXIT_OK


def cmd_run(args, out) -> int:
    sf = read_scenario(args.scenario)
    trace = run(sf.scenario, VARIANTS[args.variant])
    if args.trace:
        with open(args.trace, "w") as fh:
            write_trace(trace, fh)
    k, result = _window_check(trace, args.start)
    fires = trace.fire_times()
    data = {"fire_times": fires, "length": trace.length, "check": {
        "from": k, "ok": result.ok, "violations": [v.to_dict() for v in result.violations]}}
    text = [f"ran {trace.length} steps, n={trace.config.n} t={trace.config.t}"]
    if args.verdict:
        v = verdict(trace)
        data["verdict"] = v.to_dict()
        text.append(_verdict_text(v, fires))
    else:
        text.append(f"fire times: {fires}")
    text.append(_check_text(k, result))
    _emit(data, args.format, "\n".join(text), out)
    return _status(result)


def _load_failures(args):
    data = load_json(args.failures)
    config = None
    if isinstance(data, dict):
        if "config" in data:
            config = config_from_json(data["config"])
        failures = failures_from_json(data.get("failures", []))
    else:
        failures = failures_from_json(data)
    if args.n is not None or args.t is not None:
        if args.n is None or args.t is None:
            raise UsageError("--n and --t must be given together")
        config = Config(args.n, args.t)
    if config is None:
        raise UsageError("no config in the file; pass --n and --t")
    failures.validate(config)
    return config, failures


def cmd_oracle(args, out) -> int:
    config, failures = _load_failures(args)
    horizon = args.horizon if args.horizon is not None else 2 * (config.t + 1)
    if horizon < config.t + 1:
        raise UsageError(f"--horizon must be at least t+1={config.t + 1}")
    table = oracle_table(config, failures, horizon)
    records = list(table.records())
    lines = [f"{'k':>3} {'x':>3} {'rh':>3} {'ah':>3} {'bb':>3} clean"]
    for r in records:
        clean = "-" if r["clean"] is None else ("yes" if r["clean"] else "no")
        lines.append(f"{r['k']:>3} {r['x']:>3} {r['rh']:>3} {r['ah']:>3} {r['bb']:>3} {clean}")
    lines.append(f"first clean round: {table.first_clean}")
    lines.append(f"publication time of 0: {table.bb[0]}")
    data = {"config": {"n": config.n, "t": config.t}, "failures": failures_to_json(failures),
            "records": records, "first_clean": table.first_clean, "bb0": table.bb[0]}
    _emit(data, args.format, "\n".join(lines), out)
    return EXIT_OK


def cmd_check(args, out) -> int:
    with open(args.trace) as fh:
        trace = read_trace(fh)
    k, result = _window_check(trace, args.start)
    v = verdict(trace)
    data = {"check": {"from": k, "ok": result.ok, "violations": [x.to_dict() for x in result.violations]},
            "verdict": v.to_dict(), "fire_times": trace.fire_times()}
    text = _verdict_text(v, trace.fire_times()) + "\n" + _check_text(k, result)
    _emit(data, args.format, text, out)
    return _status(result)


def report_to_json(report: SweepReport) -> dict:
    return {
        "spec": report.spec.to_dict(),
        "patterns": report.patterns,
        "scenarios_run": report.scenarios_run,
        "max_stab": report.max_stab,
        "invariants": {name: vars(t) for name, t in sorted(report.tallies.items())},
        "counterexamples": [
            {"invariant": c.invariant, "time": c.time, "detail": c.detail, "variant": c.variant,
             "policy": c.policy, "scenario": ScenarioFile.from_scenario(c.scenario).to_json()}
            for name in sorted(report.counterexamples) for c in report.counterexamples[name]
        ],
        "witnesses": [
            {"failures": failures_to_json(w.failures), "bb0": w.bb0, "bb_delayed": w.bb_delayed,
             "stab": w.stab, "fires": list(w.fires)}
            for w in report.witnesses
        ],
    }


def cmd_sweep(args, out) -> int:
    data = load_json(args.spec)
    if not isinstance(data, dict):
        raise FormatError("sweep spec must be an object")
    data = dict(data)
    data.pop("format_version", None)
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        spec = SweepSpec.from_dict(data)
    except TypeError as exc:
        raise FormatError(f"bad sweep spec: {exc}") from None
    report = sweep(spec, jobs=args.jobs)
    doc = report_to_json(report)
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    _emit(doc, args.format, report.summary(), out)
    return EXIT_OK if report.clean else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="firesquad", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("run", help="execute one scenario")
    p.add_argument("scenario")
    p.add_argument("--trace", help="write the trace as JSON lines to this path")
    p.add_argument("--verdict", action="store_true", help="report stabilization and per-property results")
    p.add_argument("--from", dest="start", type=int, help="check properties from this time (default t+1)")
    p.add_argument("--variant", choices=sorted(VARIANTS), default="fire_squad")
    fmt(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="print the discovery and publication-time table")
    p.add_argument("failures", help="scenario file or bare list of crashes")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--horizon", type=int)
    fmt(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="check a recorded trace")
    p.add_argument("trace")
    p.add_argument("--from", dest="start", type=int, help="check properties from this time (default t+1)")
    fmt(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="run an enumeration/fuzzing sweep")
    p.add_argument("spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", help="write the machine-readable report here")
    fmt(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except (FormatError, ValidationError, BudgetError, UsageError, ValueError, OSError) as exc:
        print(f"firesquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
