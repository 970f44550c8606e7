"""Versioned JSON encodings for scenarios, traces and sweep specs.

Scenario document::

    {"format_version": 1,
     "config": {"n": 3, "t": 1},
     "failures": [{"process": 3, "crash_round": 1, "blocked": [1, 2]}],
     "inputs": [{"time": 3, "process": 1}],
     "initial_states": "canonical" | "seed:<u64>" | {"1": {"req": [...], "fail": [...], "view": [...]}, ...},
     "length": 10,
     "label": ""}

``length`` and ``label`` are optional. Traces are JSON lines: one header
record followed by one record per time step.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import IO, Any

from .core import (
    Config,
    Crash,
    FailurePattern,
    InputPattern,
    ProcessState,
    Snapshot,
    Trace,
    ValidationError,
)
from .engine import Scenario

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed or unsupported document."""


def _reject_unknown(data: dict, allowed: set, where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise FormatError(f"unknown fields in {where}: {sorted(unknown)}")


def _need(data: dict, key: str, where: str):
    try:
        return data[key]
    except KeyError:
        raise FormatError(f"{where} is missing field {key!r}") from None


def _check_version(data: dict, where: str) -> None:
    v = _need(data, "format_version", where)
    if v != FORMAT_VERSION:
        raise FormatError(f"{where}: unsupported format_version {v!r} (expected {FORMAT_VERSION})")


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{what} must be an integer, got {value!r}")
    return value


# -- pieces ----------------------------------------------------------------


def config_to_json(config: Config) -> dict:
    return {"n": config.n, "t": config.t}


def config_from_json(data: Any) -> Config:
    if not isinstance(data, dict):
        raise FormatError("config must be an object")
    _reject_unknown(data, {"n", "t"}, "config")
    return Config(_int(_need(data, "n", "config"), "n"), _int(_need(data, "t", "config"), "t"))


def failures_to_json(failures: FailurePattern) -> list:
    return [{"process": c.process, "crash_round": c.round, "blocked": sorted(c.blocked)} for c in failures.crashes]


def failures_from_json(data: Any) -> FailurePattern:
    if not isinstance(data, list):
        raise FormatError("failures must be a list")
    crashes = []
    for item in data:
        if not isinstance(item, dict):
            raise FormatError("each crash must be an object")
        _reject_unknown(item, {"process", "crash_round", "blocked"}, "crash")
        blocked = item.get("blocked", [])
        if not isinstance(blocked, list):
            raise FormatError("blocked must be a list")
        crashes.append(Crash(_int(_need(item, "process", "crash"), "process"),
                             _int(_need(item, "crash_round", "crash"), "crash_round"),
                             frozenset(_int(b, "blocked entry") for b in blocked)))
    return FailurePattern(tuple(crashes))


def inputs_to_json(inputs: InputPattern) -> list:
    return [{"time": k, "process": p} for k, p in inputs.sorted_pairs()]


def inputs_from_json(data: Any) -> InputPattern:
    if not isinstance(data, list):
        raise FormatError("inputs must be a list")
    pairs = []
    for item in data:
        if not isinstance(item, dict):
            raise FormatError("each input must be an object")
        _reject_unknown(item, {"time", "process"}, "input")
        pairs.append((_int(_need(item, "time", "input"), "time"), _int(_need(item, "process", "input"), "process")))
    return InputPattern.of(pairs)


def state_to_json(state: ProcessState) -> dict:
    return state.to_dict()


def state_from_json(data: Any) -> ProcessState:
    if not isinstance(data, dict):
        raise FormatError("a process state must be an object")
    try:
        return ProcessState.from_dict(data)
    except (TypeError, ValidationError) as exc:
        raise FormatError(str(exc)) from None


def states_to_json(states: dict) -> dict:
    return {str(p): state_to_json(s) for p, s in sorted(states.items())}


def states_from_json(data: Any) -> dict:
    if not isinstance(data, dict):
        raise FormatError("states must be an object keyed by process id")
    out = {}
    for key, value in data.items():
        try:
            pid = int(key)
        except ValueError:
            raise FormatError(f"bad process id {key!r}") from None
        out[pid] = state_from_json(value)
    return out


def seeded_states(config: Config, seed: int) -> dict:
    """Joint state drawn from ``random.Random(seed)``, process by process."""
    from .explorer import random_joint_state

    return random_joint_state(config, random.Random(seed))


# -- scenarios -------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioFile:
    """A scenario together with how its initial states were written down."""

    scenario: Scenario
    initial: Any = "canonical"

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "ScenarioFile":
        return cls(scenario, states_to_json(scenario.initial_states))

    def to_json(self) -> dict:
        s = self.scenario
        doc = {
            "format_version": FORMAT_VERSION,
            "config": config_to_json(s.config),
            "failures": failures_to_json(s.failures),
            "inputs": inputs_to_json(s.inputs),
            "initial_states": self.initial,
        }
        if s.length is not None:
            doc["length"] = s.length
        if s.label:
            doc["label"] = s.label
        return doc


_SCENARIO_FIELDS = {"format_version", "config", "failures", "inputs", "initial_states", "length", "label"}


def _resolve_initial(config: Config, spec: Any):
    if spec == "canonical":
        return None
    if isinstance(spec, str) and spec.startswith("seed:"):
        try:
            seed = int(spec[5:])
        except ValueError:
            raise FormatError(f"bad seed in {spec!r}") from None
        if not 0 <= seed < 2 ** 64:
            raise FormatError(f"seed must be an unsigned 64-bit integer, got {seed}")
        return seeded_states(config, seed)
    if isinstance(spec, dict):
        return states_from_json(spec)
    raise FormatError(f"initial_states must be 'canonical', 'seed:<u64>' or an object, got {spec!r}")


def scenario_from_json(data: Any) -> ScenarioFile:
    if not isinstance(data, dict):
        raise FormatError("scenario document must be an object")
    _reject_unknown(data, _SCENARIO_FIELDS, "scenario")
    _check_version(data, "scenario")
    config = config_from_json(_need(data, "config", "scenario"))
    initial = data.get("initial_states", "canonical")
    length = data.get("length")
    if length is not None:
        length = _int(length, "length")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise FormatError("label must be a string")
    scenario = Scenario(
        config=config,
        failures=failures_from_json(data.get("failures", [])),
        inputs=inputs_from_json(data.get("inputs", [])),
        initial_states=_resolve_initial(config, initial),
        length=length,
        label=label,
    )
    return ScenarioFile(scenario, initial)


def load_json(path: str) -> Any:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from None


def read_scenario(path: str) -> ScenarioFile:
    return scenario_from_json(load_json(path))


def write_scenario(sf: ScenarioFile, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(sf.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- traces ----------------------------------------------------------------


def _pid_sets(d: dict) -> dict:
    return {str(p): sorted(v) for p, v in sorted(d.items())}


def snapshot_to_json(snap: Snapshot) -> dict:
    return {
        "k": snap.k,
        "states": states_to_json(snap.states),
        "horz": {str(p): h for p, h in sorted(snap.horz.items())},
        "failp": _pid_sets(snap.failp),
        "fires": sorted(snap.fires),
        "delivered": _pid_sets(snap.delivered),
        "raised": {str(p): list(v) for p, v in sorted(snap.raised.items())},
    }


def _pid_map(data: Any, what: str, conv) -> dict:
    if not isinstance(data, dict):
        raise FormatError(f"{what} must be an object keyed by process id")
    try:
        return {int(p): conv(v) for p, v in data.items()}
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad {what}: {exc}") from None


_SNAPSHOT_FIELDS = {"k", "states", "horz", "failp", "fires", "delivered", "raised"}


def snapshot_from_json(data: Any) -> Snapshot:
    if not isinstance(data, dict):
        raise FormatError("trace record must be an object")
    _reject_unknown(data, _SNAPSHOT_FIELDS, "trace record")
    fires = data.get("fires", [])
    if not isinstance(fires, list):
        raise FormatError("fires must be a list")
    return Snapshot(
        k=_int(_need(data, "k", "trace record"), "k"),
        states=states_from_json(_need(data, "states", "trace record")),
        horz=_pid_map(data.get("horz", {}), "horz", lambda v: _int(v, "horz")),
        failp=_pid_map(data.get("failp", {}), "failp", frozenset),
        fires=frozenset(_int(p, "fire") for p in fires),
        delivered=_pid_map(data.get("delivered", {}), "delivered", frozenset),
        raised=_pid_map(data.get("raised", {}), "raised", tuple),
    )


_HEADER_FIELDS = {"format_version", "kind", "config", "failures", "inputs", "label", "length"}


def trace_header(trace: Trace) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "trace",
        "config": config_to_json(trace.config),
        "failures": failures_to_json(trace.failures),
        "inputs": inputs_to_json(trace.inputs),
        "label": trace.label,
        "length": trace.length,
    }


def write_trace(trace: Trace, fh: IO[str]) -> None:
    fh.write(json.dumps(trace_header(trace), sort_keys=True) + "\n")
    for snap in trace.snapshots:
        fh.write(json.dumps(snapshot_to_json(snap), sort_keys=True) + "\n")


def read_trace(fh: IO[str]) -> Trace:
    lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty trace")
    try:
        records = [json.loads(ln) for ln in lines]
    except json.JSONDecodeError as exc:
        raise FormatError(f"trace line is not valid JSON ({exc})") from None
    head = records[0]
    if not isinstance(head, dict):
        raise FormatError("trace header must be an object")
    _reject_unknown(head, _HEADER_FIELDS, "trace header")
    _check_version(head, "trace header")
    if head.get("kind") != "trace":
        raise FormatError("first line is not a trace header")
    config = config_from_json(_need(head, "config", "trace header"))
    failures = failures_from_json(head.get("failures", []))
    inputs = inputs_from_json(head.get("inputs", []))
    failures.validate(config)
    inputs.validate(config)
    snaps = tuple(snapshot_from_json(r) for r in records[1:])
    for i, snap in enumerate(snaps):
        if snap.k != i:
            raise FormatError(f"trace record {i} has k={snap.k}")
    if "length" in head and head["length"] != len(snaps) - 1:
        raise FormatError(f"header says length {head['length']} but {len(snaps) - 1} steps follow")
    if not snaps:
        raise FormatError("trace has no time steps")
    return Trace(config, failures, inputs, snaps, head.get("label", ""))


def dumps_trace(trace: Trace) -> str:
    import io

    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def loads_trace(text: str) -> Trace:
    import io

    return read_trace(io.StringIO(text))
