"""Firing-squad properties on finite traces.

Every verdict is relative to what the trace can show. Liveness is checked
in bounded form (a GO to a never-failing process must be answered within
``bound`` rounds, ``t + 1`` by default), so a GO issued later than
``length - bound`` is reported as pending rather than judged. A
stabilization time that falls past that point is reported as undecided
(``None``), never guessed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import InputPattern, Trace, ValidationError, alive_forever
from .engine import Scenario, Simulation
from .protocol import StepFn, step


@dataclass(frozen=True)
class Violation:
    prop: str
    time: int
    detail: str

    def to_dict(self) -> dict:
        return {"property": self.prop, "time": self.time, "detail": self.detail}


@dataclass(frozen=True)
class FsVerdict:
    simultaneity_from: int
    liveness_from: int
    safety_from: int
    stab: int | None
    window: int
    violations: tuple = ()
    pending: tuple = ()

    def to_dict(self) -> dict:
        return {
            "stab": self.stab,
            "window": self.window,
            "simultaneity_from": self.simultaneity_from,
            "liveness_from": self.liveness_from,
            "safety_from": self.safety_from,
            "violations": [v.to_dict() for v in self.violations],
            "pending": [list(p) for p in self.pending],
        }


@dataclass(frozen=True)
class FsCheck:
    ok: bool | None
    violations: tuple = ()


def _bound(trace: Trace, bound: int | None) -> int:
    return trace.config.t + 1 if bound is None else bound


def _simultaneity(trace: Trace):
    correct = trace.correct
    out = []
    for snap in trace.snapshots:
        if snap.fires and not correct <= snap.fires:
            missing = sorted(correct - snap.fires)
            out.append(Violation("simultaneity", snap.k,
                                 f"fired {sorted(snap.fires)}, silent correct {missing}"))
    return out


def _liveness(trace: Trace, bound: int):
    correct = trace.correct
    L = trace.length
    violations, pending = [], []
    for k, p in trace.inputs.sorted_pairs():
        if p not in correct or k > L:
            continue
        fired_at = [j for j in range(k + 1, min(k + bound, L) + 1) if p in trace[j].fires]
        if fired_at:
            continue
        if k + bound <= L:
            violations.append(Violation("liveness", k, f"GO at process {p} unanswered within {bound} rounds"))
        else:
            pending.append((k, p))
    return violations, pending


def _go_prefix_counts(trace: Trace) -> list:
    """``counts[j]`` = number of GO times strictly before ``j``."""
    gos = set(trace.go_times())
    counts, acc = [], 0
    for j in range(trace.length + 1):
        counts.append(acc)
        if j in gos:
            acc += 1
    return counts


def _safety(trace: Trace, k: int, go_before: list):
    out, fired = [], 0
    for snap in trace.snapshots[k:]:
        if snap.fires:
            fired += 1
            if fired > go_before[snap.k]:
                out.append(Violation(
                    "safety", snap.k,
                    f"{fired} fire times in [{k},{snap.k}] but {go_before[snap.k]} GO times before {snap.k}"))
    return out


def check_fs(trace: Trace, k: int, liveness_bound: int | None = None) -> FsCheck:
    """Whether the firing-squad properties hold from time ``k`` on."""
    bound = _bound(trace, liveness_bound)
    if k > trace.length - bound:
        return FsCheck(None)
    found = [v for v in _simultaneity(trace) if v.time >= k]
    live, _ = _liveness(trace, bound)
    found += [v for v in live if v.time >= k]
    found += _safety(trace, k, _go_prefix_counts(trace))
    found.sort(key=lambda v: (v.time, v.prop))
    return FsCheck(not found, tuple(found))


def verdict(trace: Trace, liveness_bound: int | None = None) -> FsVerdict:
    bound = _bound(trace, liveness_bound)
    L = trace.length
    simul = _simultaneity(trace)
    live, pending = _liveness(trace, bound)
    go_before = _go_prefix_counts(trace)

    safety_from = 0
    safety_viol = _safety(trace, 0, go_before)
    while safety_viol:
        safety_from += 1
        safety_viol = _safety(trace, safety_from, go_before)
    safety_record = _safety(trace, 0, go_before)

    simul_from = max((v.time for v in simul), default=-1) + 1
    live_from = max((v.time for v in live), default=-1) + 1
    window = L - bound
    stab = max(simul_from, live_from, safety_from)
    if stab > window:
        stab = None
    violations = sorted(simul + live + safety_record, key=lambda v: (v.time, v.prop))
    return FsVerdict(simul_from, live_from, safety_from, stab, window,
                     tuple(violations), tuple(pending))


def stab_time(trace: Trace, liveness_bound: int | None = None) -> int | None:
    return verdict(trace, liveness_bound).stab


def fire_count(trace: Trace, k: int, stab: int | None = None) -> int | None:
    """Number of fire times in ``[stab, k]``; 0 before stabilization."""
    if stab is None:
        stab = stab_time(trace)
        if stab is None:
            return None
    return sum(1 for j in range(stab, min(k, trace.length) + 1) if trace[j].fires)


def is_sequential(trace: Trace, stab: int | None = None) -> bool | None:
    if stab is None:
        stab = stab_time(trace)
        if stab is None:
            return None
    correct = trace.correct
    gos = trace.inputs.sorted_pairs()
    if any(k < stab for k, _ in gos):
        return False
    if any(p not in correct for _, p in gos):
        return False
    times = sorted({k for k, _ in gos})
    fires = trace.fire_times()
    for a, b in zip(times, times[1:]):
        if not any(a < f <= b for f in fires):
            return False
    return True


DRIVER_POLICIES = ("none", "earliest", "repeat", "random")


def sequential_driver(scenario: Scenario, policy: str = "repeat", seed: int = 0, *,
                      stab_bound: int | None = None, step_fn: StepFn = step,
                      max_gos: int | None = None) -> tuple:
    """Run ``scenario`` while injecting GOs that keep the input sequential.

    A GO goes to a never-failing process chosen by a seeded
    ``random.Random`` (Mersenne Twister), and only once the time is at
    least ``stab_bound`` (default ``t + 1``) and every earlier GO has been
    followed by a fire at an earlier time.

    Returns ``(inputs, trace)``.
    """
    if policy not in DRIVER_POLICIES:
        raise ValueError(f"unknown driver policy {policy!r}; choose from {DRIVER_POLICIES}")
    if scenario.inputs:
        raise ValidationError("the driver supplies the inputs; scenario must have none")
    config = scenario.config
    rng = random.Random(seed)
    correct = sorted(alive_forever(config, scenario.failures))
    bound = config.t + 1 if stab_bound is None else stab_bound
    length = scenario.resolved_length()

    sim = Simulation(config, scenario.failures, scenario.initial_states, step_fn)
    issued = 0
    outstanding = False
    not_before = bound
    for k in range(length + 1):
        if k > 0 and sim.snapshots[-1].fires:
            outstanding = False
        go = ()
        limit_reached = max_gos is not None and issued >= max_gos
        if policy != "none" and not outstanding and not limit_reached and k >= not_before:
            if policy != "earliest" or issued == 0:
                go = (rng.choice(correct),)
                issued += 1
                outstanding = True
                if policy == "random":
                    not_before = k + 1 + rng.randint(0, config.t + 1)
        sim.tick(go)
    trace = sim.trace(scenario.label)
    return trace.inputs, trace


@dataclass(frozen=True)
class SwiftnessVerdict:
    ok: bool | None
    counts_a: tuple = ()
    counts_b: tuple = ()
    first_shortfall: int | None = None
    reason: str = ""


def swiftness_compare(trace_a: Trace, trace_b: Trace) -> SwiftnessVerdict:
    """Whether run A has fired at least as often as run B by every time."""
    if trace_a.failures != trace_b.failures or trace_a.inputs != trace_b.inputs:
        raise ValueError("swiftness is only defined for runs with the same failures and inputs")
    stab_a, stab_b = stab_time(trace_a), stab_time(trace_b)
    if stab_a is None or stab_b is None:
        return SwiftnessVerdict(None, reason="stabilization time undecided")
    if not (is_sequential(trace_a, stab_a) and is_sequential(trace_b, stab_b)):
        return SwiftnessVerdict(None, reason="input is not sequential for both runs")
    horizon = min(trace_a.length, trace_b.length)
    ca = tuple(fire_count(trace_a, k, stab_a) for k in range(horizon + 1))
    cb = tuple(fire_count(trace_b, k, stab_b) for k in range(horizon + 1))
    short = next((k for k in range(horizon + 1) if ca[k] < cb[k]), None)
    return SwiftnessVerdict(short is None, ca, cb, short)
