"""Lockstep synchronous executor.

All round-``r`` messages are exchanged before any time-``r`` computation.
A process that fails in round ``r`` sends its round-``r`` messages to
everybody outside its blocked set, then does nothing more: it computes no
state, horizon or output at time ``r`` or later.

At time 0 no step runs and nobody fires. Each process's ``req[0]`` is
overwritten by its time-0 input, exactly as every later step does, and the
resulting state is broadcast in round 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Mapping

from .core import (
    Config,
    FailurePattern,
    InputPattern,
    ProcessState,
    Snapshot,
    Trace,
    ValidationError,
    canonical_state,
    sanitize,
)
from .protocol import StepFn, StepOutcome, make_initial_message, step


@dataclass(frozen=True)
class Scenario:
    config: Config
    failures: FailurePattern = field(default_factory=FailurePattern)
    inputs: InputPattern = field(default_factory=InputPattern)
    initial_states: Mapping | None = None
    length: int | None = None
    label: str = ""

    def __post_init__(self):
        self.failures.validate(self.config)
        self.inputs.validate(self.config)
        states = self.initial_states
        if states is None:
            s0 = canonical_state(self.config)
            states = {p: s0 for p in self.config.processes}
        missing = set(self.config.processes) - set(states)
        if missing:
            raise ValidationError(f"initial states missing for processes {sorted(missing)}")
        object.__setattr__(
            self, "initial_states",
            {p: sanitize(states[p], self.config) for p in self.config.processes},
        )
        if self.length is not None and self.length < 0:
            raise ValidationError(f"run length must be non-negative, got {self.length}")

    def resolved_length(self) -> int:
        return self.length if self.length is not None else default_length(self)


def default_length(scenario: Scenario) -> int:
    """Publication time of time 0, plus two worst-case horizons, plus the last GO."""
    from .oracle import publication_time

    t = scenario.config.t
    return publication_time(scenario.config, scenario.failures, 0) + 2 * (t + 1) + scenario.inputs.max_time


@lru_cache(maxsize=1 << 18)
def _memo_step(step_fn, config, pid, prev, received_items, bit) -> StepOutcome:
    return step_fn(pid, prev, dict(received_items), bit, config)


@lru_cache(maxsize=1 << 14)
def _hearing(failures: FailurePattern, config: Config, r: int) -> tuple:
    """``(p, senders)`` for every process up at time ``r``; senders are up at ``r - 1``."""
    procs = config.processes
    out = []
    for p in procs:
        if failures.alive(p, r):
            out.append((p, tuple(q for q in procs if failures.alive(q, r - 1) and failures.delivers(q, p, r))))
    return tuple(out)


def clear_step_cache() -> None:
    _memo_step.cache_clear()
    _hearing.cache_clear()


class Simulation:
    """Incremental run: call :meth:`tick` once per time step, starting at 0.

    Inputs are supplied per tick so a driver can decide them online.
    """

    def __init__(self, config: Config, failures: FailurePattern, initial_states: Mapping,
                 step_fn: StepFn = step, memoize: bool = True):
        self.config = config
        self.failures = failures
        self.initial_states = initial_states
        self.step_fn = step_fn
        self.memoize = memoize
        self.snapshots: list[Snapshot] = []
        self.go: set = set()

    @property
    def time(self) -> int:
        """Time of the most recent snapshot (-1 before the first tick)."""
        return len(self.snapshots) - 1

    def tick(self, go: Iterable[int] = ()) -> Snapshot:
        k = len(self.snapshots)
        go = frozenset(go)
        self.go.update((k, p) for p in go)
        if k == 0:
            snap = self._start(go)
        else:
            snap = self._round(k, go)
        self.snapshots.append(snap)
        return snap

    def _start(self, go) -> Snapshot:
        states = {}
        for p in self.config.processes:
            if self.failures.alive(p, 0):
                s = self.initial_states[p]
                bit = 1 if p in go else 0
                if s.req[0] != bit:
                    s = replace(s, req=(bit,) + s.req[1:])
                states[p] = make_initial_message(s)
        return Snapshot(k=0, states=states)

    def _round(self, r, go) -> Snapshot:
        prev = self.snapshots[-1].states
        states, horz, failp, delivered, raised = {}, {}, {}, {}, {}
        fires = []
        for p, senders in _hearing(self.failures, self.config, r):
            items = tuple((q, prev[q]) for q in senders)
            bit = 1 if p in go else 0
            if self.memoize:
                out = _memo_step(self.step_fn, self.config, p, prev[p], items, bit)
            else:
                out = self.step_fn(p, prev[p], dict(items), bit, self.config)
            states[p] = out.state
            horz[p] = out.horz
            failp[p] = out.failp
            delivered[p] = frozenset(senders)
            if out.raised:
                raised[p] = out.raised
            if out.fired:
                fires.append(p)
        return Snapshot(r, states, horz, failp, frozenset(fires), delivered, raised)

    def trace(self, label: str = "") -> Trace:
        return Trace(self.config, self.failures, InputPattern(frozenset(self.go)),
                     tuple(self.snapshots), label)


def run(scenario: Scenario, step_fn: StepFn = step, memoize: bool = True) -> Trace:
    sim = Simulation(scenario.config, scenario.failures, scenario.initial_states, step_fn, memoize)
    for k in range(scenario.resolved_length() + 1):
        sim.tick(scenario.inputs.at(k))
    trace = sim.trace(scenario.label)
    # inputs addressed to processes that are already down are kept verbatim
    return replace(trace, inputs=scenario.inputs)


def replay_suffix(trace: Trace, k: int) -> Scenario:
    """Scenario that restarts ``trace`` from its time-``k`` states.

    Processes that are down by time ``k`` get the canonical placeholder
    state; they never send anything in the shifted pattern.
    """
    if not 0 <= k <= trace.length:
        raise ValidationError(f"shift {k} outside 0..{trace.length}")
    config = trace.config
    placeholder = canonical_state(config)
    states = {p: trace[k].states.get(p, placeholder) for p in config.processes}
    return Scenario(
        config=config,
        failures=trace.failures.shifted(k),
        inputs=trace.inputs.shifted(k),
        initial_states=states,
        length=trace.length - k,
        label=f"{trace.label}+{k}" if trace.label else f"suffix@{k}",
    )
