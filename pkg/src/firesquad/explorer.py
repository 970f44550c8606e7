"""Systematic enumeration and seeded fuzzing of scenarios.

A sweep crosses failure patterns, joint initial states and input policies,
runs each scenario, and evaluates the invariant catalog on the trace.
Every counterexample is stored as a full scenario that replays to the same
verdict.

All randomness comes from ``random.Random`` (Mersenne Twister) seeded with
``seed * 1_000_003 + index``, where ``index`` is the position of the failure
pattern in the canonical enumeration. Results do not depend on worker
count or scheduling.
"""

from __future__ import annotations

import itertools
import logging
import random
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from .checker import FsVerdict, is_sequential, sequential_driver, verdict
from .core import (
    Config,
    Crash,
    FailurePattern,
    InputPattern,
    ProcessState,
    Trace,
    alive_forever,
    canonical_state,
    surviving,
)
from .engine import Scenario, Simulation, run
from .oracle import (
    HorizonSummary,
    OracleTable,
    best_horizons,
    delayed_publication_time,
    oracle_table,
    publication_time,
)
from .protocol import VARIANTS

log = logging.getLogger(__name__)


class BudgetError(ValueError):
    def __init__(self, what: str, size: int, budget: int):
        super().__init__(f"{what}: {size} items exceeds budget {budget}")
        self.size = size
        self.budget = budget


# ---------------------------------------------------------------------------
# failure patterns


def _pattern_shapes(n: int, t: int, max_crash_round: int):
    procs = range(1, n + 1)
    for m in range(t + 1):
        for who in itertools.combinations(procs, m):
            for rounds in itertools.product(range(1, max_crash_round + 1), repeat=m):
                peers = []
                for p, r in zip(who, rounds):
                    earlier = {q for q, rq in zip(who, rounds) if rq < r}
                    peers.append(tuple(q for q in procs if q != p and q not in earlier))
                yield who, rounds, peers


def count_failure_patterns(n: int, t: int, max_crash_round: int, enumerate_blocked: bool = True) -> int:
    total = 0
    for _, _, peers in _pattern_shapes(n, t, max_crash_round):
        size = 1
        for ps in peers:
            size *= 2 ** len(ps) if enumerate_blocked else (2 if ps else 1)
        total += size
    return total


def _subsets(items: tuple):
    for m in range(len(items) + 1):
        for combo in itertools.combinations(items, m):
            yield frozenset(combo)


def enumerate_failure_patterns(n: int, t: int, max_crash_round: int, enumerate_blocked: bool = True,
                               budget: int = 100_000) -> Iterator[FailurePattern]:
    """All patterns with at most ``t`` crashes in rounds ``1..max_crash_round``.

    A crashing process may block any subset of the peers that have not
    crashed in an earlier round. With ``enumerate_blocked`` off only the
    two extremes (nothing blocked, everything blocked) are produced.
    """
    size = count_failure_patterns(n, t, max_crash_round, enumerate_blocked)
    if size > budget:
        raise BudgetError("failure patterns", size, budget)
    for who, rounds, peers in _pattern_shapes(n, t, max_crash_round):
        options = []
        for ps in peers:
            if enumerate_blocked:
                options.append(list(_subsets(ps)))
            else:
                options.append([frozenset()] + ([frozenset(ps)] if ps else []))
        for blocked in itertools.product(*options):
            yield FailurePattern(tuple(Crash(p, r, b) for p, r, b in zip(who, rounds, blocked)))


# ---------------------------------------------------------------------------
# adversarial initial states


def per_process_states(config: Config) -> list:
    """Every legal (req, fail, view) value of one process."""
    t, n = config.t, config.n
    reqs = list(itertools.product((0, 1), repeat=t + 2))
    views = list(itertools.product(range(t + 2), repeat=t + 1))
    fails = list(_subsets(tuple(config.processes)))
    return [ProcessState(r, f, v) for r in reqs for f in fails for v in views]


def random_state(config: Config, rng: random.Random) -> ProcessState:
    """Draw order: req entries, then a membership bit per process id, then view entries."""
    t = config.t
    req = tuple(rng.randint(0, 1) for _ in range(t + 2))
    fail = frozenset(p for p in config.processes if rng.randint(0, 1))
    view = tuple(rng.randint(0, t + 1) for _ in range(t + 1))
    return ProcessState(req, fail, view)


def random_joint_state(config: Config, rng: random.Random) -> dict:
    return {p: random_state(config, rng) for p in config.processes}


def state_corpus(config: Config) -> list:
    """Fixed hand-picked joint states that stress phantom requests and bogus reports."""
    t, procs = config.t, tuple(config.processes)
    canon = canonical_state(config)
    top = t + 1
    phantom_all = ProcessState((1,) * (t + 2), frozenset(), (t + 1,) * (t + 1))
    fire_now = ProcessState((0,) * (t + 1) + (1,), frozenset(), (0,) * (t + 1))
    old_go = ProcessState((0, 1) + (0,) * t, frozenset(), (0,) * (t + 1))
    zero_view = ProcessState((0,) * (t + 2), frozenset(), (0,) * (t + 1))
    liar = ProcessState((0, 1) + (1,) * t, frozenset(procs[:max(1, t)]), (1,) * (t + 1))
    everybody_failed = ProcessState((0,) * (t + 2), frozenset(procs), (top,) * (t + 1))
    uniform = [canon, phantom_all, fire_now, old_go, zero_view, liar, everybody_failed]
    joint = [{p: s for p in procs} for s in uniform]
    # mixtures: one process disagrees with the rest
    for odd, rest in ((old_go, canon), (canon, old_go), (liar, canon), (zero_view, phantom_all)):
        for i, p in enumerate(procs):
            joint.append({q: (odd if q == p else rest) for q in procs})
            if i >= 1:
                break
    return joint


def adversarial_states(config: Config, mode: str = "corpus", *, count: int = 0, seed: int = 0,
                       budget: int = 1_000_000) -> Iterator[dict]:
    """Joint initial states.

    ``uniform`` applies every per-process state to all processes,
    ``exhaustive`` enumerates all joint combinations (subject to
    ``budget``), ``random`` draws ``count`` seeded joint states and
    ``corpus`` yields the fixed adversarial list.
    """
    if mode == "uniform":
        for s in per_process_states(config):
            yield {p: s for p in config.processes}
    elif mode == "exhaustive":
        states = per_process_states(config)
        size = len(states) ** config.n
        if size > budget:
            raise BudgetError("joint states", size, budget)
        for combo in itertools.product(states, repeat=config.n):
            yield dict(zip(config.processes, combo))
    elif mode == "random":
        rng = random.Random(seed)
        for _ in range(count):
            yield random_joint_state(config, rng)
    elif mode == "corpus":
        yield from state_corpus(config)
    else:
        raise ValueError(f"unknown state mode {mode!r}")


# ---------------------------------------------------------------------------
# per-pattern context and the invariant catalog


@dataclass
class PatternContext:
    config: Config
    failures: FailurePattern
    table: OracleTable
    correct: frozenset
    first_clean: int
    bb0: int
    bb_delayed: int

    @classmethod
    def build(cls, config: Config, failures: FailurePattern, length: int) -> "PatternContext":
        table = oracle_table(config, failures, max(length, config.t + 1))
        return cls(config, failures, table, alive_forever(config, failures),
                   table.first_clean, table.bb[0], delayed_publication_time(config, failures))


@dataclass
class RunContext:
    trace: Trace
    pattern: PatternContext
    verdict: FsVerdict
    horizons: HorizonSummary
    sequential: bool | None
    policy: str

    @property
    def early(self) -> int:
        return min(2, self.pattern.first_clean)


def _clean_round_agreement(ctx: RunContext, upto: int | None):
    tr, clean = ctx.trace, ctx.pattern.table.clean
    n, bad = 0, []
    for r in range(1, tr.length + 1):
        if not clean[r]:
            continue
        snap = tr[r]
        procs = list(snap.states)
        if len(procs) < 2:
            continue
        n += 1
        ref = procs[0]
        s0 = snap.states[ref]
        for p in procs[1:]:
            s = snap.states[p]
            if s.fail != s0.fail or s.view[:upto] != s0.view[:upto] or snap.failp[p] != snap.failp[ref]:
                bad.append((r, f"processes {ref} and {p} differ after clean round {r}: "
                               f"{(sorted(s0.fail), s0.view)} vs {(sorted(s.fail), s.view)}"))
                break
    return n, bad


def _inv_clean_round_agreement(ctx: RunContext):
    return _clean_round_agreement(ctx, None)


def _inv_clean_round_agreement_below_top(ctx: RunContext):
    # view[t] is never rebuilt from messages, so only the lower entries are compared
    return _clean_round_agreement(ctx, ctx.pattern.config.t)


def _inv_request_agreement(ctx: RunContext):
    tr, clean, t = ctx.trace, ctx.pattern.table.clean, ctx.pattern.config.t
    n, bad = 0, []
    for r in range(1, tr.length + 1):
        if not clean[r]:
            continue
        for d in range(0, t):
            k = r + d
            if k > tr.length:
                break
            states = tr[k].states
            if len(states) < 2:
                continue
            n += 1
            slices = {p: s.req[d + 1:t + 1] for p, s in states.items()}
            if len(set(slices.values())) > 1:
                bad.append((k, f"req[{d + 1}..{t}] differ {d} rounds after clean round {r}: {slices}"))
    return n, bad


def _inv_reported_failures_observed(ctx: RunContext):
    tr = ctx.trace
    n, bad = 0, []
    for snap in tr.snapshots[2:]:
        for p, s in snap.states.items():
            n += 1
            if not snap.failp[p] <= s.fail:
                bad.append((snap.k, f"process {p}: reported {sorted(snap.failp[p])} not within observed {sorted(s.fail)}"))
    return n, bad


def _inv_horizon_monotone(ctx: RunContext):
    tr = ctx.trace
    n, bad = 0, []
    early = ctx.early
    for k in range(1, tr.length):
        now, nxt = tr[k].horz, tr[k + 1].horz
        if not nxt:
            continue
        top_next = max(nxt.values())
        n += 1
        if top_next > min(now[p] for p in nxt):
            bad.append((k + 1, f"horizon rose among survivors: {now} -> {nxt}"))
        elif k >= early and top_next > min(now.values()):
            bad.append((k + 1, f"horizon rose above a time-{k} process: {now} -> {nxt}"))
    return n, bad


def _inv_monotone_repair_inert(ctx: RunContext):
    tr, t = ctx.trace, ctx.pattern.config.t
    n, bad = 0, []
    for snap in tr.snapshots[ctx.early + 1:]:
        for p in snap.states:
            n += 1
            lifted = [i for i in snap.raised.get(p, ()) if i < t]
            if lifted:
                bad.append((snap.k, f"process {p}: view entries {lifted} lifted"))
    return n, bad


def _inv_fail_set_sandwich(ctx: RunContext):
    tr, x = ctx.trace, ctx.pattern.table.x
    n, bad = 0, []
    for k in range(1, tr.length + 1):
        snap = tr[k]
        lo, hi = x[k - 1], x[k]
        for p, s in snap.states.items():
            n += 1
            if not lo <= len(s.fail) <= hi:
                bad.append((k, f"process {p}: |fail|={len(s.fail)} outside [{lo},{hi}]"))
        if k + 1 <= tr.length:
            for p, fp in tr[k + 1].failp.items():
                n += 1
                if not lo <= len(fp) <= hi:
                    bad.append((k + 1, f"process {p}: |reported|={len(fp)} outside [{lo},{hi}]"))
    return n, bad


def _inv_equal_view_same_output(ctx: RunContext):
    tr = ctx.trace
    n, bad = 0, []
    for snap in tr.snapshots[max(1, ctx.pattern.first_clean):]:
        groups = defaultdict(list)
        for p, s in snap.states.items():
            groups[s.view[0]].append(p)
        for v0, members in groups.items():
            if len(members) < 2:
                continue
            n += 1
            outs = {p in snap.fires for p in members}
            if len(outs) > 1:
                bad.append((snap.k, f"view[0]={v0} shared by {members} but outputs differ"))
    return n, bad


def _inv_unit_horizon_view(ctx: RunContext):
    tr, min_h = ctx.trace, ctx.horizons.min_h
    n, bad = 0, []
    for k in range(max(1, ctx.early), tr.length + 1):
        if min_h.get(k) != 1:
            continue
        n += 1
        off = [p for p, s in tr[k].states.items() if s.view[0] != 1]
        if off:
            bad.append((k, f"minimal horizon 1 but view[0] != 1 at {off}"))
    return n, bad


def _inv_view_prefix_agreement(ctx: RunContext):
    tr, min_h = ctx.trace, ctx.horizons.min_h
    n, bad = 0, []
    for r in range(max(1, ctx.pattern.first_clean), tr.length + 1):
        h = min_h.get(r)
        states = tr[r].states
        if h is None or h <= 1 or len(states) < 2:
            continue
        n += 1
        prefixes = {s.view[:h - 1] for s in states.values()}
        if len(prefixes) > 1:
            bad.append((r, f"view[0..{h - 2}] differ: {sorted(prefixes)}"))
    return n, bad


def _inv_simultaneity_after_clean(ctx: RunContext):
    tr = ctx.trace
    n, bad = 0, []
    for snap in tr.snapshots[ctx.pattern.first_clean:]:
        if not snap.fires:
            continue
        n += 1
        if snap.fires != frozenset(snap.states):
            bad.append((snap.k, f"fired {sorted(snap.fires)} of {sorted(snap.states)}"))
    return n, bad


def _inv_bounded_liveness(ctx: RunContext):
    tr = ctx.trace
    t, correct = ctx.pattern.config.t, ctx.pattern.correct
    n, bad = 0, []
    for k, p in tr.inputs.sorted_pairs():
        if p not in correct or k + t + 1 > tr.length:
            continue
        n += 1
        if not any(p in tr[j].fires for j in range(k + 1, k + t + 2)):
            bad.append((k, f"GO at {p} not answered by time {k + t + 1}"))
    return n, bad


def _safety_from(ctx: RunContext, start: int):
    tr = ctx.trace
    if start > tr.length or not any(s.fires for s in tr.snapshots[start:]):
        return 0, []
    gos = tr.go_times()
    bad, fired = [], 0
    for snap in tr.snapshots[start:]:
        if snap.fires:
            fired += 1
            before = sum(1 for h in gos if h < snap.k)
            if fired > before:
                bad.append((snap.k, f"{fired} fire times from {start} but {before} GO times before {snap.k}"))
                break
    return 1, bad


def _inv_safety_from_publication(ctx: RunContext):
    return _safety_from(ctx, ctx.pattern.bb0)


def _inv_view_within_horizon(ctx: RunContext):
    tr = ctx.trace
    n, bad = 0, []
    for snap in tr.snapshots[1:]:
        for p, h in snap.horz.items():
            k2 = snap.k + h - 1
            if k2 > tr.length:
                continue
            later = tr[k2].states.get(p)
            if later is None:
                continue
            n += 1
            if later.view[0] > h:
                bad.append((k2, f"process {p}: view[0]={later.view[0]} exceeds horizon {h} from time {snap.k}"))
    return n, bad


def _inv_horizon_range(ctx: RunContext):
    tr, t = ctx.trace, ctx.pattern.config.t
    n, bad = 0, []
    for snap in tr.snapshots[1:]:
        for p, h in snap.horz.items():
            n += 1
            if not 1 <= h <= t + 1:
                bad.append((snap.k, f"process {p}: horizon {h}"))
    return n, bad


def _inv_view_dominates_horizon(ctx: RunContext):
    tr = ctx.trace
    n, bad = 0, []
    for snap in tr.snapshots[1:]:
        for p, h in snap.horz.items():
            n += 1
            view = snap.states[p].view
            low = [i for i, v in enumerate(view) if v < h - i]
            if low:
                bad.append((snap.k, f"process {p}: view={view} below horizon {h} at {low}"))
    return n, bad


def _inv_post_fire_clear(ctx: RunContext):
    tr = ctx.trace
    n, bad = 0, []
    for snap in tr.snapshots[1:]:
        for p in snap.fires:
            n += 1
            s = snap.states[p]
            if any(s.req[s.view[0]:]):
                bad.append((snap.k, f"process {p} fired but req={s.req} with view[0]={s.view[0]}"))
    return n, bad


def _stab_at_most(ctx: RunContext, bound: int, what: str):
    v = ctx.verdict
    if v.window < bound:
        return 0, []
    if v.stab is None or v.stab > bound:
        shown = "undecided" if v.stab is None else v.stab
        return 1, [(bound, f"stab={shown} exceeds {what}={bound}")]
    return 1, []


def _inv_stab_within_t_plus_1(ctx: RunContext):
    return _stab_at_most(ctx, ctx.pattern.config.t + 1, "t+1")


def _inv_stab_within_publication(ctx: RunContext):
    return _stab_at_most(ctx, ctx.pattern.bb0, "publication time")


def _inv_stab_within_delayed_publication(ctx: RunContext):
    return _stab_at_most(ctx, ctx.pattern.bb_delayed, "delayed-pattern publication time")


def _inv_best_horizon_within_publication(ctx: RunContext):
    best, bb = ctx.horizons.best_h, ctx.pattern.table.bb
    n, bad = 0, []
    for k, b in best.items():
        if b is None:
            continue
        n += 1
        if b > bb[k]:
            bad.append((k, f"best horizon {b} > publication time {bb[k]}"))
    return n, bad


def _inv_fire_within_best_horizon(ctx: RunContext):
    if not ctx.sequential:
        return 0, []
    tr, best = ctx.trace, ctx.horizons.best_h
    n, bad = 0, []
    for k, p in tr.inputs.sorted_pairs():
        b = best.get(k)
        if b is None:
            continue
        n += 1
        if not any(p in tr[j].fires for j in range(k + 1, b + 1)):
            bad.append((k, f"GO at {p} not answered by best horizon {b}"))
    return n, bad


def _inv_no_fire_before_publication(ctx: RunContext):
    # the lower bound speaks about runs from a stabilized state: either the
    # canonical start, or a GO late enough that every phantom is gone
    if not ctx.sequential:
        return 0, []
    tr, bb = ctx.trace, ctx.pattern.table.bb
    t = ctx.pattern.config.t
    canon = canonical_state(ctx.pattern.config)
    from_canonical = all(replace(s, req=canon.req[:1] + s.req[1:]) == canon for s in tr[0].states.values())
    n, bad = 0, []
    for k in sorted({k for k, _ in tr.inputs.sorted_pairs()}):
        if k > tr.length or (k < t + 1 and not from_canonical):
            continue
        n += 1
        early = [j for j in range(k + 1, min(bb[k], tr.length + 1)) if tr[j].fires]
        if early:
            bad.append((early[0], f"fire at {early[0]} before publication time {bb[k]} of GO at {k}"))
    return n, bad


def _inv_driver_inputs_sequential(ctx: RunContext):
    if ctx.policy != "sequential" or ctx.sequential is None:
        return 0, []
    return 1, [] if ctx.sequential else [(0, "driver produced a non-sequential input")]


Check = Callable[[RunContext], tuple]

PROTOCOL_INVARIANTS: dict[str, Check] = {
    "clean_round_agreement": _inv_clean_round_agreement,
    "request_agreement_after_clean": _inv_request_agreement,
    "reported_failures_observed": _inv_reported_failures_observed,
    "horizon_monotone": _inv_horizon_monotone,
    "monotone_repair_inert": _inv_monotone_repair_inert,
    "fail_set_sandwich": _inv_fail_set_sandwich,
    "equal_view_same_output": _inv_equal_view_same_output,
    "unit_horizon_view": _inv_unit_horizon_view,
    "view_prefix_agreement": _inv_view_prefix_agreement,
    "simultaneity_after_clean": _inv_simultaneity_after_clean,
    "bounded_liveness": _inv_bounded_liveness,
    "safety_from_publication": _inv_safety_from_publication,
    "view_within_horizon": _inv_view_within_horizon,
}

RUN_INVARIANTS: dict[str, Check] = {
    **PROTOCOL_INVARIANTS,
    "clean_round_agreement_below_top": _inv_clean_round_agreement_below_top,
    "horizon_range": _inv_horizon_range,
    "view_dominates_horizon": _inv_view_dominates_horizon,
    "post_fire_clear": _inv_post_fire_clear,
    "stab_within_t_plus_1": _inv_stab_within_t_plus_1,
    "stab_within_publication": _inv_stab_within_publication,
    "stab_within_delayed_publication": _inv_stab_within_delayed_publication,
    "best_horizon_within_publication": _inv_best_horizon_within_publication,
    "fire_within_best_horizon": _inv_fire_within_best_horizon,
    "no_fire_before_publication": _inv_no_fire_before_publication,
    "driver_inputs_sequential": _inv_driver_inputs_sequential,
}

# invariants whose proofs only cover the genuine protocol's internals
_STEP_INTERNAL = {"monotone_repair_inert", "horizon_range", "post_fire_clear", "view_dominates_horizon"}


def pattern_invariants(pc: PatternContext) -> dict:
    """Checks that depend on the failure pattern alone: ``{name: [(time, detail)]}``."""
    config, failures, table = pc.config, pc.failures, pc.table
    t = config.t
    out = {}
    x = table.x
    bad = []
    if x[0] != 0:
        bad.append((0, f"x(0)={x[0]}"))
    bad += [(k, f"x drops {x[k - 1]} -> {x[k]}") for k in range(1, len(x)) if x[k] < x[k - 1]]
    bad += [(k, f"x={x[k]} exceeds t") for k in range(len(x)) if x[k] > t]
    out["discovery_monotone"] = bad
    out["delayed_pattern_publication"] = (
        [] if pc.bb_delayed >= pc.bb0 else [(0, f"delayed {pc.bb_delayed} < {pc.bb0}")])
    out["clean_round_by_publication"] = (
        [] if pc.first_clean <= pc.bb0 else [(pc.first_clean, f"first clean round {pc.first_clean} > {pc.bb0}")])
    bad = []
    for k in range(table.horizon + 1):
        wide = min(j + t + 1 - x[j] for j in range(k, min(len(x), k + 3 * (t + 2))))
        if wide != table.bb[k]:
            bad.append((k, f"wider window gives {wide}, table has {table.bb[k]}"))
    out["publication_window_exact"] = bad
    out["first_clean_in_range"] = (
        [] if 1 <= pc.first_clean <= t + 1 else [(pc.first_clean, "first clean round outside 1..t+1")])
    return out


# ---------------------------------------------------------------------------
# lower-bound witness


@dataclass(frozen=True)
class Witness:
    failures: FailurePattern
    bb0: int
    bb_delayed: int
    stab: int | None
    fires: tuple
    states: dict

    @property
    def attains_publication(self) -> bool:
        return self.stab == self.bb0


def tightness_witness(config: Config, failures: FailurePattern, length: int, step_fn=None) -> Witness:
    """State that makes the protocol stabilize as late as any algorithm must.

    Run one failure-free round from the canonical state with a GO at the
    smallest never-failing process, then restart from the resulting states
    under ``failures`` with no inputs at all. The protocol cannot tell the
    restarted run from the one with a genuine GO, so it fires on a phantom.
    """
    step_fn = step_fn or VARIANTS["fire_squad"]
    p = min(alive_forever(config, failures))
    canon = canonical_state(config)
    sim = Simulation(config, failures.delayed(1), {q: canon for q in config.processes}, step_fn)
    sim.tick((p,))
    sim.tick()
    states = dict(sim.snapshots[1].states)
    scen = Scenario(config, failures, InputPattern(), states, length, label="tightness-witness")
    trace = run(scen, step_fn)
    bb0 = publication_time(config, failures, 0)
    return Witness(failures, bb0, delayed_publication_time(config, failures),
                   verdict(trace).stab, tuple(trace.fire_times()), states)


# ---------------------------------------------------------------------------
# sweep


INPUT_POLICIES = ("none", "phantom", "one_go", "sequential")


@dataclass(frozen=True)
class SweepSpec:
    n: int
    t: int
    max_crash_round: int | None = None
    enumerate_blocked: bool = True
    uniform_states: bool = True
    corpus_states: bool = True
    random_states: int = 0
    exhaustive_states: bool = False
    state_budget: int = 1_000_000
    input_policies: tuple = INPUT_POLICIES
    run_length: int | None = None
    seed: int = 0
    variant: str = "fire_squad"
    witnesses: bool = True
    pattern_sample: int | None = None
    pattern_budget: int = 100_000
    max_counterexamples: int = 5

    def __post_init__(self):
        Config(self.n, self.t)
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {sorted(VARIANTS)}")
        unknown = set(self.input_policies) - set(INPUT_POLICIES)
        if unknown:
            raise ValueError(f"unknown input policies {sorted(unknown)}")

    @property
    def config(self) -> Config:
        return Config(self.n, self.t)

    @property
    def crash_rounds(self) -> int:
        return self.max_crash_round if self.max_crash_round is not None else self.t + 2

    @property
    def length(self) -> int:
        return self.run_length if self.run_length is not None else 2 * (self.t + 1) + 6

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["input_policies"] = list(self.input_policies)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown sweep fields: {sorted(unknown)}")
        data = dict(data)
        if "input_policies" in data:
            data["input_policies"] = tuple(data["input_policies"])
        return cls(**data)


@dataclass(frozen=True)
class Counterexample:
    invariant: str
    time: int
    detail: str
    scenario: Scenario
    variant: str
    policy: str


@dataclass
class InvariantTally:
    instances: int = 0
    scenarios: int = 0
    violations: int = 0
    violating_scenarios: int = 0

    def merge(self, other: "InvariantTally") -> None:
        self.instances += other.instances
        self.scenarios += other.scenarios
        self.violations += other.violations
        self.violating_scenarios += other.violating_scenarios


@dataclass
class SweepReport:
    spec: SweepSpec
    patterns: int = 0
    scenarios_run: int = 0
    tallies: dict = field(default_factory=lambda: defaultdict(InvariantTally))
    counterexamples: dict = field(default_factory=lambda: defaultdict(list))
    witnesses: list = field(default_factory=list)
    max_stab: int = 0

    @property
    def total_violations(self) -> int:
        return sum(t.violations for t in self.tallies.values())

    @property
    def clean(self) -> bool:
        return self.total_violations == 0

    def violated(self) -> list:
        return sorted(n for n, t in self.tallies.items() if t.violations)

    def _record(self, name: str, n: int, bad: list, make_example) -> None:
        tally = self.tallies[name]
        tally.instances += n
        if n:
            tally.scenarios += 1
        if bad:
            tally.violations += len(bad)
            tally.violating_scenarios += 1
            if len(self.counterexamples[name]) < self.spec.max_counterexamples:
                time, detail = bad[0]
                self.counterexamples[name].append(make_example(name, time, detail))

    def merge(self, other: "SweepReport") -> None:
        self.patterns += other.patterns
        self.scenarios_run += other.scenarios_run
        self.max_stab = max(self.max_stab, other.max_stab)
        for name, tally in other.tallies.items():
            self.tallies[name].merge(tally)
        for name, items in other.counterexamples.items():
            room = self.spec.max_counterexamples - len(self.counterexamples[name])
            self.counterexamples[name].extend(items[:max(room, 0)])
        self.witnesses.extend(other.witnesses)

    def summary(self) -> str:
        s = self.spec
        lines = [
            f"sweep n={s.n} t={s.t} variant={s.variant} crash_rounds<={s.crash_rounds} "
            f"length={s.length} seed={s.seed}",
            f"patterns={self.patterns} scenarios={self.scenarios_run} max_stab={self.max_stab}",
            f"{'invariant':36} {'scenarios':>10} {'instances':>11} {'violations':>10}",
        ]
        for name in sorted(self.tallies):
            t = self.tallies[name]
            lines.append(f"{name:36} {t.scenarios:>10} {t.instances:>11} {t.violations:>10}")
        if self.witnesses:
            hit = sum(1 for w in self.witnesses if w.attains_publication)
            lines.append(f"witnesses: {hit}/{len(self.witnesses)} attain the publication time")
        lines.append("result: " + ("no violations" if self.clean else f"VIOLATIONS in {', '.join(self.violated())}"))
        return "\n".join(lines)


def _overlay_phantom(states: dict) -> dict:
    return {p: replace(s, req=(s.req[0],) + (1,) * (len(s.req) - 1)) for p, s in states.items()}


def _one_go(config: Config, failures: FailurePattern, rng: random.Random) -> InputPattern:
    k = rng.randint(0, config.t + 2)
    up = sorted(surviving(config, failures, k))
    return InputPattern.of([(k, rng.choice(up))])


def evaluate(trace: Trace, pc: PatternContext, policy: str = "none",
             checks: dict | None = None) -> dict:
    """Run the catalog on one trace: ``{name: (instances, [(time, detail)])}``."""
    checks = RUN_INVARIANTS if checks is None else checks
    v = verdict(trace)
    seq = is_sequential(trace, v.stab) if v.stab is not None and trace.inputs else None
    ctx = RunContext(trace, pc, v, best_horizons(trace), seq, policy)
    return {name: fn(ctx) for name, fn in checks.items()}, v


def _joint_states(spec: SweepSpec, config: Config, rng_seed: int):
    if spec.uniform_states:
        yield from adversarial_states(config, "uniform")
    if spec.corpus_states:
        yield from adversarial_states(config, "corpus")
    if spec.exhaustive_states:
        yield from adversarial_states(config, "exhaustive", budget=spec.state_budget)
    if spec.random_states:
        yield from adversarial_states(config, "random", count=spec.random_states, seed=rng_seed)


def _pattern_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


def sweep_pattern(spec: SweepSpec, index: int, failures: FailurePattern) -> SweepReport:
    config = spec.config
    step_fn = VARIANTS[spec.variant]
    L = spec.length
    pc = PatternContext.build(config, failures, L)
    report = SweepReport(spec, patterns=1)
    checks = RUN_INVARIANTS
    if spec.variant == "fixed_delay":
        checks = {k: v for k, v in checks.items() if k not in _STEP_INTERNAL}

    def pattern_example(name, time, detail):
        scen = Scenario(config, failures, InputPattern(), None, L, label=f"pattern#{index}")
        return Counterexample(name, time, detail, scen, spec.variant, "pattern")

    for name, bad in pattern_invariants(pc).items():
        report._record(name, 1, bad, pattern_example)

    if spec.witnesses:
        w = tightness_witness(config, failures, L, step_fn)
        report.witnesses.append(w)
        wscen = Scenario(config, failures, InputPattern(), w.states, L, label=f"witness#{index}")
        for name, ok in (("tightness_witness", w.stab == w.bb0),
                         ("tightness_witness_delayed", w.stab == w.bb_delayed)):
            report._record(name, 1, [] if ok else [(0, f"witness stab={w.stab}, bb(F,0)={w.bb0}, "
                                                     f"delayed={w.bb_delayed}, fires={list(w.fires)}")],
                           lambda n, t_, d: Counterexample(n, t_, d, wscen, spec.variant, "none"))

    seed = _pattern_seed(spec.seed, index)
    rng = random.Random(seed)
    for si, states in enumerate(_joint_states(spec, config, seed)):
        for policy in spec.input_policies:
            if policy == "sequential":
                base = Scenario(config, failures, InputPattern(), states, L)
                inputs, trace = sequential_driver(base, "repeat", rng.getrandbits(32), step_fn=step_fn)
                scen = replace(base, inputs=inputs)
            else:
                init = _overlay_phantom(states) if policy == "phantom" else states
                inputs = _one_go(config, failures, rng) if policy == "one_go" else InputPattern()
                scen = Scenario(config, failures, inputs, init, L)
                trace = run(scen, step_fn)
            scen = replace(scen, label=f"pattern#{index}/state#{si}/{policy}")
            results, v = evaluate(trace, pc, policy, checks)
            report.scenarios_run += 1
            if v.stab is not None:
                report.max_stab = max(report.max_stab, v.stab)

            def example(name, time, detail, scen=scen, policy=policy):
                return Counterexample(name, time, detail, scen, spec.variant, policy)

            for name, (n, bad) in results.items():
                report._record(name, n, bad, example)
    return report


def selected_patterns(spec: SweepSpec) -> list:
    patterns = list(enumerate_failure_patterns(
        spec.n, spec.t, spec.crash_rounds, spec.enumerate_blocked, spec.pattern_budget))
    indexed = list(enumerate(patterns))
    if spec.pattern_sample is not None and spec.pattern_sample < len(indexed):
        rng = random.Random(_pattern_seed(spec.seed, -1))
        indexed = sorted(rng.sample(indexed, spec.pattern_sample), key=lambda ip: ip[0])
    return indexed


def _sweep_job(args):
    spec, index, failures = args
    return sweep_pattern(spec, index, failures)


def sweep(spec: SweepSpec, jobs: int = 1, progress: Callable | None = None) -> SweepReport:
    """Run the whole scenario space of ``spec`` and aggregate the catalog."""
    indexed = selected_patterns(spec)
    report = SweepReport(spec)
    work = [(spec, i, f) for i, f in indexed]
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            parts = pool.imap(_sweep_job, work)
            for done, part in enumerate(parts, 1):
                report.merge(part)
                if progress:
                    progress(done, len(work))
    else:
        for done, item in enumerate(work, 1):
            report.merge(_sweep_job(item))
            if progress:
                progress(done, len(work))
    log.info("sweep finished: %d scenarios, %d violations", report.scenarios_run, report.total_violations)
    return report
