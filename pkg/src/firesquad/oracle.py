"""Failure-discovery and horizon arithmetic for a failure pattern.

``discovered(k)`` is what a full-information protocol can know to be faulty
at time ``k``: every surviving process floods the set of peers it has
failed to hear from, and the union over survivors is taken. The rest is
bookkeeping on top of its size ``x``:

* horizon distance ``t + 1 - x(k)``,
* absolute horizon ``k + t + 1 - x(k)``,
* publication time, the smallest absolute horizon at or after ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Config, FailurePattern, Trace, alive_forever, surviving


def discovery_sets(config: Config, failures: FailurePattern, horizon: int) -> list:
    """Discovered-failure sets for times ``0..horizon``.

    Uses the same delivery rule as the simulator, so both agree on who
    hears whom.
    """
    procs = config.processes
    knows = {p: frozenset() for p in procs if failures.alive(p, 0)}
    out = [frozenset()]
    for r in range(1, horizon + 1):
        nxt = {}
        for p in procs:
            if not failures.alive(p, r):
                continue
            heard = [q for q in knows if failures.delivers(q, p, r)]
            missing = frozenset(q for q in procs if q not in heard)
            nxt[p] = missing.union(*(knows[q] for q in heard))
        knows = nxt
        out.append(frozenset().union(*knows.values()))
    return out


def discovered_failures(config: Config, failures: FailurePattern, k: int) -> frozenset:
    return discovery_sets(config, failures, k)[k]


def _horizon_needed(failures: FailurePattern, k: int, t: int) -> int:
    # discovery is frozen after the last crash round + 1
    return max(k + t + 1, failures.last_round + 1)


def publication_time(config: Config, failures: FailurePattern, k: int) -> int:
    t = config.t
    x = [len(s) for s in discovery_sets(config, failures, k + t + 1)]
    return min(j + t + 1 - x[j] for j in range(k, k + t + 2))


def silent_in_round(config: Config, failures: FailurePattern, pid: int) -> bool:
    """A crash is silent if no process still up after its round misses it."""
    c = failures.crash_of(pid)
    if c is None:
        return False
    up = surviving(config, failures, c.round)
    return not (c.blocked & up)


def clean_round(config: Config, failures: FailurePattern, r: int) -> bool:
    if r < 1:
        raise ValueError(f"rounds start at 1, got {r}")
    for c in failures:
        if c.round == r - 1 and silent_in_round(config, failures, c.process):
            return False
        if c.round == r and not silent_in_round(config, failures, c.process):
            return False
    return True


def first_clean(config: Config, failures: FailurePattern) -> int:
    r = 1
    while not clean_round(config, failures, r):
        r += 1
    return r


@dataclass(frozen=True)
class OracleTable:
    t: int
    x: tuple
    bb: tuple
    clean: tuple
    first_clean: int

    @property
    def horizon(self) -> int:
        return len(self.bb) - 1

    def rh(self, k: int) -> int:
        return self.t + 1 - self.x[k]

    def ah(self, k: int) -> int:
        return k + self.rh(k)

    def records(self):
        for k in range(self.horizon + 1):
            yield {
                "k": k, "x": self.x[k], "rh": self.rh(k), "ah": self.ah(k),
                "bb": self.bb[k], "clean": self.clean[k] if k >= 1 else None,
            }


def oracle_table(config: Config, failures: FailurePattern, horizon: int) -> OracleTable:
    """Per-time table for ``0..horizon``; the clean flag of time ``k`` is that of round ``k``."""
    t = config.t
    if horizon < t + 1:
        raise ValueError(f"horizon must be at least t+1={t + 1}, got {horizon}")
    span = _horizon_needed(failures, horizon, t)
    x = tuple(len(s) for s in discovery_sets(config, failures, span))
    ah = [j + t + 1 - x[j] for j in range(len(x))]
    # absolute horizons past k+t+1 are at least k+t+2 > ah(k), so the window is exact
    bb = tuple(min(ah[k:k + t + 2]) for k in range(horizon + 1))
    clean = (None,) + tuple(clean_round(config, failures, r) for r in range(1, horizon + 1))
    return OracleTable(t, x, bb, clean, first_clean(config, failures))


def delayed_publication_time(config: Config, failures: FailurePattern) -> int:
    """Publication time of time 0 once a failure-free round is put in front of the pattern."""
    return publication_time(config, failures.delayed(1), 0)


@dataclass(frozen=True)
class HorizonSummary:
    """Trace-derived horizon minima; ``None`` marks values the trace cannot decide."""

    min_h: dict
    min_hg: dict
    best_h: dict


def best_horizons(trace: Trace) -> HorizonSummary:
    t = trace.config.t
    correct = trace.correct
    min_h, min_hg = {}, {}
    for snap in trace.snapshots[1:]:
        if snap.horz:
            min_h[snap.k] = min(snap.horz.values())
        vals = [snap.horz[p] for p in correct if p in snap.horz]
        if vals:
            min_hg[snap.k] = min(vals)
    best_h = {}
    L = trace.length
    for k in range(L + 1):
        if k + t + 1 > L:
            best_h[k] = None
        else:
            best_h[k] = min(j + min_hg[j + 1] for j in range(k, k + t + 1))
    return HorizonSummary(min_h, min_hg, best_h)
