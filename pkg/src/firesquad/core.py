"""Domain types shared by the simulator, oracles and checker.

Processes are numbered ``1..n``. Time ``k`` is a non-negative integer and
round ``r`` runs from time ``r - 1`` to time ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Mapping


class ValidationError(ValueError):
    """Raised for malformed configurations, patterns or states."""


@dataclass(frozen=True)
class Config:
    n: int
    t: int

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError(f"need at least two processes, got n={self.n}")
        if self.t < 0:
            raise ValidationError(f"crash bound must be non-negative, got t={self.t}")
        if not self.t < self.n - 1:
            raise ValidationError(
                f"crash bound must satisfy t < n-1 (at least two processes must "
                f"coordinate), got n={self.n}, t={self.t}"
            )

    @property
    def processes(self) -> range:
        return range(1, self.n + 1)

    def check_process(self, pid: int) -> None:
        if not 1 <= pid <= self.n:
            raise ValidationError(f"process id {pid} outside 1..{self.n}")


@dataclass(frozen=True, order=True)
class Crash:
    """One crashing process: it sends every round-``round`` message except
    those to ``blocked`` and nothing afterwards.

    ``round == 0`` marks a process that is already dead at time 0; it only
    arises from shifting a pattern forward in time.
    """

    process: int
    round: int
    blocked: frozenset = frozenset()

    @property
    def is_silent_to_all(self) -> bool:
        return not self.blocked


@dataclass(frozen=True)
class FailurePattern:
    crashes: tuple = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.crashes))
        seen = set()
        for c in ordered:
            if c.process in seen:
                raise ValidationError(f"process {c.process} crashes twice")
            if c.round < 0:
                raise ValidationError(f"crash round must be >= 0, got {c.round}")
            if c.process in c.blocked:
                raise ValidationError(f"process {c.process} cannot block its own channel")
            seen.add(c.process)
        object.__setattr__(self, "crashes", ordered)

    @classmethod
    def of(cls, *crashes: tuple) -> "FailurePattern":
        """Build from ``(process, round, blocked)`` triples."""
        return cls(tuple(Crash(p, r, frozenset(b)) for p, r, b in crashes))

    @cached_property
    def _by_process(self) -> dict:
        return {c.process: c for c in self.crashes}

    def __len__(self) -> int:
        return len(self.crashes)

    def __iter__(self) -> Iterator[Crash]:
        return iter(self.crashes)

    def crash_round(self, pid: int) -> int | None:
        c = self._by_process.get(pid)
        return None if c is None else c.round

    def crash_of(self, pid: int) -> Crash | None:
        return self._by_process.get(pid)

    def validate(self, config: Config) -> None:
        if len(self.crashes) > config.t:
            raise ValidationError(
                f"{len(self.crashes)} crashes exceed the crash bound t={config.t}"
            )
        for c in self.crashes:
            config.check_process(c.process)
            for q in c.blocked:
                config.check_process(q)

    def alive(self, pid: int, k: int) -> bool:
        """True iff ``pid`` has not failed by time ``k``."""
        r = self.crash_round(pid)
        return r is None or r > k

    def delivers(self, sender: int, receiver: int, r: int) -> bool:
        """Whether the round-``r`` message from ``sender`` reaches ``receiver``."""
        c = self._by_process.get(sender)
        if c is None or c.round > r:
            return True
        if c.round < r:
            return False
        return receiver not in c.blocked

    def shifted(self, k: int) -> "FailurePattern":
        """The pattern seen from time ``k`` on; rounds ``<= k`` collapse to 0."""
        return FailurePattern(
            tuple(Crash(c.process, max(c.round - k, 0), c.blocked if c.round > k else frozenset())
                  for c in self.crashes)
        )

    def delayed(self, rounds: int = 1) -> "FailurePattern":
        """Prefix ``rounds`` failure-free rounds."""
        return FailurePattern(
            tuple(replace(c, round=c.round + rounds) for c in self.crashes)
        )

    @property
    def last_round(self) -> int:
        return max((c.round for c in self.crashes), default=0)


def surviving(config: Config, failures: FailurePattern, k: int) -> frozenset:
    """Processes that have not failed by time ``k``."""
    return frozenset(p for p in config.processes if failures.alive(p, k))


def alive_forever(config: Config, failures: FailurePattern) -> frozenset:
    return frozenset(p for p in config.processes if failures.crash_round(p) is None)


@dataclass(frozen=True)
class InputPattern:
    """Set of ``(time, process)`` pairs at which a GO input arrives."""

    go: frozenset = frozenset()

    @classmethod
    def of(cls, pairs: Iterable[tuple]) -> "InputPattern":
        return cls(frozenset((int(k), int(p)) for k, p in pairs))

    def __bool__(self) -> bool:
        return bool(self.go)

    def bit(self, k: int, pid: int) -> int:
        return 1 if (k, pid) in self.go else 0

    @cached_property
    def _by_time(self) -> dict:
        out: dict[int, set] = {}
        for k, p in self.go:
            out.setdefault(k, set()).add(p)
        return {k: frozenset(v) for k, v in out.items()}

    def at(self, k: int) -> frozenset:
        return self._by_time.get(k, frozenset())

    def times(self) -> list:
        return sorted(self._by_time)

    @property
    def max_time(self) -> int:
        return max((k for k, _ in self.go), default=0)

    def shifted(self, k: int) -> "InputPattern":
        return InputPattern(frozenset((j - k, p) for j, p in self.go if j >= k))

    def validate(self, config: Config) -> None:
        for k, p in self.go:
            if k < 0:
                raise ValidationError(f"input time must be non-negative, got {k}")
            config.check_process(p)

    def sorted_pairs(self) -> list:
        return sorted(self.go)


@dataclass(frozen=True)
class ProcessState:
    """Persistent variables of one process; also the wire message format."""

    req: tuple
    fail: frozenset
    view: tuple

    def __hash__(self):
        # states are hashed constantly by the step cache
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.req, self.fail, self.view))
            object.__setattr__(self, "_hash", h)
        return h

    def to_dict(self) -> dict:
        return {"req": list(self.req), "fail": sorted(self.fail), "view": list(self.view)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProcessState":
        unknown = set(data) - {"req", "fail", "view"}
        if unknown:
            raise ValidationError(f"unknown state fields: {sorted(unknown)}")
        try:
            return cls(tuple(data["req"]), frozenset(data["fail"]), tuple(data["view"]))
        except KeyError as exc:
            raise ValidationError(f"state is missing field {exc}") from None


# A message is the sender's (req, fail, view) triple verbatim.
Message = ProcessState


def canonical_state(config: Config) -> ProcessState:
    """All-zero requests, empty fail set, every view entry at the maximal ``t+1``."""
    return ProcessState(
        req=(0,) * (config.t + 2),
        fail=frozenset(),
        view=(config.t + 1,) * (config.t + 1),
    )


def sanitize(state: ProcessState, config: Config) -> ProcessState:
    """Coerce arbitrary variable contents into their legal domains.

    Array lengths are part of the memory layout fixed by ``t`` and are not
    repaired; a wrong length is a structural error.
    """
    t = config.t
    if len(state.req) != t + 2 or len(state.view) != t + 1:
        raise ValidationError(
            f"state layout mismatch: req has {len(state.req)} entries (want {t + 2}), "
            f"view has {len(state.view)} (want {t + 1})"
        )
    req = tuple(1 if v else 0 for v in state.req)
    view = tuple(min(max(int(v), 0), t + 1) for v in state.view)
    fail = frozenset(p for p in state.fail if 1 <= p <= config.n)
    if req == state.req and view == state.view and fail == state.fail:
        return state
    return ProcessState(req, fail, view)


def is_sanitized(state: ProcessState, config: Config) -> bool:
    try:
        return sanitize(state, config) is state
    except ValidationError:
        return False


@dataclass(frozen=True)
class Snapshot:
    """Everything recorded at one time ``k`` of a run.

    ``horz``, ``failp``, ``raised`` and ``delivered`` are empty at time 0
    because no step runs then. ``raised`` lists, per process, the view
    indices that the monotonicity repair lifted.
    """

    k: int
    states: Mapping
    horz: Mapping = field(default_factory=dict)
    failp: Mapping = field(default_factory=dict)
    fires: frozenset = frozenset()
    delivered: Mapping = field(default_factory=dict)
    raised: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class Trace:
    config: Config
    failures: FailurePattern
    inputs: InputPattern
    snapshots: tuple
    label: str = ""

    @property
    def length(self) -> int:
        return len(self.snapshots) - 1

    def __getitem__(self, k: int) -> Snapshot:
        return self.snapshots[k]

    @cached_property
    def correct(self) -> frozenset:
        return alive_forever(self.config, self.failures)

    def alive(self, k: int) -> frozenset:
        return frozenset(self.snapshots[k].states)

    def fire_times(self) -> list:
        return [s.k for s in self.snapshots if s.fires]

    def go_times(self) -> list:
        """Times at which some process that is up receives a GO."""
        out = []
        for k in self.inputs.times():
            if k <= self.length and any(self.failures.alive(p, k) for p in self.inputs.at(k)):
                out.append(k)
        return out
