"""The FIRE-SQUAD transition for a single process and a single time step.

Each process keeps a shift register of pending GO requests (``req``), the
set of peers it did not hear from in the last round (``fail``), and a
forecast of how old information must be before it is common knowledge
(``view``, where ``view[i]`` is the age that will be common knowledge ``i``
steps from now). A process fires as soon as a pending request is at least
``view[0]`` rounds old.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .core import Config, Message, ProcessState


class ProtocolError(ValueError):
    """A step was invoked outside its contract."""


@dataclass(frozen=True)
class StepOutcome:
    state: ProcessState
    fired: bool
    horz: int
    failp: frozenset
    raised: tuple = ()

    @property
    def outgoing(self) -> Message:
        return self.state

    @property
    def failp_size(self) -> int:
        return len(self.failp)


StepFn = Callable[[int, ProcessState, Mapping, int, Config], StepOutcome]


def make_initial_message(state: ProcessState) -> Message:
    """The round-1 message is the (sanitized) time-0 state, verbatim."""
    return state


def _transition(pid, prev, received, input_bit, config, *, check_one=True, check_two=True):
    if not received:
        raise ProtocolError("a process always receives at least its own message")
    if pid not in received:
        raise ProtocolError(f"process {pid} did not receive its own message")
    t = config.t
    msgs = tuple(received.values())
    for m in msgs:
        if len(m.req) != t + 2 or len(m.view) != t + 1:
            raise ProtocolError("message layout does not match the configured t")
        if any(v not in (0, 1) for v in m.req) or any(not 0 <= v <= t + 1 for v in m.view):
            raise ProtocolError("message carries out-of-domain values; sanitize first")

    req = [input_bit]
    for i in range(1, t + 2):
        req.append(max(m.req[i - 1] for m in msgs))

    failp = frozenset().union(*(m.fail for m in msgs))
    fail = frozenset(q for q in config.processes if q not in received)
    if len(fail) > t:
        raise ProtocolError(f"{len(fail)} senders missing, but at most t={t} processes can crash")

    view = [min(m.view[i] for m in msgs) + 1 for i in range(1, t + 1)]
    view.append(prev.view[t])

    if check_one:
        horz = t + 1 - min(len(failp), len(fail))
    else:
        # contaminated reports can exceed t; keep the index legal
        horz = max(1, t + 1 - len(failp))
    view[horz - 1] = 1

    raised = []
    if check_two:
        for i in range(t + 1):
            if horz - i > view[i]:
                view[i] = horz - i
                raised.append(i)
    for i in range(t + 1):
        if view[i] > t + 1:
            view[i] = t + 1
        elif view[i] < 0:
            view[i] = 0

    fired = False
    for i in range(view[0], t + 2):
        if req[i]:
            for j in range(i, t + 2):
                req[j] = 0
            fired = True
            break

    return StepOutcome(ProcessState(tuple(req), fail, tuple(view)), fired, horz, failp, tuple(raised))


def step(pid: int, prev: ProcessState, received: Mapping, input_bit: int, config: Config) -> StepOutcome:
    """One FIRE-SQUAD iteration at process ``pid``.

    ``received`` maps sender id to the message heard this round and must
    contain ``pid`` itself. The firing test clears every request from the
    smallest qualifying age upward, so after a fire no pending request is
    ``view[0]`` or more rounds old.
    """
    return _transition(pid, prev, received, input_bit, config)


def step_without_observed_check(pid, prev, received, input_bit, config) -> StepOutcome:
    """Mutant: trusts reported failures even when they were not observed first-hand."""
    return _transition(pid, prev, received, input_bit, config, check_one=False)


def step_without_monotone_repair(pid, prev, received, input_bit, config) -> StepOutcome:
    """Mutant: never lifts stale view entries up to the current horizon."""
    return _transition(pid, prev, received, input_bit, config, check_two=False)


def fixed_delay_step(pid, prev, received, input_bit, config) -> StepOutcome:
    """Baseline that always answers a GO exactly ``t+1`` rounds later."""
    if pid not in received:
        raise ProtocolError(f"process {pid} did not receive its own message")
    t = config.t
    msgs = tuple(received.values())
    req = [input_bit] + [max(m.req[i - 1] for m in msgs) for i in range(1, t + 2)]
    fired = bool(req[t + 1])
    req[t + 1] = 0
    fail = frozenset(q for q in config.processes if q not in received)
    failp = frozenset().union(*(m.fail for m in msgs))
    state = ProcessState(tuple(req), fail, (t + 1,) * (t + 1))
    return StepOutcome(state, fired, t + 1, failp)


VARIANTS: dict[str, StepFn] = {
    "fire_squad": step,
    "no_observed_check": step_without_observed_check,
    "no_monotone_repair": step_without_monotone_repair,
    "fixed_delay": fixed_delay_step,
}
