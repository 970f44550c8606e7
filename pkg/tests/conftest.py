import itertools

import pytest
from hypothesis import strategies as st

from firesquad.core import Config, Crash, FailurePattern, InputPattern, ProcessState

SMALL_CONFIGS = [Config(3, 1), Config(4, 1), Config(4, 2), Config(3, 0)]


def loud(p, r, *blocked):
    return (p, r, frozenset(blocked))


@st.composite
def configs(draw):
    return draw(st.sampled_from(SMALL_CONFIGS))


@st.composite
def failure_patterns(draw, config, max_round=4):
    m = draw(st.integers(0, config.t))
    who = draw(st.permutations(list(config.processes)))[:m]
    crashes = []
    for p in who:
        r = draw(st.integers(1, max_round))
        others = [q for q in config.processes if q != p]
        blocked = draw(st.sets(st.sampled_from(others)))
        crashes.append(Crash(p, r, frozenset(blocked)))
    return FailurePattern(tuple(crashes))


@st.composite
def process_states(draw, config):
    t = config.t
    req = tuple(draw(st.lists(st.integers(0, 1), min_size=t + 2, max_size=t + 2)))
    fail = frozenset(draw(st.sets(st.sampled_from(list(config.processes)))))
    view = tuple(draw(st.lists(st.integers(0, t + 1), min_size=t + 1, max_size=t + 1)))
    return ProcessState(req, fail, view)


@st.composite
def joint_states(draw, config):
    return {p: draw(process_states(config)) for p in config.processes}


@st.composite
def input_patterns(draw, config, max_time=6):
    pairs = draw(st.sets(st.tuples(st.integers(0, max_time), st.sampled_from(list(config.processes))), max_size=3))
    return InputPattern.of(pairs)


@st.composite
def scenarios(draw, length=None):
    from firesquad.engine import Scenario

    config = draw(configs())
    return Scenario(
        config,
        draw(failure_patterns(config)),
        draw(input_patterns(config)),
        draw(joint_states(config)),
        length if length is not None else draw(st.integers(3, 12)),
    )


@pytest.fixture
def c31():
    return Config(3, 1)


@pytest.fixture
def c42():
    return Config(4, 2)
