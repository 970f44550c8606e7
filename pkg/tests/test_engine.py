import pytest
from hypothesis import given, settings

from firesquad.core import Config, FailurePattern, InputPattern, ProcessState, ValidationError, canonical_state
from firesquad.engine import Scenario, Simulation, clear_step_cache, default_length, replay_suffix, run
from firesquad.protocol import step

from .conftest import scenarios


class TestScenario:
    def test_defaults_to_canonical(self, c31):
        s = Scenario(c31)
        assert all(v == canonical_state(c31) for v in s.initial_states.values())

    def test_sanitizes_states(self, c31):
        bad = ProcessState((0, 3, 0), frozenset({9}), (7, -1))
        s = Scenario(c31, initial_states={p: bad for p in c31.processes})
        assert s.initial_states[1] == ProcessState((0, 1, 0), frozenset(), (2, 0))

    def test_missing_states(self, c31):
        with pytest.raises(ValidationError):
            Scenario(c31, initial_states={1: canonical_state(c31)})

    def test_too_many_crashes(self, c31):
        with pytest.raises(ValidationError):
            Scenario(c31, FailurePattern.of((1, 1, ()), (2, 1, ())))

    def test_default_length(self, c31):
        s = Scenario(c31, inputs=InputPattern.of([(3, 1)]))
        assert default_length(s) == 2 + 4 + 3
        assert s.resolved_length() == 9


class TestRun:
    def test_quiet_canonical_never_fires(self, c31):
        tr = run(Scenario(c31, length=5))
        assert tr.fire_times() == []
        for snap in tr.snapshots[1:]:
            assert len(set(snap.states.values())) == 1

    def test_go_fires_t_plus_1_later(self, c31):
        tr = run(Scenario(c31, inputs=InputPattern.of([(3, 1)]), length=8))
        assert tr.fire_times() == [5]
        assert tr[5].fires == {1, 2, 3}

    def test_partial_delivery(self, c31):
        F = FailurePattern.of((2, 2, {1}))
        tr = run(Scenario(c31, F, length=6))
        assert tr[2].states[1].fail == {2}
        assert tr[2].states[3].fail == frozenset()
        assert 2 not in tr[2].states
        assert all(2 in tr[3].states[p].fail for p in (1, 3))
        assert tr.fire_times() == []
        assert tr[2].delivered[1] == {1, 3} and tr[2].delivered[3] == {1, 2, 3}

    def test_time_zero_input_overrides_phantom(self, c31):
        phantom = ProcessState((1, 0, 0), frozenset(), (2, 2))
        tr = run(Scenario(c31, initial_states={p: phantom for p in c31.processes}, length=6))
        assert tr[0].states[1].req[0] == 0
        assert tr.fire_times() == []

    def test_time_zero_go(self, c31):
        tr = run(Scenario(c31, inputs=InputPattern.of([(0, 2)]), length=5))
        assert tr[0].states[2].req[0] == 1 and not tr[0].fires
        assert tr.fire_times() == [2]

    def test_dead_at_crash_time(self, c31):
        F = FailurePattern.of((3, 1, ()))
        tr = run(Scenario(c31, F, inputs=InputPattern.of([(1, 3)]), length=4))
        assert 3 not in tr[1].states and 3 not in tr[1].horz
        assert tr.inputs == InputPattern.of([(1, 3)])
        assert tr.go_times() == []

    def test_memo_matches_plain(self, c31):
        s = Scenario(c31, FailurePattern.of((1, 1, {2})), InputPattern.of([(2, 3)]), length=8)
        assert run(s) == run(s, memoize=False)
        clear_step_cache()
        assert run(s) == run(s, memoize=False)

    def test_incremental_simulation(self, c31):
        sim = Simulation(c31, FailurePattern(), Scenario(c31).initial_states, step)
        for k in range(6):
            sim.tick((1,) if k == 2 else ())
        assert sim.time == 5
        assert sim.trace().fire_times() == [4]


class TestReplaySuffix:
    def test_identity(self, c31):
        s = Scenario(c31, FailurePattern.of((1, 2, {2})), InputPattern.of([(1, 3)]), length=7)
        r = replay_suffix(run(s), 0)
        assert (r.failures, r.inputs, r.initial_states, r.length) == (s.failures, s.inputs, s.initial_states, 7)

    def test_shifted_round(self, c31):
        s = Scenario(c31, FailurePattern.of((1, 5, {2})), length=8)
        assert replay_suffix(run(s), 3).failures.crash_of(1).round == 2

    def test_quiescent_suffix(self, c31):
        tr = run(Scenario(c31, length=8))
        rerun = run(replay_suffix(tr, 3))
        for j in range(rerun.length + 1):
            assert rerun[j].states == tr[j + 3].states

    def test_out_of_range(self, c31):
        tr = run(Scenario(c31, length=3))
        with pytest.raises(ValidationError):
            replay_suffix(tr, 4)

    @settings(max_examples=60, deadline=None)
    @given(scenarios(length=9))
    def test_suffix_property(self, s):
        tr = run(s)
        for k in (1, 2, 4):
            rerun = run(replay_suffix(tr, k))
            for j in range(rerun.length + 1):
                orig = tr[j + k]
                assert rerun[j].states == orig.states
                if j:
                    assert rerun[j].fires == orig.fires

    @settings(max_examples=40, deadline=None)
    @given(scenarios())
    def test_deterministic_and_monotone(self, s):
        a, b = run(s), run(s)
        assert a == b
        for k in range(a.length):
            gone = set(s.config.processes) - set(a[k].states)
            assert gone.isdisjoint(a[k + 1].states)
            for later in a.snapshots[k + 1:]:
                for heard in later.delivered.values():
                    assert gone.isdisjoint(heard)
