import pytest
from hypothesis import given

from firesquad.core import (
    Config,
    Crash,
    FailurePattern,
    InputPattern,
    ProcessState,
    ValidationError,
    alive_forever,
    canonical_state,
    is_sanitized,
    sanitize,
    surviving,
)

from .conftest import configs, process_states


class TestConfig:
    def test_processes(self):
        assert list(Config(3, 1).processes) == [1, 2, 3]

    @pytest.mark.parametrize("n,t", [(3, 2), (2, 1), (4, 3)])
    def test_rejects_t_not_below_n_minus_1(self, n, t):
        with pytest.raises(ValidationError, match="t < n-1"):
            Config(n, t)

    def test_rejects_negative_t(self):
        with pytest.raises(ValidationError):
            Config(3, -1)

    def test_t_zero_allowed(self):
        assert Config(2, 0).t == 0


class TestFailurePattern:
    def test_delivery_rule(self):
        F = FailurePattern.of((3, 2, {1}))
        assert F.delivers(3, 1, 1)
        assert not F.delivers(3, 1, 2)
        assert F.delivers(3, 2, 2)
        assert not F.delivers(3, 2, 3)
        assert F.delivers(1, 2, 7)

    def test_alive(self):
        F = FailurePattern.of((3, 2, ()))
        assert F.alive(3, 1) and not F.alive(3, 2)

    def test_validate_counts_crashes(self):
        F = FailurePattern.of((1, 1, ()), (2, 1, ()))
        with pytest.raises(ValidationError):
            F.validate(Config(3, 1))
        F.validate(Config(4, 2))

    def test_validate_ids(self):
        with pytest.raises(ValidationError):
            FailurePattern.of((5, 1, ())).validate(Config(3, 1))

    def test_duplicate_process(self):
        with pytest.raises(ValidationError):
            FailurePattern.of((1, 1, ()), (1, 2, ()))

    def test_self_block(self):
        with pytest.raises(ValidationError):
            FailurePattern.of((1, 1, {1}))

    def test_canonical_order(self):
        a = FailurePattern.of((2, 1, ()), (1, 2, ()))
        b = FailurePattern.of((1, 2, ()), (2, 1, ()))
        assert a == b and hash(a) == hash(b)

    def test_shift(self):
        F = FailurePattern.of((1, 1, {2}), (2, 3, {3}))
        G = F.shifted(1)
        assert G.crash_of(1) == Crash(1, 0, frozenset())
        assert G.crash_of(2) == Crash(2, 2, frozenset({3}))
        assert not G.alive(1, 0)

    def test_shift_zero_is_identity(self):
        F = FailurePattern.of((1, 2, {2}))
        assert F.shifted(0) == F

    def test_delay(self):
        F = FailurePattern.of((1, 1, {2}))
        assert F.delayed(1).crash_of(1).round == 2
        assert F.delayed(1).shifted(1) == F

    def test_survivors(self):
        c = Config(4, 2)
        F = FailurePattern.of((1, 1, ()), (2, 3, ()))
        assert surviving(c, F, 2) == {2, 3, 4}
        assert alive_forever(c, F) == {3, 4}


class TestInputPattern:
    def test_at_and_bit(self):
        I = InputPattern.of([(3, 1), (3, 2), (5, 1)])
        assert I.at(3) == {1, 2}
        assert I.bit(5, 1) == 1 and I.bit(5, 2) == 0
        assert I.times() == [3, 5]
        assert I.max_time == 5

    def test_shift_drops_past(self):
        I = InputPattern.of([(1, 1), (4, 2)])
        assert I.shifted(2) == InputPattern.of([(2, 2)])
        assert I.shifted(0) == I

    def test_validate(self):
        with pytest.raises(ValidationError):
            InputPattern.of([(-1, 1)]).validate(Config(3, 1))
        with pytest.raises(ValidationError):
            InputPattern.of([(0, 9)]).validate(Config(3, 1))


class TestStates:
    def test_canonical(self):
        s = canonical_state(Config(3, 1))
        assert s == ProcessState((0, 0, 0), frozenset(), (2, 2))

    def test_sanitize_clamps(self):
        c = Config(3, 1)
        s = sanitize(ProcessState((0, 5, 1), frozenset({1, 7}), (-2, 9)), c)
        assert s == ProcessState((0, 1, 1), frozenset({1}), (0, 2))

    def test_sanitize_keeps_identity(self):
        c = Config(3, 1)
        s = ProcessState((0, 1, 1), frozenset({2}), (0, 2))
        assert sanitize(s, c) is s and is_sanitized(s, c)

    def test_sanitize_rejects_layout(self):
        with pytest.raises(ValidationError):
            sanitize(ProcessState((0, 0), frozenset(), (2, 2)), Config(3, 1))

    @given(configs().flatmap(lambda c: process_states(c).map(lambda s: (c, s))))
    def test_sanitize_idempotent(self, cs):
        c, s = cs
        once = sanitize(s, c)
        assert sanitize(once, c) == once

    def test_dict_round_trip(self):
        s = ProcessState((0, 1, 0), frozenset({3, 1}), (1, 2))
        assert ProcessState.from_dict(s.to_dict()) == s

    def test_dict_rejects_unknown(self):
        with pytest.raises(ValidationError):
            ProcessState.from_dict({"req": [0], "fail": [], "view": [], "extra": 1})

    def test_hash_matches_equality(self):
        a = ProcessState((0, 1, 0), frozenset({1}), (1, 2))
        b = ProcessState((0, 1, 0), frozenset({1}), (1, 2))
        assert a == b and hash(a) == hash(b) and len({a, b}) == 1
