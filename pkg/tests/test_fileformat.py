import json

import pytest
from hypothesis import given, settings

from firesquad.core import Config, FailurePattern, InputPattern, ValidationError
from firesquad.engine import Scenario, run
from firesquad.fileformat import (
    FormatError,
    ScenarioFile,
    dumps_trace,
    loads_trace,
    scenario_from_json,
    seeded_states,
)

from .conftest import scenarios

BASE = {"format_version": 1, "config": {"n": 3, "t": 1}}


class TestScenarioDocs:
    def test_minimal(self):
        sf = scenario_from_json(dict(BASE))
        assert sf.scenario.config == Config(3, 1) and sf.initial == "canonical"
        assert sf.to_json() == {**BASE, "failures": [], "inputs": [], "initial_states": "canonical"}

    def test_full_round_trip(self):
        doc = {**BASE, "failures": [{"process": 3, "crash_round": 1, "blocked": [1, 2]}],
               "inputs": [{"time": 3, "process": 1}], "initial_states": "seed:42",
               "length": 9, "label": "x"}
        sf = scenario_from_json(doc)
        assert sf.to_json() == doc
        assert scenario_from_json(sf.to_json()).scenario == sf.scenario

    def test_seed_states_are_deterministic(self):
        a = scenario_from_json({**BASE, "initial_states": "seed:7"}).scenario
        b = scenario_from_json({**BASE, "initial_states": "seed:7"}).scenario
        assert a.initial_states == b.initial_states == seeded_states(Config(3, 1), 7)

    def test_explicit_states(self):
        states = {str(p): {"req": [0, 1, 0], "fail": [], "view": [0, 0]} for p in (1, 2, 3)}
        sf = scenario_from_json({**BASE, "initial_states": states})
        assert sf.scenario.initial_states[2].req == (0, 1, 0)
        assert sf.to_json()["initial_states"] == states

    @pytest.mark.parametrize("doc", [
        {**BASE, "colour": 1},
        {**BASE, "failures": [{"process": 1, "round": 1}]},
        {**BASE, "initial_states": "random"},
        {**BASE, "initial_states": "seed:-1"},
        {**BASE, "format_version": 2},
        {"config": {"n": 3, "t": 1}},
        {**BASE, "config": {"n": 3}},
        {**BASE, "inputs": [{"time": "3", "process": 1}]},
        [],
    ])
    def test_rejects(self, doc):
        with pytest.raises(FormatError):
            scenario_from_json(doc)

    def test_validation_errors(self):
        with pytest.raises(ValidationError, match="t < n-1"):
            scenario_from_json({**BASE, "config": {"n": 3, "t": 2}})
        with pytest.raises(ValidationError):
            scenario_from_json({**BASE, "failures": [{"process": 1, "crash_round": 1}, {"process": 2, "crash_round": 1}]})

    @settings(max_examples=50, deadline=None)
    @given(scenarios())
    def test_explicit_round_trip(self, s):
        sf = ScenarioFile.from_scenario(s)
        back = scenario_from_json(json.loads(json.dumps(sf.to_json()))).scenario
        assert back == s


class TestTraces:
    def test_round_trip(self):
        s = Scenario(Config(3, 1), FailurePattern.of((2, 2, {1})), InputPattern.of([(3, 1)]), length=8)
        tr = run(s)
        text = dumps_trace(tr)
        assert loads_trace(text) == tr
        assert dumps_trace(loads_trace(text)) == text

    def test_header_first(self):
        lines = dumps_trace(run(Scenario(Config(3, 1), length=2))).splitlines()
        assert json.loads(lines[0])["kind"] == "trace"
        assert [json.loads(ln)["k"] for ln in lines[1:]] == [0, 1, 2]
        assert set(json.loads(lines[2])) >= {"k", "states", "horz", "fires", "delivered"}

    @settings(max_examples=30, deadline=None)
    @given(scenarios())
    def test_round_trip_property(self, s):
        tr = run(s)
        assert loads_trace(dumps_trace(tr)) == tr

    def test_malformed(self):
        text = dumps_trace(run(Scenario(Config(3, 1), length=3)))
        lines = text.splitlines()
        with pytest.raises(FormatError):
            loads_trace("")
        with pytest.raises(FormatError):
            loads_trace("\n".join(lines[1:]))
        with pytest.raises(FormatError):
            loads_trace("\n".join([lines[0]] + lines[2:]))
        with pytest.raises(FormatError):
            loads_trace(text + "{not json\n")
        bad = json.loads(lines[2])
        bad["extra"] = 1
        with pytest.raises(FormatError):
            loads_trace("\n".join(lines[:2] + [json.dumps(bad)] + lines[3:]))
