import io
import json

import pytest

from firesquad.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main

GO = {"format_version": 1, "config": {"n": 3, "t": 1}, "inputs": [{"time": 3, "process": 1}],
      "initial_states": "canonical", "length": 10}
PHANTOM = {"format_version": 1, "config": {"n": 3, "t": 1}, "length": 10,
           "initial_states": {str(p): {"req": [0, 1, 0], "fail": [], "view": [0, 0]} for p in (1, 2, 3)}}
DOUBLE_LOUD = {"format_version": 1, "config": {"n": 4, "t": 2},
               "failures": [{"process": 3, "crash_round": 1, "blocked": [1, 2, 4]},
                            {"process": 4, "crash_round": 1, "blocked": [1, 2, 3]}]}


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def call(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


class TestRun:
    def test_go(self, tmp_path):
        code, text = call("run", write(tmp_path, "s.json", GO), "--verdict", "--format", "json")
        data = json.loads(text)
        assert code == EXIT_OK
        assert data["verdict"]["stab"] == 0 and data["fire_times"] == [5]

    def test_phantom_flagged_before_stab(self, tmp_path):
        code, text = call("run", write(tmp_path, "s.json", PHANTOM), "--verdict")
        assert code == EXIT_OK
        assert "stab: 2" in text and "before stabilization" in text

    def test_phantom_checked_from_zero(self, tmp_path):
        code, _ = call("run", write(tmp_path, "s.json", PHANTOM), "--from", 0)
        assert code == EXIT_VIOLATION

    def test_bad_config(self, tmp_path, capsys):
        doc = dict(GO, config={"n": 3, "t": 2})
        code, _ = call("run", write(tmp_path, "s.json", doc))
        assert code == EXIT_USAGE
        assert "t < n-1" in capsys.readouterr().err

    def test_parse_error(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text("{")
        assert call("run", path)[0] == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        assert call("run", tmp_path / "nope.json")[0] == EXIT_USAGE

    def test_bad_flag(self):
        assert call("run")[0] == EXIT_USAGE

    def test_deterministic_output(self, tmp_path):
        path = write(tmp_path, "s.json", dict(GO, initial_states="seed:99"))
        a = call("run", path, "--verdict", "--trace", tmp_path / "a.jsonl")
        b = call("run", path, "--verdict", "--trace", tmp_path / "b.jsonl")
        assert a == b
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


class TestOracle:
    def test_no_failures(self, tmp_path):
        path = write(tmp_path, "f.json", [])
        code, text = call("oracle", path, "--n", 4, "--t", 2, "--format", "json")
        assert code == EXIT_OK and json.loads(text)["bb0"] == 3

    def test_double_loud(self, tmp_path):
        code, text = call("oracle", write(tmp_path, "f.json", DOUBLE_LOUD), "--horizon", 5)
        assert code == EXIT_OK
        assert "publication time of 0: 2" in text and "first clean round: 2" in text

    def test_silent_clean_column(self, tmp_path):
        path = write(tmp_path, "f.json", [{"process": 3, "crash_round": 2, "blocked": []}])
        code, text = call("oracle", path, "--n", 3, "--t", 1, "--format", "json")
        clean = [r["clean"] for r in json.loads(text)["records"]]
        assert clean[:4] == [None, True, True, False]

    def test_needs_config(self, tmp_path):
        assert call("oracle", write(tmp_path, "f.json", []))[0] == EXIT_USAGE


class TestCheck:
    def test_golden_round_trip(self, tmp_path):
        trace = tmp_path / "t.jsonl"
        _, ran = call("run", write(tmp_path, "s.json", GO), "--verdict", "--trace", trace, "--format", "json")
        code, checked = call("check", trace, "--format", "json")
        assert code == EXIT_OK
        assert json.loads(checked)["verdict"] == json.loads(ran)["verdict"]

    def test_deleted_fire(self, tmp_path):
        trace = tmp_path / "t.jsonl"
        call("run", write(tmp_path, "s.json", GO), "--trace", trace)
        lines = trace.read_text().splitlines()
        rec = json.loads(lines[6])
        assert rec["k"] == 5 and rec["fires"] == [1, 2, 3]
        rec["fires"] = [1, 2]
        lines[6] = json.dumps(rec)
        trace.write_text("\n".join(lines) + "\n")
        code, text = call("check", trace)
        assert code == EXIT_VIOLATION
        assert "simultaneity at 5" in text and "[3]" in text

    def test_malformed(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text('{"kind": "trace"}\n')
        assert call("check", path)[0] == EXIT_USAGE


class TestSweep:
    def test_small_sweep(self, tmp_path):
        spec = {"n": 3, "t": 1, "max_crash_round": 1, "uniform_states": False,
                "random_states": 1, "run_length": 8, "input_policies": ["none", "one_go"]}
        report = tmp_path / "r.json"
        code, text = call("sweep", write(tmp_path, "sw.json", spec), "--seed", 5, "--report", report)
        data = json.loads(report.read_text())
        assert data["spec"]["seed"] == 5
        assert data["invariants"]["stab_within_t_plus_1"]["violations"] == 0
        assert code == (EXIT_OK if not any(v["violations"] for v in data["invariants"].values()) else EXIT_VIOLATION)
        assert "scenarios=" in text

    def test_counterexamples_are_scenarios(self, tmp_path):
        from firesquad.fileformat import scenario_from_json

        spec = {"n": 3, "t": 1, "max_crash_round": 1, "uniform_states": False, "random_states": 2,
                "run_length": 8, "variant": "no_monotone_repair", "witnesses": False}
        report = tmp_path / "r.json"
        code, _ = call("sweep", write(tmp_path, "sw.json", spec), "--report", report)
        assert code == EXIT_VIOLATION
        for cx in json.loads(report.read_text())["counterexamples"]:
            scenario_from_json(cx["scenario"])

    def test_bad_spec(self, tmp_path):
        assert call("sweep", write(tmp_path, "sw.json", {"n": 3}))[0] == EXIT_USAGE
        assert call("sweep", write(tmp_path, "sw.json", {"n": 3, "t": 1, "x": 0}))[0] == EXIT_USAGE
