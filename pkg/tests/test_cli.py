"""Command-line behavior: exit codes, golden outputs, and flag handling.

Every (command x corpus example) pair has a frozen golden file; comparison
is byte-exact.
"""

from pathlib import Path

import pytest

from mfx.cli import main
from mfx.corpus import corpus_path

GOLDEN = Path(__file__).parent / "golden"


def corpus(name: str) -> str:
    return str(corpus_path(name))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


GOLDEN_CASES = [
    # (golden file, expected exit code, argv)
    ("check_trace_explain.txt", 0,
     ["check", corpus("trace.mfx"), "--explain"]),
    ("check_traverse_explain.txt", 0,
     ["check", corpus("traverse.mfx"), "--explain"]),
    ("check_occurs_explain.txt", 0,
     ["check", corpus("occurs.mfx"), "--explain"]),
    ("check_occurs_json.txt", 0,
     ["check", corpus("occurs.mfx"), "--json"]),
    ("eval_trace_6.txt", 0,
     ["eval", corpus("trace.mfx"), "--fun", "trace", "--args", "6"]),
    ("eval_traverse_acyclic.txt", 0,
     ["eval", corpus("traverse.mfx"), "--fun", "traverse",
      "--args", "Node(1, ref0)", "--heap", corpus("acyclic.heap")]),
    ("eval_occurs_shared.txt", 0,
     ["eval", corpus("occurs.mfx"), "--fun", "occurs",
      "--args", "ref0 ref3", "--heap", corpus("shared.heap")]),
    ("eval_traverse_cyclic.txt", 2,
     ["eval", corpus("traverse.mfx"), "--fun", "traverse",
      "--args", "Node(7, ref0)", "--heap", corpus("cyclic.heap")]),
    ("eval_occurs_cyclic.txt", 2,
     ["eval", corpus("occurs.mfx"), "--fun", "occurs",
      "--args", "ref0 ref1", "--heap", corpus("cyclic_term.heap")]),
    ("approx_trace_6.txt", 0,
     ["approx", corpus("trace.mfx"), "--fun", "trace", "--args", "6",
      "--max-fuel", "6"]),
    ("approx_traverse.txt", 0,
     ["approx", corpus("traverse.mfx"), "--fun", "traverse",
      "--args", "Node(1, ref0)", "--heap", corpus("acyclic.heap"),
      "--max-fuel", "4"]),
    ("induct_trace.txt", 0,
     ["induct", corpus("trace.mfx"), "--fun", "trace"]),
    ("induct_traverse.txt", 0,
     ["induct", corpus("traverse.mfx"), "--fun", "traverse"]),
    ("induct_occurs.txt", 0,
     ["induct", corpus("occurs.mfx"), "--fun", "occurs"]),
    ("induct_trace_raw.txt", 0,
     ["induct", corpus("trace.mfx"), "--fun", "trace", "--raw"]),
    ("induct_trace_json.txt", 0,
     ["induct", corpus("trace.mfx"), "--fun", "trace", "--json"]),
    ("audit_trace_correct.txt", 0,
     ["audit", corpus("trace.mfx"), "--fun", "trace",
      "--q", corpus("trace_q_correct.mfx"), "--nat-max", "32"]),
    ("audit_trace_wrong.txt", 3,
     ["audit", corpus("trace.mfx"), "--fun", "trace",
      "--q", corpus("trace_q_wrong.mfx"), "--nat-max", "32"]),
]


class TestGolden:
    @pytest.mark.parametrize("golden,code,argv",
                             GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
    def test_golden(self, capsys, golden, code, argv):
        got_code, out, _ = run(capsys, *argv)
        assert got_code == code
        assert out == (GOLDEN / golden).read_text(encoding="utf-8")

    def test_outputs_are_deterministic(self, capsys):
        argv = ["induct", corpus("occurs.mfx"), "--fun", "occurs"]
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b


class TestExitCodes:
    def test_static_error_is_1(self, capsys, tmp_path):
        bad = tmp_path / "bad.mfx"
        bad.write_text("option fun f(n : nat) : nat = return m")
        code, out, err = run(capsys, "check", str(bad))
        assert code == 1
        assert "unbound" in err

    def test_monad_error_is_1(self, capsys, tmp_path):
        bad = tmp_path / "bad.mfx"
        bad.write_text("option fun f(n : nat) : nat = return (f(n) + 1)")
        code, _, err = run(capsys, "check", str(bad))
        assert code == 1 and "pure position" in err

    def test_missing_file_is_1(self, capsys):
        code, _, err = run(capsys, "eval", "no_such_file.mfx",
                           "--fun", "f", "--args", "1")
        assert code == 1

    def test_usage_error_is_1(self, capsys):
        code, _, err = run(capsys, "eval", corpus("trace.mfx"))
        assert code == 1
        assert "usage" in err

    def test_unknown_function_is_1(self, capsys):
        code, _, err = run(capsys, "eval", corpus("trace.mfx"),
                           "--fun", "nope", "--args", "1")
        assert code == 1

    def test_ill_typed_args_rejected(self, capsys):
        code, _, err = run(capsys, "eval", corpus("trace.mfx"),
                           "--fun", "trace", "--args", "true")
        assert code == 1

    def test_heap_audit_rejected(self, capsys):
        code, _, err = run(capsys, "audit", corpus("occurs.mfx"),
                           "--fun", "occurs", "--q",
                           corpus("trace_q_correct.mfx"))
        assert code == 1 and "option-monad" in err


class TestFlags:
    def test_mfx_fuel_env(self, capsys, monkeypatch):
        monkeypatch.setenv("MFX_FUEL", "3")
        code, out, _ = run(capsys, "eval", corpus("trace.mfx"),
                           "--fun", "trace", "--args", "6")
        assert code == 2 and out == "Diverged(3)\n"

    def test_fuel_flag_overrides_env(self, capsys, monkeypatch):
        monkeypatch.setenv("MFX_FUEL", "3")
        code, out, _ = run(capsys, "eval", corpus("trace.mfx"),
                           "--fun", "trace", "--args", "6", "--fuel", "10")
        assert code == 0 and out == "OkPure([6])\n"

    def test_fun_defaults_when_unique(self, capsys):
        code, out, _ = run(capsys, "eval", corpus("traverse.mfx"),
                           "--args", "Empty")
        assert code == 0 and out == "Ok([], {; next=0})\n"

    def test_zero_domain_audit_vacuous(self, capsys):
        code, out, _ = run(capsys, "audit", corpus("trace.mfx"),
                           "--fun", "trace",
                           "--q", corpus("trace_q_wrong.mfx"),
                           "--nat-max", "-1", "--list-max-len", "0")
        assert code == 0
        assert "ObligationsHold" in out and "ConclusionHolds" in out

    def test_audit_json(self, capsys):
        import json

        code, out, _ = run(capsys, "audit", corpus("trace.mfx"),
                           "--fun", "trace",
                           "--q", corpus("trace_q_wrong.mfx"),
                           "--nat-max", "8")
        assert code == 3
        code, out, _ = run(capsys, "audit", corpus("trace.mfx"),
                           "--fun", "trace",
                           "--q", corpus("trace_q_wrong.mfx"),
                           "--nat-max", "8", "--json")
        assert code == 3
        j = json.loads(out)
        assert j["obligations_hold"] is False
        assert j["failed_obligation"] == 2

    def test_budget_flag(self, capsys):
        code, _, err = run(capsys, "audit", corpus("trace.mfx"),
                           "--fun", "trace",
                           "--q", corpus("trace_q_correct.mfx"),
                           "--nat-max", "32", "--budget", "10")
        assert code == 1 and "exceeded" in err
