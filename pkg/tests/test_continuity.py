"""Continuity derivations: shapes forced by the syntax, explain output,
and failure paths for bodies outside the fragment."""

from mfx.continuity import (ContinuityFailure, Derivation, Rule,
                            check_continuous, explain)
from mfx.syntax import (Bind, FunDef, If, NAT, PBin, PCall, PNat, PVar,
                        Return, SelfCall, parse_program)

L, B, C, R, I, CA = Rule.LAM, Rule.BIND, Rule.CONST, Rule.REC, Rule.IF, Rule.CASE


def shape(d: Derivation):
    return (d.rule, tuple(shape(c) for c in d.children))


class TestDerivations:
    def test_trace_derivation_is_six_steps(self, trace_prog):
        d = check_continuous(trace_prog.fun_def("trace"))
        assert d.rule_sequence() == [L, I, C, B, R, C]
        assert d.size() == 6
        assert shape(d) == (L, ((I, ((C, ()), (B, ((R, ()), (C, ()))))),))

    def test_constant_body(self):
        prog = parse_program("option fun k(n : nat) : nat = return 0")
        d = check_continuous(prog.fun_def("k"))
        assert shape(d) == (L, ((C, ()),))

    def test_occurs_shape(self, occurs_prog):
        d = check_continuous(occurs_prog.fun_def("occurs"))
        # Hand-run of the syntax-directed rules on the occurs source.
        expected = (L, ((B, (
            (C, ()),
            (CA, (
                (I, ((C, ()), (CA, ((C, ()), (R, ()))))),
                (C, ()),
                (B, ((R, ()), (I, ((C, ()), (R, ()))))),
            )),
        )),))
        assert shape(d) == expected

    def test_traverse_shape(self, traverse_prog):
        d = check_continuous(traverse_prog.fun_def("traverse"))
        assert shape(d) == (L, ((CA, (
            (C, ()),
            (B, ((C, ()), (B, ((R, ()), (C, ()))))),
        )),))

    def test_deterministic(self, occurs_prog):
        f = occurs_prog.fun_def("occurs")
        assert check_continuous(f) == check_continuous(f)

    def test_rec_nodes_are_selfcalls(self, occurs_prog):
        d = check_continuous(occurs_prog.fun_def("occurs"))

        def walk(node):
            if node.rule is Rule.REC:
                assert isinstance(node.subject, SelfCall)
                assert node.children == ()
            for c in node.children:
                walk(c)

        walk(d)

    def test_const_nodes_have_no_selfcall(self, trace_prog):
        d = check_continuous(trace_prog.fun_def("trace"))

        def has_selfcall(e):
            if isinstance(e, SelfCall):
                return True
            if isinstance(e, Bind):
                return has_selfcall(e.head) or has_selfcall(e.body)
            if isinstance(e, If):
                return has_selfcall(e.then) or has_selfcall(e.els)
            return False

        def walk(node):
            if node.rule is Rule.CONST:
                assert not has_selfcall(node.subject)
                assert node.children == ()
            for c in node.children:
                walk(c)

        walk(d)


class TestCompleteness:
    def test_every_wellformed_program_checks(self):
        sources = [
            "option fun f(n : nat) : nat = if n < 3 then return n else f(n - 1)",
            """
            option fun g(n : nat) : nat = return (n + 1)
            option fun f(n : nat) : nat =
              do x <- g(n); if x = 0 then return 0 else f(x - 1) done
            """,
            """
            heap fun f(r : ref nat) : nat =
              do x <- !r; r := x + 1; if x = 0 then return 0 else f(r) done
            """,
            """
            heap fun f(n : nat) : ref nat =
              do r <- ref n; if n = 0 then return r else f(n - 1) done
            """,
        ]
        for src in sources:
            prog = parse_program(src)
            d = check_continuous(prog.fun_defs[-1])
            assert isinstance(d, Derivation), src


class TestFailures:
    def test_selfcall_inside_pure_argument(self):
        # Bypass the parser: f(n) = do t <- f(f(n) + 1); return t done
        bad_arg = PBin("+", PCall("f", (PVar("n"),)), PNat(1))
        body = If(PBin("=", PVar("n"), PNat(0)),
                  Return(PNat(0)),
                  Bind("t", SelfCall((bad_arg,)), Return(PVar("t"))))
        f = FunDef("f", (("n", NAT),), NAT, "option", body)
        d = check_continuous(f)
        assert isinstance(d, ContinuityFailure)
        assert d.location == "body.else.bind.arg0"
        assert "pure" in d.reason

    def test_selfcall_inside_return(self):
        body = Return(PCall("f", (PVar("n"),)))
        f = FunDef("f", (("n", NAT),), NAT, "option", body)
        d = check_continuous(f)
        assert isinstance(d, ContinuityFailure)
        assert d.location == "body.ret"


class TestExplain:
    def test_lam_const(self):
        prog = parse_program("option fun k(n : nat) : nat = return 0")
        text = explain(check_continuous(prog.fun_def("k")), "k")
        lines = text.splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("(Lam)")
        assert lines[1].strip().startswith("(Const)")

    def test_trace_explain_order(self, trace_prog):
        text = explain(check_continuous(trace_prog.fun_def("trace")), "trace")
        names = [line.strip().split(" ")[0] for line in text.splitlines()]
        assert names == ["(Lam)", "(If)", "(Const)", "(Bind)", "(Rec)", "(Const)"]

    def test_stable_across_runs(self, occurs_prog):
        f = occurs_prog.fun_def("occurs")
        a = explain(check_continuous(f), "occurs")
        b = explain(check_continuous(f), "occurs")
        assert a == b
