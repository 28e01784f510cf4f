"""Evaluator semantics: frozen oracle values, approximant chains, the
fixed-point equation at desk scale, divergence, and the monad laws."""

import random

import pytest

from mfx.domain import (BOTTOM, EMPTY_HEAP, Heap, Ok, OkPure, VBool, VCtor,
                        VList, VNat, VRef, value_to_pexpr)
from mfx.errors import ChainViolation, DslTypeError
from mfx.evaluator import (Approximant, Diverged, approx_chain, eval_approx,
                           in_semantics, run_lfp, unfold_once)
from mfx.syntax import (Bind, FunDef, If, NAT, PBin, PNat, PVar, RefGet,
                        Return, TRef, parse_program)

from oracles import (occurs_in, random_node_arg, random_node_heap,
                     random_rtrm_heap, trace_ref, trace_value)


def node(x, rid):
    return VCtor("Node", (VNat(x), VRef(rid)))


EMPTY_NODE = VCtor("Empty", ())


class TestTrace:
    def test_fuel_zero_is_bottom(self, trace_prog):
        assert eval_approx(Approximant(trace_prog, "trace", 0),
                           (VNat(6),), EMPTY_HEAP) == BOTTOM

    def test_arg6_needs_fuel_4(self, trace_prog):
        # Oracle: 6 -> 3 -> 1 -> 0 with only 6 even, i.e. [6].
        assert trace_ref(6) == [6]
        for fuel in range(4):
            assert eval_approx(Approximant(trace_prog, "trace", fuel),
                               (VNat(6),), EMPTY_HEAP) == BOTTOM
        for fuel in (4, 5, 9):
            assert eval_approx(Approximant(trace_prog, "trace", fuel),
                               (VNat(6),), EMPTY_HEAP) == OkPure(trace_value(6))

    def test_chain_arg0(self, trace_prog):
        c = approx_chain(trace_prog, "trace", (VNat(0),), EMPTY_HEAP, 3)
        assert c.elems == (BOTTOM, OkPure(VList(())), OkPure(VList(())),
                           OkPure(VList(())))

    def test_against_oracle_up_to_64(self, trace_prog):
        for n in range(65):
            out = run_lfp(trace_prog, "trace", (VNat(n),), EMPTY_HEAP, 64)
            assert out == OkPure(trace_value(n)), n

    def test_option_mode_ignores_heap(self, trace_prog, acyclic_heap):
        out = run_lfp(trace_prog, "trace", (VNat(12),), acyclic_heap, 64)
        assert out == OkPure(trace_value(12))

    def test_arity_error(self, trace_prog):
        with pytest.raises(DslTypeError):
            eval_approx(Approximant(trace_prog, "trace", 3), (), EMPTY_HEAP)


class TestTraverse:
    def test_acyclic_list(self, traverse_prog, acyclic_heap):
        arg = node(1, 0)
        out = run_lfp(traverse_prog, "traverse", (arg,), acyclic_heap, 50)
        assert out == Ok(VList((VNat(1), VNat(2))), acyclic_heap)
        # Stabilizes exactly at fuel 3 (two nested recursive calls).
        assert eval_approx(Approximant(traverse_prog, "traverse", 2),
                           (arg,), acyclic_heap) == BOTTOM
        assert eval_approx(Approximant(traverse_prog, "traverse", 3),
                           (arg,), acyclic_heap) == Ok(VList((VNat(1), VNat(2))),
                                                       acyclic_heap)

    def test_cyclic_all_bottom(self, traverse_prog, cyclic_heap):
        c = approx_chain(traverse_prog, "traverse", (node(7, 0),), cyclic_heap, 16)
        assert all(o == BOTTOM for o in c)
        out = run_lfp(traverse_prog, "traverse", (node(7, 0),), cyclic_heap, 40)
        assert out == Diverged(40)


class TestOccurs:
    def test_shared_term_contains_var(self, occurs_prog, shared_heap):
        out = run_lfp(occurs_prog, "occurs", (VRef(0), VRef(3)), shared_heap, 50)
        assert out == Ok(VBool(True), shared_heap)
        assert occurs_in(shared_heap, 0, 3)

    def test_var_not_occurring(self, occurs_prog, shared_heap):
        out = run_lfp(occurs_prog, "occurs", (VRef(0), VRef(1)), shared_heap, 50)
        assert out == Ok(VBool(False), shared_heap)
        assert not occurs_in(shared_heap, 0, 1)

    def test_cyclic_term_diverges(self, occurs_prog, cyclic_term_heap):
        out = run_lfp(occurs_prog, "occurs", (VRef(0), VRef(1)),
                      cyclic_term_heap, 60)
        assert out == Diverged(60)


class TestSemantics:
    def test_traverse_triple(self, traverse_prog, acyclic_heap):
        y = VList((VNat(1), VNat(2)))
        assert in_semantics(traverse_prog, "traverse", (node(1, 0),),
                            acyclic_heap, acyclic_heap, y, 50)

    def test_wrong_value_or_heap(self, traverse_prog, acyclic_heap):
        assert not in_semantics(traverse_prog, "traverse", (node(1, 0),),
                                acyclic_heap, acyclic_heap, VList(()), 50)
        assert not in_semantics(traverse_prog, "traverse", (node(1, 0),),
                                acyclic_heap, EMPTY_HEAP,
                                VList((VNat(1), VNat(2))), 50)

    def test_cyclic_never_in_semantics(self, traverse_prog, cyclic_heap):
        assert not in_semantics(traverse_prog, "traverse", (node(7, 0),),
                                cyclic_heap, cyclic_heap, VList(()), 80)


class TestChainsAndFixpoint:
    def test_monotone_on_random_inputs(self, trace_prog, traverse_prog,
                                       occurs_prog):
        rng = random.Random(7)
        for _ in range(60):
            n = rng.randint(0, 200)
            c = approx_chain(trace_prog, "trace", (VNat(n),), EMPTY_HEAP, 16)
            assert c.is_chain()
        for _ in range(60):
            h = random_node_heap(rng)
            arg = random_node_arg(rng, h)
            c = approx_chain(traverse_prog, "traverse", (arg,), h, 16)
            assert c.is_chain()
        for _ in range(60):
            h = random_rtrm_heap(rng)
            r1, r2 = VRef(rng.randrange(h.next_id)), VRef(rng.randrange(h.next_id))
            c = approx_chain(occurs_prog, "occurs", (r1, r2), h, 16)
            assert c.is_chain()

    def test_unfolding_at_stabilization(self, trace_prog):
        # If F^i ⊥ = F^(i+1) ⊥ ≠ ⊥ then applying the body once more at
        # fuel i reproduces the outcome: fixp F = F (fixp F) at desk scale.
        for n in (0, 1, 6, 17, 32):
            c = approx_chain(trace_prog, "trace", (VNat(n),), EMPTY_HEAP, 24)
            stable = [i for i in range(24)
                      if c.elems[i] == c.elems[i + 1] != BOTTOM]
            assert stable
            i = stable[0]
            assert unfold_once(trace_prog, "trace", (VNat(n),), EMPTY_HEAP,
                               i) == c.elems[i]

    def test_chain_violation_detected(self):
        # A pathological program object cannot arise from the parser, so
        # simulate one by monkeypatching the order relation instead.
        prog = parse_program("option fun f(n : nat) : nat = "
                             "if n = 0 then return 0 else f(n - 1)")
        import mfx.evaluator as ev

        orig = ev.outcome_le
        ev.outcome_le = lambda a, b: False
        try:
            with pytest.raises(ChainViolation):
                approx_chain(prog, "f", (VNat(1),), EMPTY_HEAP, 2)
        finally:
            ev.outcome_le = orig

    def test_determinism(self, occurs_prog, shared_heap):
        a = eval_approx(Approximant(occurs_prog, "occurs", 9),
                        (VRef(0), VRef(3)), shared_heap)
        b = eval_approx(Approximant(occurs_prog, "occurs", 9),
                        (VRef(0), VRef(3)), shared_heap)
        assert a == b

    def test_extcall_runs_at_caller_fuel(self):
        prog = parse_program("""
        option fun count(n : nat) : nat =
          if n = 0 then return 0
          else do t <- count(n - 1); return (t + 1) done
        option fun wrap(n : nat) : nat = count(n)
        """)
        # count(3) stabilizes at fuel 4; the callee runs at the caller's
        # remaining budget, so wrap(3) stabilizes at the same index.
        assert run_lfp(prog, "count", (VNat(3),), EMPTY_HEAP, 10) == OkPure(VNat(3))
        assert eval_approx(Approximant(prog, "count", 3), (VNat(3),),
                           EMPTY_HEAP) == BOTTOM
        assert eval_approx(Approximant(prog, "wrap", 3), (VNat(3),),
                           EMPTY_HEAP) == BOTTOM
        assert eval_approx(Approximant(prog, "wrap", 4), (VNat(3),),
                           EMPTY_HEAP) == OkPure(VNat(3))


class TestHeapPrograms:
    def test_write_program(self):
        prog = parse_program("""
        heap fun bump(r : ref nat) : nat =
          do x <- !r; r := x + 1; return x done
        """)
        h = Heap(((0, VNat(41)),), 1)
        out = run_lfp(prog, "bump", (VRef(0),), h, 10)
        assert out == Ok(VNat(41), Heap(((0, VNat(42)),), 1))

    def test_alloc_program(self):
        prog = parse_program("""
        heap fun fresh(n : nat) : ref nat = ref n
        """)
        out = run_lfp(prog, "fresh", (VNat(9),), EMPTY_HEAP, 10)
        assert out == Ok(VRef(0), Heap(((0, VNat(9)),), 1))


class TestMonadLaws:
    """Left unit and associativity, observed through evaluation."""

    def _mk_fun(self, body, params=(("r", TRef(NAT)),)):
        return FunDef("frag", tuple(params), NAT, "heap", body)

    def _eval(self, body, h):
        prog = parse_program("heap fun dummy(n : nat) : nat = return n")
        f = self._mk_fun(body)
        prog = type(prog)(prog.data_decls, prog.pure_defs, prog.fun_defs + (f,))
        return run_lfp(prog, "frag", (VRef(0),), h, 10)

    def _random_frag(self, rng, depth=0):
        roll = rng.random()
        if depth > 2 or roll < 0.4:
            return Return(PBin("+", PVar("r2v"), PNat(rng.randint(0, 5)))) \
                if rng.random() < 0.3 and depth > 0 else Return(PNat(rng.randint(0, 9)))
        if roll < 0.6:
            return RefGet(PVar("r"))
        if roll < 0.8:
            return Bind("r2v", self._random_frag(rng, depth + 1),
                        self._random_frag(rng, depth + 1))
        return If(PBin("<", PNat(rng.randint(0, 4)), PNat(3)),
                  self._random_frag(rng, depth + 1),
                  self._random_frag(rng, depth + 1))

    def test_left_unit(self):
        rng = random.Random(11)
        h = Heap(((0, VNat(5)),), 1)
        for _ in range(200):
            v = VNat(rng.randint(0, 30))
            k_body = Return(PBin("+", PVar("x"), PNat(rng.randint(0, 9))))
            lhs = Bind("x", Return(value_to_pexpr(v)), k_body)
            # substitute v for x in the continuation
            from mfx.induction import subst_term

            rhs = Return(subst_term(k_body.value, {"x": value_to_pexpr(v)}))
            assert self._eval(lhs, h) == self._eval(rhs, h)

    def test_associativity(self):
        rng = random.Random(13)
        h = Heap(((0, VNat(5)),), 1)
        cases = 0
        for _ in range(200):
            a = self._random_frag(rng, 1)
            b = self._random_frag(rng, 1)
            c_ = Return(PBin("+", PVar("y"), PNat(1)))
            lhs = Bind("y", Bind("x", a, b), c_)
            rhs = Bind("x", a, Bind("y", b, c_))
            try:
                l, r = self._eval(lhs, h), self._eval(rhs, h)
            except KeyError:
                continue  # fragment used r2v unbound; skip
            assert l == r
            cases += 1
        assert cases >= 100

    def test_left_unit_with_heap_effects(self):
        h = Heap(((0, VNat(5)),), 1)
        v = VNat(3)
        k = Bind("w", RefGet(PVar("r")),
                 Return(PBin("+", PVar("x"), PVar("w"))))
        lhs = Bind("x", Return(value_to_pexpr(v)), k)
        from mfx.induction import subst_term

        rhs = Bind("w", RefGet(PVar("r")),
                   Return(PBin("+", value_to_pexpr(v), PVar("w"))))
        assert self._eval(lhs, h) == self._eval(rhs, h)
