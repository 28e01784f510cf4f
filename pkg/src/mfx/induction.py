"""Partial-correctness induction rules: the raw fixed-point instance and its
refinement into per-control-path obligations.

The raw rule for an option-monad definition f with functional F is

    (⋀f x y. (⋀z r. f(z) = Some(r) ⟹ Q(z, r)) ⟹ F f x = Some(y) ⟹ Q(x, y))
    ─────────────────────────────────────────────────────────────────────────
    f(x) = Some(y) ⟹ Q(x, y)

with the heap-monad analogue phrased through the semantics relation,
(h, h', y) ∈ ⟦f(x)⟧, and Q taking the heap before and after the computation:
Q(x, h, h', y).  The admissibility of the partial-correctness instance is a
fixed lemma of the system and is not re-proved per function.

Refinement decomposes the body premise along every root-to-leaf path of the
if/case structure:

  1. binds split into an equation for the head and a continuation; returns
     contribute value equations; conditionals and case splits contribute
     (negated) conditions and constructor equations; heap primitives become
     explicit-heap equations, with h' = h collapsed for reads;
  2. recursive-call equations become specialized hypotheses Q(...), after
     which the general hypothesis is discarded;
  3. equations v = t with v a quantified variable are substituted away.

Rule terms reuse the pure-expression syntax; heap applications appear as
calls of the reserved names ``get_ref``, ``set_ref``, and ``new_ref_with``.

check_rule_sampled is a desk-scale audit, not a prover: it enumerates the
quantified variables of each obligation over small bounded domains and,
independently, brute-forces the rule's conclusion against an executable
predicate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .continuity import ContinuityFailure, Derivation, Rule, check_continuous
from .domain import (EMPTY_HEAP, Heap, Ok, OkPure, Value, VBool, VCtor,
                     VList, VNat, VNone, VRef, VSome, VUnit, heap_alloc,
                     heap_closed, heap_get, heap_set)
from .errors import BudgetExceeded, DanglingRef, MfxError, NotContinuous
from .evaluator import eval_pure, run_lfp
from .syntax import (Bind, Case, Expr, ExtCall, FunDef, If, PBin, PBool,
                     PCall, PCons, PCtor, PExpr, PNat, PNil, PNone, PNot,
                     PRefLit, PSome, PUnit, PVar, Pattern, Program, RefGet,
                     RefNew, RefSet, Return, SelfCall, THeap, TList, TData,
                     TNat, TBool, TUnit, TOption, TRef, Type, TVar, UNIT,
                     HEAP, _pexpr_children, pretty_expr_named, pretty_pexpr)

# Reserved function names for explicit-heap applications in rule terms.
HEAP_FUNS = ("get_ref", "set_ref", "new_ref_with")

Term = PExpr  # rule terms are pure expressions plus reserved heap calls


# ---------------------------------------------------------------------------
# Premises, obligations, rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Premise:
    pass


@dataclass(frozen=True)
class GeneralHyp(Premise):
    """The unspecialized induction hypothesis of the raw rule."""

    fun_var: str


@dataclass(frozen=True)
class BodyEq(Premise):
    """Option-monad raw body premise: ⟨body⟩ = Some(result)."""

    body: Expr
    result: Term


@dataclass(frozen=True)
class BodySem(Premise):
    """Heap-monad raw body premise: (pre, post, result) ∈ ⟦body⟧."""

    pre: Term
    post: Term
    result: Term
    body: Expr


@dataclass(frozen=True)
class OptEq(Premise):
    """Residue of a call of an earlier option function: f(args) = Some(r)."""

    fun: str
    args: tuple[Term, ...]
    result: Term


@dataclass(frozen=True)
class SemTriple(Premise):
    """Residue of a call of an earlier heap function:
    (pre, post, result) ∈ ⟦fun(args)⟧."""

    pre: Term
    post: Term
    result: Term
    fun: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class PureEq(Premise):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class PureCond(Premise):
    cond: Term
    positive: bool = True


@dataclass(frozen=True)
class HeapNew(Premise):
    """(ref, post) = new_ref_with(value, pre); allocation is the one heap
    step whose equation binds a pair, so it is never substituted away."""

    ref: Term
    post: Term
    value: Term
    pre: Term


@dataclass(frozen=True)
class Hyp(Premise):
    """An application of the property Q; also the shape of conclusions.

    Heap mode carries the heap before and after: Q(args..., pre, post, result).
    """

    args: tuple[Term, ...]
    result: Term
    pre: Optional[Term] = None
    post: Optional[Term] = None


@dataclass(frozen=True)
class Obligation:
    vars: tuple[tuple[str, Optional[Type]], ...]
    premises: tuple[Premise, ...]
    conclusion: Hyp


@dataclass(frozen=True)
class InductionRule:
    function: str
    monad: str
    kind: str  # "raw" | "refined"
    params: tuple[tuple[str, Type], ...]
    result_type: Type
    obligations: tuple[Obligation, ...]
    fundef: Optional[FunDef] = field(default=None, compare=False, repr=False)
    program: Optional[Program] = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Term utilities
# ---------------------------------------------------------------------------


def term_vars(t: Term) -> set[str]:
    if isinstance(t, PVar):
        return {t.name}
    out: set[str] = set()
    for c in _pexpr_children(t):
        out |= term_vars(c)
    return out


def subst_term(t: Term, sub: dict[str, Term]) -> Term:
    if isinstance(t, PVar):
        return sub.get(t.name, t)
    if isinstance(t, PCons):
        return replace(t, head=subst_term(t.head, sub), tail=subst_term(t.tail, sub))
    if isinstance(t, PSome):
        return replace(t, arg=subst_term(t.arg, sub))
    if isinstance(t, (PCtor, PCall)):
        return replace(t, args=tuple(subst_term(a, sub) for a in t.args))
    if isinstance(t, PBin):
        return replace(t, lhs=subst_term(t.lhs, sub), rhs=subst_term(t.rhs, sub))
    if isinstance(t, PNot):
        return replace(t, arg=subst_term(t.arg, sub))
    return t


def _subst_opt(t: Optional[Term], sub) -> Optional[Term]:
    return None if t is None else subst_term(t, sub)


def subst_premise(p: Premise, sub: dict[str, Term]) -> Premise:
    if isinstance(p, (GeneralHyp, BodyEq, BodySem)):
        return p  # raw premises are never refined in place
    if isinstance(p, OptEq):
        return replace(p, args=tuple(subst_term(a, sub) for a in p.args),
                       result=subst_term(p.result, sub))
    if isinstance(p, SemTriple):
        return replace(p, pre=subst_term(p.pre, sub), post=subst_term(p.post, sub),
                       result=subst_term(p.result, sub),
                       args=tuple(subst_term(a, sub) for a in p.args))
    if isinstance(p, PureEq):
        return replace(p, lhs=subst_term(p.lhs, sub), rhs=subst_term(p.rhs, sub))
    if isinstance(p, PureCond):
        return replace(p, cond=subst_term(p.cond, sub))
    if isinstance(p, HeapNew):
        return replace(p, ref=subst_term(p.ref, sub), post=subst_term(p.post, sub),
                       value=subst_term(p.value, sub), pre=subst_term(p.pre, sub))
    if isinstance(p, Hyp):
        return replace(p, args=tuple(subst_term(a, sub) for a in p.args),
                       result=subst_term(p.result, sub),
                       pre=_subst_opt(p.pre, sub), post=_subst_opt(p.post, sub))
    raise AssertionError(p)


def premise_vars(p: Premise) -> set[str]:
    if isinstance(p, GeneralHyp):
        return {p.fun_var}
    if isinstance(p, BodyEq):
        return term_vars(p.result)
    if isinstance(p, BodySem):
        return term_vars(p.pre) | term_vars(p.post) | term_vars(p.result)
    if isinstance(p, OptEq):
        return set().union(*map(term_vars, p.args), term_vars(p.result)) \
            if p.args else term_vars(p.result)
    if isinstance(p, SemTriple):
        out = term_vars(p.pre) | term_vars(p.post) | term_vars(p.result)
        for a in p.args:
            out |= term_vars(a)
        return out
    if isinstance(p, PureEq):
        return term_vars(p.lhs) | term_vars(p.rhs)
    if isinstance(p, PureCond):
        return term_vars(p.cond)
    if isinstance(p, HeapNew):
        return term_vars(p.ref) | term_vars(p.post) | term_vars(p.value) \
            | term_vars(p.pre)
    if isinstance(p, Hyp):
        out = term_vars(p.result)
        for a in p.args:
            out |= term_vars(a)
        if p.pre is not None:
            out |= term_vars(p.pre)
        if p.post is not None:
            out |= term_vars(p.post)
        return out
    raise AssertionError(p)


# ---------------------------------------------------------------------------
# Typing support for refinement
# ---------------------------------------------------------------------------


class _ProgramTables:
    """Adapter exposing a Program through the parser's symbol-table shape so
    the syntax module's type checker can be reused during refinement."""

    def __init__(self, program: Program):
        self.datatypes = {d.name: d for d in program.data_decls}
        self.ctors = {c.name: (d.name, c)
                      for d in program.data_decls for c in d.ctors}
        self.pure_funs = {d.name: d for d in program.pure_defs}
        self.monadic_funs = {d.name: d for d in program.fun_defs}


def _typer(program: Program, fundef: FunDef):
    from .syntax import _FunTypeCheck

    tc = _FunTypeCheck(_ProgramTables(program))
    tc.fun = fundef
    return tc


# ---------------------------------------------------------------------------
# Raw rule
# ---------------------------------------------------------------------------


def _bound_names(e: Expr) -> set[str]:
    if isinstance(e, Bind):
        return {e.var} | _bound_names(e.head) | _bound_names(e.body)
    if isinstance(e, If):
        return _bound_names(e.then) | _bound_names(e.els)
    if isinstance(e, Case):
        out: set[str] = set()
        for pat, body in e.branches:
            out |= set(pat.vars) | _bound_names(body)
        return out
    return set()


class _Fresh:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)

    def clone(self) -> "_Fresh":
        return _Fresh(self.taken)

    def value(self, base: str) -> str:
        if base not in self.taken:
            self.taken.add(base)
            return base
        k = 1
        while f"{base}{k}" in self.taken:
            k += 1
        self.taken.add(f"{base}{k}")
        return f"{base}{k}"

    def heap(self) -> str:
        name = "h"
        while name in self.taken:
            name += "'"
        self.taken.add(name)
        return name


def raw_rule(f: FunDef, program: Optional[Program] = None) -> InductionRule:
    """The single-obligation partial-correctness instance for ``f``.

    Requires the continuity derivation to exist; raises NotContinuous
    otherwise.  The admissibility side condition is discharged once and for
    all by the fixed partial-correctness lemma.
    """
    d = check_continuous(f)
    if isinstance(d, ContinuityFailure):
        raise NotContinuous(f"{f.name}: {d}")
    taken = {f.name} | {p for p, _ in f.params} | _bound_names(f.body)
    fresh = _Fresh(taken)
    y = fresh.value("y")
    param_terms = tuple(PVar(p) for p, _ in f.params)
    vars_: list[tuple[str, Optional[Type]]] = [(f.name, None)]
    vars_ += [(p, t) for p, t in f.params]
    if f.monad == "heap":
        h, h2 = fresh.heap(), fresh.heap()
        vars_ += [(h, HEAP), (h2, HEAP), (y, f.result_type)]
        premises: tuple[Premise, ...] = (
            GeneralHyp(f.name),
            BodySem(PVar(h), PVar(h2), PVar(y), f.body))
        conclusion = Hyp(param_terms, PVar(y), PVar(h), PVar(h2))
    else:
        vars_ += [(y, f.result_type)]
        premises = (GeneralHyp(f.name), BodyEq(f.body, PVar(y)))
        conclusion = Hyp(param_terms, PVar(y))
    ob = Obligation(tuple(vars_), premises, conclusion)
    return InductionRule(f.name, f.monad, "raw", f.params, f.result_type,
                         (ob,), fundef=f, program=program)


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------


def _pattern_term(pat: Pattern) -> Term:
    if pat.ctor == "None":
        return PNone()
    if pat.ctor == "Some":
        return PSome(PVar(pat.vars[0]))
    return PCtor(pat.ctor, tuple(PVar(v) for v in pat.vars))


def refine(rule: InductionRule, derivation: Derivation) -> InductionRule:
    """Decompose a raw rule into one obligation per control-flow path.

    The derivation must be the continuity derivation of the same function;
    it witnesses that the body stays within the supported fragment.
    """
    if rule.kind != "raw":
        raise MfxError("refine expects a raw rule")
    f = rule.fundef
    if f is None:
        raise MfxError("this rule lost its definition (e.g. loaded from JSON) "
                       "and cannot be refined")
    if derivation.rule is not Rule.LAM or derivation.subject != f.body:
        raise MfxError("derivation does not match the function body")
    program = rule.program or Program(fun_defs=(f,))
    tc = _typer(program, f)
    is_heap = f.monad == "heap"
    obligations = []

    def walk(e: Expr, konts: tuple[tuple[str, Expr], ...], heap: Optional[Term],
             premises: tuple[Premise, ...],
             vars_: tuple[tuple[str, Optional[Type]], ...],
             env: dict[str, Type], fresh: _Fresh):
        def finish(result: Term, post: Optional[Term]):
            concl = Hyp(tuple(PVar(p) for p, _ in f.params), result,
                        PVar(h0) if is_heap else None, post)
            obligations.append(_cleanup(Obligation(vars_, premises, concl)))

        if isinstance(e, Bind):
            walk(e.head, ((e.var, e.body),) + konts, heap, premises, vars_, env, fresh)
            return
        if isinstance(e, If):
            # Sibling paths get independently named intermediates.
            walk(e.then, konts, heap, premises + (PureCond(e.cond, True),),
                 vars_, env, fresh.clone())
            walk(e.els, konts, heap, premises + (PureCond(e.cond, False),),
                 vars_, env, fresh.clone())
            return
        if isinstance(e, Case):
            scrut_ty = tc.infer(e.scrutinee, env)
            for pat, body in e.branches:
                binds = tc._pattern_env(pat, scrut_ty)
                pvars = tuple((v, binds[v]) for v in pat.vars)
                eq = PureEq(_pattern_term(pat), e.scrutinee)
                walk(body, konts, heap, premises + (eq,), vars_ + pvars,
                     {**env, **binds}, fresh.clone())
            return
        if isinstance(e, Return):
            if not konts:
                finish(e.value, heap)
                return
            (x, rest), rest_k = konts[0], konts[1:]
            ty = tc.infer(e.value, env)
            walk(rest, rest_k, heap,
                 premises + (PureEq(e.value, PVar(x)),),
                 vars_ + ((x, ty),), {**env, x: ty}, fresh)
            return
        if isinstance(e, SelfCall):
            rty = f.result_type
            x = konts[0][0] if konts else fresh.value("y")
            if is_heap:
                hpost = fresh.heap()
                hyp = Hyp(e.args, PVar(x), heap, PVar(hpost))
                newvars = vars_ + ((x, rty), (hpost, HEAP))
                if konts:
                    walk(konts[0][1], konts[1:], PVar(hpost),
                         premises + (hyp,), newvars, {**env, x: rty}, fresh)
                else:
                    concl = Hyp(tuple(PVar(p) for p, _ in f.params), PVar(x),
                                PVar(h0), PVar(hpost))
                    obligations.append(_cleanup(
                        Obligation(newvars, premises + (hyp,), concl)))
            else:
                hyp = Hyp(e.args, PVar(x))
                newvars = vars_ + ((x, rty),)
                if konts:
                    walk(konts[0][1], konts[1:], heap,
                         premises + (hyp,), newvars, {**env, x: rty}, fresh)
                else:
                    concl = Hyp(tuple(PVar(p) for p, _ in f.params), PVar(x))
                    obligations.append(_cleanup(
                        Obligation(newvars, premises + (hyp,), concl)))
            return
        if isinstance(e, ExtCall):
            callee = program.fun_def(e.name)
            rty = callee.result_type
            x = konts[0][0] if konts else fresh.value("y")
            if is_heap:
                hpost = fresh.heap()
                prem = SemTriple(heap, PVar(hpost), PVar(x), e.name, e.args)
                newvars = vars_ + ((x, rty), (hpost, HEAP))
                if konts:
                    walk(konts[0][1], konts[1:], PVar(hpost),
                         premises + (prem,), newvars, {**env, x: rty}, fresh)
                else:
                    concl = Hyp(tuple(PVar(p) for p, _ in f.params), PVar(x),
                                PVar(h0), PVar(hpost))
                    obligations.append(_cleanup(
                        Obligation(newvars, premises + (prem,), concl)))
            else:
                prem = OptEq(e.name, e.args, PVar(x))
                newvars = vars_ + ((x, rty),)
                if konts:
                    walk(konts[0][1], konts[1:], heap,
                         premises + (prem,), newvars, {**env, x: rty}, fresh)
                else:
                    concl = Hyp(tuple(PVar(p) for p, _ in f.params), PVar(x))
                    obligations.append(_cleanup(
                        Obligation(newvars, premises + (prem,), concl)))
            return
        if isinstance(e, RefGet):
            got = PCall("get_ref", (e.ref, heap))  # h' = h collapsed for reads
            if not konts:
                finish(got, heap)
                return
            (x, rest), rest_k = konts[0], konts[1:]
            rt = tc.infer(e.ref, env)
            ty = rt.elem
            walk(rest, rest_k, heap, premises + (PureEq(PVar(x), got),),
                 vars_ + ((x, ty),), {**env, x: ty}, fresh)
            return
        if isinstance(e, RefSet):
            newheap = PCall("set_ref", (e.ref, e.value, heap))
            if not konts:
                finish(PUnit(), newheap)
                return
            (x, rest), rest_k = konts[0], konts[1:]
            walk(rest, rest_k, newheap, premises + (PureEq(PVar(x), PUnit()),),
                 vars_ + ((x, UNIT),), {**env, x: UNIT}, fresh)
            return
        if isinstance(e, RefNew):
            vty = tc.infer(e.value, env)
            hpost = fresh.heap()
            r = konts[0][0] if konts else fresh.value("r")
            prem = HeapNew(PVar(r), PVar(hpost), e.value, heap)
            newvars = vars_ + ((r, TRef(vty)), (hpost, HEAP))
            if not konts:
                concl = Hyp(tuple(PVar(p) for p, _ in f.params), PVar(r),
                            PVar(h0), PVar(hpost))
                obligations.append(_cleanup(
                    Obligation(newvars, premises + (prem,), concl)))
                return
            walk(konts[0][1], konts[1:], PVar(hpost), premises + (prem,),
                 newvars, {**env, r: TRef(vty)}, fresh)
            return
        raise AssertionError(e)

    taken = {f.name} | {p for p, _ in f.params} | _bound_names(f.body)
    fresh0 = _Fresh(taken)
    h0 = fresh0.heap() if is_heap else None
    base_vars: tuple[tuple[str, Optional[Type]], ...] = tuple(f.params)
    if is_heap:
        base_vars = base_vars + ((h0, HEAP),)
    env0 = {p: t for p, t in f.params}
    walk(f.body, (), PVar(h0) if is_heap else None, (), base_vars, env0, fresh0)

    refined = InductionRule(rule.function, rule.monad, "refined", rule.params,
                            rule.result_type, tuple(obligations),
                            fundef=f, program=rule.program)
    _assert_wellformed(refined)
    return refined


def _cleanup(ob: Obligation) -> Obligation:
    """Step 3: substitute equations v = t with v quantified, drop them, and
    drop quantified variables that no longer occur."""
    var_names = [n for n, _ in ob.vars]
    premises = list(ob.premises)
    conclusion = ob.conclusion

    def try_solve(lhs: Term, rhs: Term) -> Optional[tuple[str, Term]]:
        # Prefer eliminating a variable on the right (pattern and return
        # equations put the defined variable there), then on the left
        # (explicit-heap equations).
        if isinstance(rhs, PVar) and rhs.name in var_names \
                and rhs.name not in term_vars(lhs):
            return rhs.name, lhs
        if isinstance(lhs, PVar) and lhs.name in var_names \
                and lhs.name not in term_vars(rhs):
            return lhs.name, rhs
        return None

    changed = True
    while changed:
        changed = False
        for i, p in enumerate(premises):
            solved = None
            if isinstance(p, PureEq):
                solved = try_solve(p.lhs, p.rhs)
            elif isinstance(p, PureCond) and p.positive \
                    and isinstance(p.cond, PBin) and p.cond.op == "=":
                solved = try_solve(p.cond.lhs, p.cond.rhs)
            if solved is None:
                continue
            v, t = solved
            sub = {v: t}
            premises = [subst_premise(q, sub) for q in premises[:i]] + \
                [subst_premise(q, sub) for q in premises[i + 1:]]
            conclusion = subst_premise(conclusion, sub)
            var_names.remove(v)
            changed = True
            break

    used: set[str] = premise_vars(conclusion)
    for p in premises:
        used |= premise_vars(p)
    vars_ = tuple((n, t) for n, t in ob.vars if n in var_names and n in used)
    return Obligation(vars_, tuple(premises), conclusion)


def _assert_wellformed(rule: InductionRule):
    """Substitution safety: every variable in a refined obligation is
    quantified, and the defined function's name never survives."""
    for ob in rule.obligations:
        names = {n for n, _ in ob.vars}
        mentioned = premise_vars(ob.conclusion)
        for p in ob.premises:
            mentioned |= premise_vars(p)
            if isinstance(p, (GeneralHyp, BodyEq, BodySem)):
                raise MfxError("raw premise survived refinement")
            if isinstance(p, (OptEq, SemTriple)) and p.fun == rule.function:
                raise MfxError("defined function survived refinement")
        stray = mentioned - names
        if stray:
            raise MfxError(f"unquantified variables in obligation: {sorted(stray)}")


def refined_rule(f: FunDef, program: Optional[Program] = None) -> InductionRule:
    """Convenience: raw_rule followed by refine."""
    d = check_continuous(f)
    if isinstance(d, ContinuityFailure):
        raise NotContinuous(f"{f.name}: {d}")
    return refine(raw_rule(f, program), d)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _term_str(t: Term) -> str:
    return pretty_pexpr(t)


def _cond_str(p: PureCond) -> str:
    if p.positive:
        return _term_str(p.cond)
    if isinstance(p.cond, PBin) and p.cond.op == "=":
        return _term_str(replace(p.cond, op="≠"))
    if isinstance(p.cond, PBin) and p.cond.op == "≠":
        return _term_str(replace(p.cond, op="="))
    return f"¬ {pretty_pexpr(p.cond, 99)}"


def _hyp_str(h: Hyp, q: str = "Q") -> str:
    parts = [_term_str(a) for a in h.args]
    if h.pre is not None:
        parts += [_term_str(h.pre), _term_str(h.post)]
    parts.append(_term_str(h.result))
    return f"{q}({', '.join(parts)})"


def _general_hyp_str(rule: InductionRule) -> str:
    n = len(rule.params)
    zs = [f"z{i+1}" for i in range(n)] if n != 1 else ["z"]
    call = f"{rule.function}({', '.join(zs)})"
    if rule.monad == "heap":
        vs = " ".join(zs + ["hp", "hp'", "r"])
        return (f"(⋀{vs}. (hp, hp', r) ∈ ⟦{call}⟧ ⟹ "
                f"Q({', '.join(zs)}, hp, hp', r))")
    vs = " ".join(zs + ["r"])
    return f"(⋀{vs}. {call} = Some(r) ⟹ Q({', '.join(zs)}, r))"


def _premise_str(p: Premise, rule: InductionRule) -> str:
    if isinstance(p, GeneralHyp):
        return _general_hyp_str(rule)
    if isinstance(p, BodyEq):
        body = pretty_expr_named(p.body, rule.function)
        return f"({body}) = Some({_term_str(p.result)})"
    if isinstance(p, BodySem):
        body = pretty_expr_named(p.body, rule.function)
        return (f"({_term_str(p.pre)}, {_term_str(p.post)}, {_term_str(p.result)}) "
                f"∈ ⟦{body}⟧")
    if isinstance(p, OptEq):
        call = f"{p.fun}({', '.join(_term_str(a) for a in p.args)})"
        return f"{call} = Some({_term_str(p.result)})"
    if isinstance(p, SemTriple):
        call = f"{p.fun}({', '.join(_term_str(a) for a in p.args)})"
        return (f"({_term_str(p.pre)}, {_term_str(p.post)}, {_term_str(p.result)}) "
                f"∈ ⟦{call}⟧")
    if isinstance(p, PureEq):
        return f"{_term_str(p.lhs)} = {_term_str(p.rhs)}"
    if isinstance(p, PureCond):
        return _cond_str(p)
    if isinstance(p, HeapNew):
        return (f"({_term_str(p.ref)}, {_term_str(p.post)}) = "
                f"new_ref_with({_term_str(p.value)}, {_term_str(p.pre)})")
    if isinstance(p, Hyp):
        return _hyp_str(p)
    raise AssertionError(p)


def obligation_str(ob: Obligation, rule: InductionRule) -> str:
    parts = [_premise_str(p, rule) for p in ob.premises]
    parts.append(_hyp_str(ob.conclusion))
    body = " ⟹ ".join(parts)
    if ob.vars:
        prefix = "⋀" + " ".join(n for n, _ in ob.vars) + ". "
        return prefix + body
    return body


def conclusion_schema_str(rule: InductionRule) -> str:
    params = ", ".join(n for n, _ in rule.params)
    call = f"{rule.function}({params})"
    if rule.monad == "heap":
        return f"(h, h', y) ∈ ⟦{call}⟧ ⟹ Q({params}, h, h', y)"
    return f"{call} = Some(y) ⟹ Q({params}, y)"


def render_rule(rule: InductionRule, fmt: str = "text") -> str:
    """Render a rule; ``text`` mimics the inference-rule layout with one
    obligation per line and the conclusion last, ``json`` is the stable
    structured dump."""
    if fmt == "json":
        import json

        return json.dumps(rule_to_json(rule), indent=2, ensure_ascii=False)
    lines = [f"{rule.kind} induction rule for {rule.function} ({rule.monad} monad):"]
    for i, ob in enumerate(rule.obligations, start=1):
        lines.append(f"  [{i}] {obligation_str(ob, rule)}")
    lines.append("  " + "─" * 60)
    lines.append("  " + conclusion_schema_str(rule))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# JSON round-trip
# ---------------------------------------------------------------------------


def type_to_json(t: Optional[Type]):
    if t is None:
        return {"t": "function"}
    if isinstance(t, TNat):
        return {"t": "nat"}
    if isinstance(t, TBool):
        return {"t": "bool"}
    if isinstance(t, TUnit):
        return {"t": "unit"}
    if isinstance(t, THeap):
        return {"t": "heap"}
    if isinstance(t, TList):
        return {"t": "list", "elem": type_to_json(t.elem)}
    if isinstance(t, TOption):
        return {"t": "option", "elem": type_to_json(t.elem)}
    if isinstance(t, TRef):
        return {"t": "ref", "elem": type_to_json(t.elem)}
    if isinstance(t, TData):
        return {"t": "data", "name": t.name, "args": [type_to_json(a) for a in t.args]}
    if isinstance(t, TVar):
        return {"t": "tyvar", "name": t.name}
    raise AssertionError(t)


def type_from_json(j) -> Optional[Type]:
    tag = j["t"]
    if tag == "function":
        return None
    simple = {"nat": TNat(), "bool": TBool(), "unit": TUnit(), "heap": THeap()}
    if tag in simple:
        return simple[tag]
    if tag == "list":
        return TList(type_from_json(j["elem"]))
    if tag == "option":
        return TOption(type_from_json(j["elem"]))
    if tag == "ref":
        return TRef(type_from_json(j["elem"]))
    if tag == "data":
        return TData(j["name"], tuple(type_from_json(a) for a in j["args"]))
    if tag == "tyvar":
        return TVar(j["name"])
    raise ValueError(f"unknown type tag {tag!r}")


def term_to_json(t: Term):
    if isinstance(t, PVar):
        return {"tag": "var", "name": t.name}
    if isinstance(t, PNat):
        return {"tag": "nat", "value": t.value}
    if isinstance(t, PBool):
        return {"tag": "bool", "value": t.value}
    if isinstance(t, PUnit):
        return {"tag": "unit"}
    if isinstance(t, PNil):
        return {"tag": "nil"}
    if isinstance(t, PCons):
        return {"tag": "cons", "head": term_to_json(t.head), "tail": term_to_json(t.tail)}
    if isinstance(t, PNone):
        return {"tag": "none"}
    if isinstance(t, PSome):
        return {"tag": "some", "arg": term_to_json(t.arg)}
    if isinstance(t, PCtor):
        return {"tag": "ctor", "name": t.name, "args": [term_to_json(a) for a in t.args]}
    if isinstance(t, PCall):
        return {"tag": "call", "name": t.name, "args": [term_to_json(a) for a in t.args]}
    if isinstance(t, PBin):
        return {"tag": "binop", "op": t.op, "lhs": term_to_json(t.lhs),
                "rhs": term_to_json(t.rhs)}
    if isinstance(t, PNot):
        return {"tag": "not", "arg": term_to_json(t.arg)}
    if isinstance(t, PRefLit):
        return {"tag": "ref", "id": t.rid}
    raise AssertionError(t)


def term_from_json(j) -> Term:
    tag = j["tag"]
    if tag == "var":
        return PVar(j["name"])
    if tag == "nat":
        return PNat(j["value"])
    if tag == "bool":
        return PBool(j["value"])
    if tag == "unit":
        return PUnit()
    if tag == "nil":
        return PNil()
    if tag == "cons":
        return PCons(term_from_json(j["head"]), term_from_json(j["tail"]))
    if tag == "none":
        return PNone()
    if tag == "some":
        return PSome(term_from_json(j["arg"]))
    if tag == "ctor":
        return PCtor(j["name"], tuple(term_from_json(a) for a in j["args"]))
    if tag == "call":
        return PCall(j["name"], tuple(term_from_json(a) for a in j["args"]))
    if tag == "binop":
        return PBin(j["op"], term_from_json(j["lhs"]), term_from_json(j["rhs"]))
    if tag == "not":
        return PNot(term_from_json(j["arg"]))
    if tag == "ref":
        return PRefLit(j["id"])
    raise ValueError(f"unknown term tag {tag!r}")


def expr_to_json(e: Expr):
    if isinstance(e, Return):
        return {"tag": "return", "value": term_to_json(e.value)}
    if isinstance(e, Bind):
        return {"tag": "bind", "var": e.var, "head": expr_to_json(e.head),
                "body": expr_to_json(e.body)}
    if isinstance(e, If):
        return {"tag": "if", "cond": term_to_json(e.cond),
                "then": expr_to_json(e.then), "else": expr_to_json(e.els)}
    if isinstance(e, Case):
        return {"tag": "case", "scrutinee": term_to_json(e.scrutinee),
                "branches": [{"ctor": p.ctor, "vars": list(p.vars),
                              "body": expr_to_json(b)} for p, b in e.branches]}
    if isinstance(e, SelfCall):
        return {"tag": "selfcall", "args": [term_to_json(a) for a in e.args]}
    if isinstance(e, ExtCall):
        return {"tag": "extcall", "name": e.name,
                "args": [term_to_json(a) for a in e.args]}
    if isinstance(e, RefNew):
        return {"tag": "ref_new", "value": term_to_json(e.value)}
    if isinstance(e, RefGet):
        return {"tag": "ref_get", "ref": term_to_json(e.ref)}
    if isinstance(e, RefSet):
        return {"tag": "ref_set", "ref": term_to_json(e.ref),
                "value": term_to_json(e.value)}
    raise AssertionError(e)


def expr_from_json(j) -> Expr:
    tag = j["tag"]
    if tag == "return":
        return Return(term_from_json(j["value"]))
    if tag == "bind":
        return Bind(j["var"], expr_from_json(j["head"]), expr_from_json(j["body"]))
    if tag == "if":
        return If(term_from_json(j["cond"]), expr_from_json(j["then"]),
                  expr_from_json(j["else"]))
    if tag == "case":
        return Case(term_from_json(j["scrutinee"]),
                    tuple((Pattern(b["ctor"], tuple(b["vars"])),
                           expr_from_json(b["body"])) for b in j["branches"]))
    if tag == "selfcall":
        return SelfCall(tuple(term_from_json(a) for a in j["args"]))
    if tag == "extcall":
        return ExtCall(j["name"], tuple(term_from_json(a) for a in j["args"]))
    if tag == "ref_new":
        return RefNew(term_from_json(j["value"]))
    if tag == "ref_get":
        return RefGet(term_from_json(j["ref"]))
    if tag == "ref_set":
        return RefSet(term_from_json(j["ref"]), term_from_json(j["value"]))
    raise ValueError(f"unknown expr tag {tag!r}")


def _premise_to_json(p: Premise):
    if isinstance(p, GeneralHyp):
        return {"tag": "general_hyp", "fun_var": p.fun_var}
    if isinstance(p, BodyEq):
        return {"tag": "body_eq", "body": expr_to_json(p.body),
                "result": term_to_json(p.result)}
    if isinstance(p, BodySem):
        return {"tag": "body_sem", "pre": term_to_json(p.pre),
                "post": term_to_json(p.post), "result": term_to_json(p.result),
                "body": expr_to_json(p.body)}
    if isinstance(p, OptEq):
        return {"tag": "opt_eq", "fun": p.fun,
                "args": [term_to_json(a) for a in p.args],
                "result": term_to_json(p.result)}
    if isinstance(p, SemTriple):
        return {"tag": "sem_triple", "pre": term_to_json(p.pre),
                "post": term_to_json(p.post), "result": term_to_json(p.result),
                "fun": p.fun, "args": [term_to_json(a) for a in p.args]}
    if isinstance(p, PureEq):
        return {"tag": "eq", "lhs": term_to_json(p.lhs), "rhs": term_to_json(p.rhs)}
    if isinstance(p, PureCond):
        return {"tag": "cond", "positive": p.positive, "term": term_to_json(p.cond)}
    if isinstance(p, HeapNew):
        return {"tag": "heap_new", "ref": term_to_json(p.ref),
                "post": term_to_json(p.post), "value": term_to_json(p.value),
                "pre": term_to_json(p.pre)}
    if isinstance(p, Hyp):
        j = {"tag": "hyp", "args": [term_to_json(a) for a in p.args],
             "result": term_to_json(p.result)}
        if p.pre is not None:
            j["pre"] = term_to_json(p.pre)
            j["post"] = term_to_json(p.post)
        return j
    raise AssertionError(p)


def _premise_from_json(j) -> Premise:
    tag = j["tag"]
    if tag == "general_hyp":
        return GeneralHyp(j["fun_var"])
    if tag == "body_eq":
        return BodyEq(expr_from_json(j["body"]), term_from_json(j["result"]))
    if tag == "body_sem":
        return BodySem(term_from_json(j["pre"]), term_from_json(j["post"]),
                       term_from_json(j["result"]), expr_from_json(j["body"]))
    if tag == "opt_eq":
        return OptEq(j["fun"], tuple(term_from_json(a) for a in j["args"]),
                     term_from_json(j["result"]))
    if tag == "sem_triple":
        return SemTriple(term_from_json(j["pre"]), term_from_json(j["post"]),
                         term_from_json(j["result"]), j["fun"],
                         tuple(term_from_json(a) for a in j["args"]))
    if tag == "eq":
        return PureEq(term_from_json(j["lhs"]), term_from_json(j["rhs"]))
    if tag == "cond":
        return PureCond(term_from_json(j["term"]), j["positive"])
    if tag == "heap_new":
        return HeapNew(term_from_json(j["ref"]), term_from_json(j["post"]),
                       term_from_json(j["value"]), term_from_json(j["pre"]))
    if tag == "hyp":
        pre = term_from_json(j["pre"]) if "pre" in j else None
        post = term_from_json(j["post"]) if "post" in j else None
        return Hyp(tuple(term_from_json(a) for a in j["args"]),
                   term_from_json(j["result"]), pre, post)
    raise ValueError(f"unknown premise tag {tag!r}")


def rule_to_json(rule: InductionRule) -> dict:
    return {
        "function": rule.function,
        "monad": rule.monad,
        "kind": rule.kind,
        "params": [{"name": n, "type": type_to_json(t)} for n, t in rule.params],
        "result_type": type_to_json(rule.result_type),
        "conclusion": conclusion_schema_str(rule),
        "obligations": [
            {"vars": [{"name": n, "type": type_to_json(t)} for n, t in ob.vars],
             "premises": [_premise_to_json(p) for p in ob.premises],
             "conclusion": _premise_to_json(ob.conclusion)}
            for ob in rule.obligations],
    }


def rule_from_json(j: dict) -> InductionRule:
    obligations = tuple(
        Obligation(tuple((v["name"], type_from_json(v["type"])) for v in ob["vars"]),
                   tuple(_premise_from_json(p) for p in ob["premises"]),
                   _premise_from_json(ob["conclusion"]))
        for ob in j["obligations"])
    return InductionRule(j["function"], j["monad"], j["kind"],
                         tuple((p["name"], type_from_json(p["type"]))
                               for p in j["params"]),
                         type_from_json(j["result_type"]), obligations)


# ---------------------------------------------------------------------------
# Alpha-equivalence of rules
# ---------------------------------------------------------------------------


def _alpha_terms(a: Term, b: Term, quant_a: set[str], quant_b: set[str],
                 m: dict[str, str]) -> bool:
    if isinstance(a, PVar) or isinstance(b, PVar):
        if not (isinstance(a, PVar) and isinstance(b, PVar)):
            return False
        if a.name in quant_a or b.name in quant_b:
            if a.name not in quant_a or b.name not in quant_b:
                return False
            if a.name in m:
                return m[a.name] == b.name
            if b.name in m.values():
                return False
            m[a.name] = b.name
            return True
        return a.name == b.name
    if type(a) is not type(b):
        return False
    if isinstance(a, (PNat, PBool)):
        return a.value == b.value
    if isinstance(a, PRefLit):
        return a.rid == b.rid
    if isinstance(a, (PCtor, PCall)) and a.name != b.name:
        return False
    if isinstance(a, PBin) and a.op != b.op:
        return False
    ca, cb = _pexpr_children(a), _pexpr_children(b)
    return len(ca) == len(cb) and all(
        _alpha_terms(x, y, quant_a, quant_b, m) for x, y in zip(ca, cb))


def _alpha_premise(a: Premise, b: Premise, qa, qb, m) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, GeneralHyp):
        return _alpha_terms(PVar(a.fun_var), PVar(b.fun_var), qa, qb, m)
    if isinstance(a, (BodyEq, BodySem)):
        from .syntax import alpha_equivalent

        if not alpha_equivalent(a.body, b.body):
            return False
        fields_a = [a.result] if isinstance(a, BodyEq) else [a.pre, a.post, a.result]
        fields_b = [b.result] if isinstance(b, BodyEq) else [b.pre, b.post, b.result]
        return all(_alpha_terms(x, y, qa, qb, m) for x, y in zip(fields_a, fields_b))
    if isinstance(a, OptEq):
        return a.fun == b.fun and len(a.args) == len(b.args) and all(
            _alpha_terms(x, y, qa, qb, m) for x, y in
            list(zip(a.args, b.args)) + [(a.result, b.result)])
    if isinstance(a, SemTriple):
        return a.fun == b.fun and len(a.args) == len(b.args) and all(
            _alpha_terms(x, y, qa, qb, m) for x, y in
            [(a.pre, b.pre), (a.post, b.post), (a.result, b.result)]
            + list(zip(a.args, b.args)))
    if isinstance(a, PureEq):
        return _alpha_terms(a.lhs, b.lhs, qa, qb, m) and \
            _alpha_terms(a.rhs, b.rhs, qa, qb, m)
    if isinstance(a, PureCond):
        return a.positive == b.positive and _alpha_terms(a.cond, b.cond, qa, qb, m)
    if isinstance(a, HeapNew):
        return all(_alpha_terms(x, y, qa, qb, m) for x, y in
                   [(a.ref, b.ref), (a.post, b.post), (a.value, b.value),
                    (a.pre, b.pre)])
    if isinstance(a, Hyp):
        if (a.pre is None) != (b.pre is None) or len(a.args) != len(b.args):
            return False
        pairs = list(zip(a.args, b.args)) + [(a.result, b.result)]
        if a.pre is not None:
            pairs += [(a.pre, b.pre), (a.post, b.post)]
        return all(_alpha_terms(x, y, qa, qb, m) for x, y in pairs)
    raise AssertionError(a)


def obligations_alpha_equivalent(a: Obligation, b: Obligation) -> bool:
    """Alpha-equivalence with premises compared in order."""
    if len(a.vars) != len(b.vars) or len(a.premises) != len(b.premises):
        return False
    qa = {n for n, _ in a.vars}
    qb = {n for n, _ in b.vars}
    m: dict[str, str] = {}
    for pa, pb in zip(a.premises, b.premises):
        if not _alpha_premise(pa, pb, qa, qb, m):
            return False
    if not _alpha_premise(a.conclusion, b.conclusion, qa, qb, m):
        return False
    # Mapped variables must agree on их declared types.
    types_a = dict(a.vars)
    types_b = dict(b.vars)
    return all(types_a[x] == types_b[y] for x, y in m.items())


def rules_alpha_equivalent(a: InductionRule, b: InductionRule) -> bool:
    return (a.function == b.function and a.monad == b.monad and a.kind == b.kind
            and len(a.obligations) == len(b.obligations)
            and all(obligations_alpha_equivalent(x, y)
                    for x, y in zip(a.obligations, b.obligations)))


# ---------------------------------------------------------------------------
# Sampled soundness audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """Enumeration bounds for the desk-scale audit."""

    nat_max: int = 8
    list_max_len: int = 3
    list_elem_max: int = 4
    heap_max_cells: int = 2
    cell_type: Optional[Type] = None
    data_depth: int = 2
    extra: tuple[tuple[Type, tuple[Value, ...]], ...] = ()
    max_nodes: int = 2_000_000
    fuel_cap: int = 64

    def extra_for(self, ty: Type) -> tuple[Value, ...]:
        for t, vs in self.extra:
            if t == ty:
                return vs
        return ()


@dataclass(frozen=True)
class Verdict:
    obligations_hold: bool
    failed_obligation: Optional[int]  # 0-based index
    obligation_witness: Optional[tuple[tuple[str, object], ...]]
    conclusion_holds: bool
    conclusion_witness: Optional[tuple[tuple[str, object], ...]]
    assignments_checked: int

    def __str__(self):
        lines = []
        if self.obligations_hold:
            lines.append("ObligationsHold")
        else:
            w = ", ".join(f"{n} = {v}" for n, v in self.obligation_witness)
            lines.append(
                f"ObligationFails(obligation {self.failed_obligation + 1}, {w})")
        if self.conclusion_holds:
            lines.append("ConclusionHolds")
        else:
            w = ", ".join(f"{n} = {v}" for n, v in self.conclusion_witness)
            lines.append(f"ConclusionFails({w})")
        lines.append(f"assignments checked: {self.assignments_checked}")
        return "\n".join(lines)


class _Unsat(Exception):
    """Premise evaluation hit an undefined application (e.g. a dangling
    reference); the assignment is outside the intended domain."""


def enum_values(ty: Type, spec: DomainSpec, program: Program,
                depth: int = 0) -> list[Value]:
    """All values of a type within the domain bounds, in canonical order."""
    out: list[Value]
    if isinstance(ty, TNat):
        out = [VNat(i) for i in range(max(spec.nat_max, -1) + 1)]
    elif isinstance(ty, TBool):
        out = [VBool(False), VBool(True)]
    elif isinstance(ty, TUnit):
        out = [VUnit()]
    elif isinstance(ty, TList):
        elem_spec = spec
        if isinstance(ty.elem, TNat):
            elem_spec = replace(spec, nat_max=spec.list_elem_max)
        elems = enum_values(ty.elem, elem_spec, program, depth)
        out = [VList(t) for n in range(spec.list_max_len + 1)
               for t in itertools.product(elems, repeat=n)]
    elif isinstance(ty, TOption):
        out = [VNone()] + [VSome(v) for v in enum_values(ty.elem, spec, program, depth)]
    elif isinstance(ty, TRef):
        out = [VRef(i) for i in range(spec.heap_max_cells)]
    elif isinstance(ty, TData):
        if depth > spec.data_depth:
            return list(spec.extra_for(ty))
        out = []
        decl = program.data_decl(ty.name)
        subst = dict(zip(decl.type_params, ty.args))
        from .syntax import _PureTypeCheck

        inst = _PureTypeCheck(_ProgramTables(program))
        for c in decl.ctors:
            arg_tys = [inst._instantiate(t, subst) for t in c.arg_types]
            arg_domains = [enum_values(t, spec, program, depth + 1) for t in arg_tys]
            for combo in itertools.product(*arg_domains):
                out.append(VCtor(c.name, combo))
    elif isinstance(ty, THeap):
        if spec.cell_type is None:
            out = [EMPTY_HEAP]
        else:
            cell_domain = enum_values(spec.cell_type, spec, program, depth)
            out = []
            for k in range(spec.heap_max_cells + 1):
                for combo in itertools.product(cell_domain, repeat=k):
                    h = Heap(tuple(enumerate(combo)), k)
                    if heap_closed(h):
                        out.append(h)
    else:
        raise MfxError(f"cannot enumerate values of type {ty}")
    for v in spec.extra_for(ty):
        if v not in out:
            out.append(v)
    return out


def _eval_term(t: Term, env: dict[str, object], program: Program,
               fuel_cap: int):
    """Evaluate a rule term; variables may be bound to values or heaps."""
    if isinstance(t, PVar):
        return env[t.name]
    if isinstance(t, PCall) and t.name == "get_ref":
        r = _eval_term(t.args[0], env, program, fuel_cap)
        h = _eval_term(t.args[1], env, program, fuel_cap)
        try:
            return heap_get(h, r)
        except DanglingRef:
            raise _Unsat
    if isinstance(t, PCall) and t.name == "set_ref":
        r = _eval_term(t.args[0], env, program, fuel_cap)
        v = _eval_term(t.args[1], env, program, fuel_cap)
        h = _eval_term(t.args[2], env, program, fuel_cap)
        try:
            return heap_set(h, r, v)
        except DanglingRef:
            raise _Unsat
    if isinstance(t, PCall):
        args = [_eval_term(a, env, program, fuel_cap) for a in t.args]
        d = program.pure_def(t.name)
        inner = {n: v for (n, _), v in zip(d.params, args)}
        return eval_pure(d.body, inner, program)
    if isinstance(t, PCons):
        head = _eval_term(t.head, env, program, fuel_cap)
        tail = _eval_term(t.tail, env, program, fuel_cap)
        return VList((head,) + tail.items)
    if isinstance(t, PSome):
        return VSome(_eval_term(t.arg, env, program, fuel_cap))
    if isinstance(t, PCtor):
        return VCtor(t.name, tuple(_eval_term(a, env, program, fuel_cap)
                                   for a in t.args))
    if isinstance(t, PNot):
        v = _eval_term(t.arg, env, program, fuel_cap)
        return VBool(not v.value)
    if isinstance(t, PBin):
        # Operands may contain explicit-heap applications, so evaluate them
        # here rather than through the pure interpreter.
        a = _eval_term(t.lhs, env, program, fuel_cap)
        b = _eval_term(t.rhs, env, program, fuel_cap)
        if t.op == "=":
            return VBool(a == b)
        if t.op == "≠":
            return VBool(a != b)
        if t.op == "and":
            return VBool(a.value and b.value)
        if t.op == "or":
            return VBool(a.value or b.value)
        if t.op == "+":
            return VNat(a.value + b.value)
        if t.op == "-":
            return VNat(max(a.value - b.value, 0))
        if t.op == "div":
            return VNat(a.value // b.value if b.value else 0)
        if t.op == "mod":
            return VNat(a.value % b.value if b.value else 0)
        if t.op == "<":
            return VBool(a.value < b.value)
        raise AssertionError(t.op)
    return eval_pure(t, {}, program)


def _match_value(t: Term, v, env: dict[str, object], quantified: set[str]):
    """Match a constructor-shaped term against a value, binding unbound
    quantified variables.  Returns the extended env or None."""
    if isinstance(t, PVar) and t.name in quantified:
        if t.name in env:
            return env if env[t.name] == v else None
        out = dict(env)
        out[t.name] = v
        return out
    if isinstance(t, PNat):
        return env if v == VNat(t.value) else None
    if isinstance(t, PBool):
        return env if v == VBool(t.value) else None
    if isinstance(t, PUnit):
        return env if v == VUnit() else None
    if isinstance(t, PNil):
        return env if v == VList(()) else None
    if isinstance(t, PCons):
        if not isinstance(v, VList) or not v.items:
            return None
        env2 = _match_value(t.head, v.items[0], env, quantified)
        if env2 is None:
            return None
        return _match_value(t.tail, VList(v.items[1:]), env2, quantified)
    if isinstance(t, PNone):
        return env if isinstance(v, VNone) else None
    if isinstance(t, PSome):
        if not isinstance(v, VSome):
            return None
        return _match_value(t.arg, v.value, env, quantified)
    if isinstance(t, PCtor):
        if not isinstance(v, VCtor) or v.name != t.name or len(v.args) != len(t.args):
            return None
        for sub, arg in zip(t.args, v.args):
            env = _match_value(sub, arg, env, quantified)
            if env is None:
                return None
        return env
    return None  # not a pattern shape


def check_rule_sampled(rule: InductionRule,
                       q_oracle: Callable[..., bool],
                       domain: DomainSpec,
                       fuel_cap: Optional[int] = None) -> Verdict:
    """Audit a refined rule against an executable predicate.

    (a) every obligation is checked by enumerating its quantified variables
    over the bounded domain, treating Q applications as oracle calls;
    (b) the conclusion is brute-forced independently: wherever the function
    terminates on an enumerated input, the oracle must hold.

    ObligationsHold together with ConclusionHolds is the desk-scale shadow
    of the rule's soundness.  Raises BudgetExceeded past max_nodes.
    """
    if rule.kind != "refined":
        raise MfxError("check_rule_sampled expects a refined rule")
    program = rule.program
    if program is None:
        raise MfxError("rule carries no program; rebuild it with raw_rule(f, program)")
    cap = fuel_cap if fuel_cap is not None else domain.fuel_cap
    nodes = 0

    def domain_of(ty: Type) -> list[Value]:
        return enum_values(ty, domain, program)

    def bump():
        nonlocal nodes
        nodes += 1
        if nodes > domain.max_nodes:
            raise BudgetExceeded(f"enumeration exceeded {domain.max_nodes} nodes")

    def oracle_for(h: Hyp, env) -> bool:
        args = [_eval_term(a, env, program, cap) for a in h.args]
        if h.pre is not None:
            args += [_eval_term(h.pre, env, program, cap),
                     _eval_term(h.post, env, program, cap)]
        args.append(_eval_term(h.result, env, program, cap))
        try:
            return bool(q_oracle(*args))
        except DanglingRef:
            # The oracle dereferenced an unallocated id: the assignment is
            # outside the well-formed slice of the domain.
            raise _Unsat

    def premise_true(p: Premise, env) -> bool:
        if isinstance(p, PureEq):
            return _eval_term(p.lhs, env, program, cap) == \
                _eval_term(p.rhs, env, program, cap)
        if isinstance(p, PureCond):
            v = _eval_term(p.cond, env, program, cap)
            return v.value == p.positive
        if isinstance(p, Hyp):
            return oracle_for(p, env)
        if isinstance(p, OptEq):
            args = tuple(_eval_term(a, env, program, cap) for a in p.args)
            try:
                out = run_lfp(program, p.fun, args, EMPTY_HEAP, cap)
            except DanglingRef:
                raise _Unsat
            want = _eval_term(p.result, env, program, cap)
            return isinstance(out, OkPure) and out.value == want
        if isinstance(p, SemTriple):
            args = tuple(_eval_term(a, env, program, cap) for a in p.args)
            pre = _eval_term(p.pre, env, program, cap)
            try:
                out = run_lfp(program, p.fun, args, pre, cap)
            except DanglingRef:
                raise _Unsat
            return isinstance(out, Ok) \
                and out.value == _eval_term(p.result, env, program, cap) \
                and out.heap == _eval_term(p.post, env, program, cap)
        if isinstance(p, HeapNew):
            v = _eval_term(p.value, env, program, cap)
            pre = _eval_term(p.pre, env, program, cap)
            r, post = heap_alloc(pre, v)
            return _eval_term(p.ref, env, program, cap) == r \
                and _eval_term(p.post, env, program, cap) == post
        raise MfxError(f"cannot audit premise {p}")

    def try_define(p: Premise, env, quantified) -> Optional[dict]:
        """Use a premise as a defining equation for its unbound variables.

        Returns an extended env, None if the premise refutes the current
        assignment, or raises _NoSolve to fall back to enumeration."""
        def bound(t: Term) -> bool:
            return all(v in env for v in term_vars(t) if v in quantified)

        if isinstance(p, PureEq):
            for pat, other in ((p.lhs, p.rhs), (p.rhs, p.lhs)):
                if bound(other) and not bound(pat):
                    val = _eval_term(other, env, program, cap)
                    m = _match_value(pat, val, env, quantified)
                    if m is None and _is_pattern(pat, quantified):
                        return None
                    if m is not None:
                        return m
            raise _NoSolve
        if isinstance(p, (OptEq, SemTriple)):
            pre_ok = not isinstance(p, SemTriple) or bound(p.pre)
            if all(bound(a) for a in p.args) and pre_ok:
                args = tuple(_eval_term(a, env, program, cap) for a in p.args)
                pre = _eval_term(p.pre, env, program, cap) \
                    if isinstance(p, SemTriple) else EMPTY_HEAP
                try:
                    out = run_lfp(program, p.fun, args, pre, cap)
                except DanglingRef:
                    return None
                if isinstance(out, (OkPure, Ok)):
                    m = _match_value(p.result, out.value, env, quantified)
                    if m is None:
                        return None
                    if isinstance(p, SemTriple):
                        m = _match_value_heap(p.post, out.heap, m, quantified)
                        if m is None:
                            return None
                    return m
                return None
            raise _NoSolve
        if isinstance(p, HeapNew):
            if bound(p.value) and bound(p.pre):
                v = _eval_term(p.value, env, program, cap)
                pre = _eval_term(p.pre, env, program, cap)
                r, post = heap_alloc(pre, v)
                m = _match_value(p.ref, r, env, quantified)
                if m is None:
                    return None
                return _match_value_heap(p.post, post, m, quantified)
            raise _NoSolve
        raise _NoSolve

    def _match_value_heap(t: Term, h, env, quantified):
        if isinstance(t, PVar) and t.name in quantified:
            if t.name in env:
                return env if env[t.name] == h else None
            out = dict(env)
            out[t.name] = h
            return out
        return env if _eval_term(t, env, program, cap) == h else None

    def _is_pattern(t: Term, quantified) -> bool:
        if isinstance(t, PVar):
            return t.name in quantified
        if isinstance(t, (PNat, PBool, PUnit, PNil, PNone)):
            return True
        if isinstance(t, (PCons, PSome, PCtor)):
            return all(_is_pattern(c, quantified) for c in _pexpr_children(t))
        return False

    def check_obligation(ob: Obligation) -> Optional[dict]:
        quantified = {n for n, _ in ob.vars}
        types = dict(ob.vars)
        prems = list(ob.premises)

        def enumerate_var(i: int, v: str, env: dict) -> Optional[dict]:
            for val in domain_of(types[v]):
                bump()
                w = run(i, {**env, v: val})
                if w is not None:
                    return w
            return None

        def run(i: int, env: dict) -> Optional[dict]:
            if i == len(prems):
                unbound = [n for n, _ in ob.vars if n not in env]
                if unbound:
                    return enumerate_var(i, unbound[0], env)
                try:
                    ok = oracle_for(ob.conclusion, env)
                except _Unsat:
                    return None
                return None if ok else env
            p = prems[i]
            pv = premise_vars(p)
            # Quantifier order keeps enumeration (and witnesses) deterministic.
            needed = [n for n, _ in ob.vars if n in pv and n not in env]
            if not needed:
                try:
                    holds = premise_true(p, env)
                except _Unsat:
                    return None
                return run(i + 1, env) if holds else None
            try:
                solved = try_define(p, env, quantified)
            except _NoSolve:
                return enumerate_var(i, needed[0], env)
            except _Unsat:
                return None
            if solved is None:
                return None
            still = [n for n, _ in ob.vars if n in pv and n not in solved]
            if still:
                return enumerate_var(i, still[0], env)
            # A successful solve already established the premise.
            return run(i + 1, solved)

        return run(0, {})

    failed_i, ob_witness = None, None
    for i, ob in enumerate(rule.obligations):
        w = check_obligation(ob)
        if w is not None:
            failed_i = i
            ob_witness = tuple(sorted((k, v) for k, v in w.items()))
            break

    # (b) independent brute force of the conclusion over enumerated inputs.
    concl_witness = None
    arg_domains = [domain_of(t) for _, t in rule.params]
    heap_domain = domain_of(HEAP) if rule.monad == "heap" else [EMPTY_HEAP]
    done = False
    for h in heap_domain:
        if done:
            break
        for combo in itertools.product(*arg_domains):
            bump()
            try:
                out = run_lfp(program, rule.function, combo, h, cap)
                if isinstance(out, OkPure):
                    if not q_oracle(*combo, out.value):
                        concl_witness = tuple(
                            [(n, v) for (n, _), v in zip(rule.params, combo)]
                            + [("result", out.value)])
                        done = True
                        break
                elif isinstance(out, Ok):
                    if not q_oracle(*combo, h, out.heap, out.value):
                        concl_witness = tuple(
                            [(n, v) for (n, _), v in zip(rule.params, combo)]
                            + [("h", h), ("h'", out.heap), ("result", out.value)])
                        done = True
                        break
            except DanglingRef:
                # An argument or the oracle dereferenced an unallocated id;
                # the input lies outside the well-formed slice.
                continue

    return Verdict(failed_i is None, failed_i, ob_witness,
                   concl_witness is None, concl_witness, nodes)


class _NoSolve(Exception):
    """A premise cannot define its unbound variables; enumerate instead."""
