"""Abstract syntax, parser, static checks, and pretty-printer for the monadic DSL.

A program is a sequence of datatype declarations, pure function definitions,
and monadic function definitions (one monad per definition, declared in the
header).  Recursive calls may appear only in computation position; the pure
sublanguage is total by construction.  The parser alpha-renames binders so
that within each definition all bound names are pairwise distinct and do not
shadow any top-level name, which makes later substitution steps capture-free.

Concrete grammar (whitespace-insensitive, ``--`` line comments, ``(* *)``
block comments, ASCII aliases ``<-`` ``=>`` ``|->`` ``!=`` for ← ⇒ ↦ ≠)::

    program  := (datadecl | puredef | fundef)*
    datadecl := "datatype" ident tyvar* "=" ctor ("|" ctor)*
    ctor     := ident atype*
    puredef  := "pure" "fun" ident "(" params ")" ":" type "=" pexpr
    fundef   := ("option" | "heap") "fun" ident "(" params ")" ":" type "=" expr
    expr     := "return" pexpr | "do" stmt (";" stmt)* "done"
              | "if" pexpr "then" expr "else" expr
              | "case" pexpr "of" pattern "⇒" expr ("|" pattern "⇒" expr)*
              | ident "(" pexpr, ... ")" | "ref" patom | "!" patom
              | pexpr ":=" pexpr | "(" expr ")"
    stmt     := ident "←" expr | expr          (last stmt must be a bare expr)
    pattern  := ident | ident "(" ident, ... ")" | "None" | "Some" "(" ident ")"
    type     := ("list" | "option" | "ref") atype | ident atype* | atype
    atype    := "nat" | "bool" | "unit" | ident | "(" type ")"

Pure expressions comprise variables, literals (naturals, booleans, unit,
lists, options, constructor applications), calls of previously defined pure
functions, arithmetic (+, -, div, mod; natural subtraction truncates at zero,
div/mod by zero yield 0), comparisons (=, ≠, <), and boolean connectives
(and, or, not).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import DslTypeError, MonadError, ParseError, ScopeError

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

POS = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Type:
    pass


@dataclass(frozen=True)
class TNat(Type):
    def __str__(self):
        return "nat"


@dataclass(frozen=True)
class TBool(Type):
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class TUnit(Type):
    def __str__(self):
        return "unit"


@dataclass(frozen=True)
class THeap(Type):
    """Type of heap variables in generated induction rules; not parseable."""

    def __str__(self):
        return "heap"


@dataclass(frozen=True)
class TList(Type):
    elem: Type

    def __str__(self):
        return f"list {_atomize(self.elem)}"


@dataclass(frozen=True)
class TOption(Type):
    elem: Type

    def __str__(self):
        return f"option {_atomize(self.elem)}"


@dataclass(frozen=True)
class TRef(Type):
    elem: Type

    def __str__(self):
        return f"ref {_atomize(self.elem)}"


@dataclass(frozen=True)
class TData(Type):
    name: str
    args: tuple[Type, ...] = ()

    def __str__(self):
        if not self.args:
            return self.name
        return self.name + "".join(" " + _atomize(a) for a in self.args)


@dataclass(frozen=True)
class TVar(Type):
    """A datatype parameter; occurs only inside datatype declarations."""

    name: str

    def __str__(self):
        return self.name


def _atomize(t: Type) -> str:
    s = str(t)
    return f"({s})" if " " in s else s


NAT, BOOL, UNIT, HEAP = TNat(), TBool(), TUnit(), THeap()

# ---------------------------------------------------------------------------
# Pure expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PExpr:
    pass


@dataclass(frozen=True)
class PVar(PExpr):
    name: str
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PNat(PExpr):
    value: int
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PBool(PExpr):
    value: bool
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PUnit(PExpr):
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PNil(PExpr):
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PCons(PExpr):
    head: PExpr
    tail: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PNone(PExpr):
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PSome(PExpr):
    arg: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PCtor(PExpr):
    name: str
    args: tuple[PExpr, ...]
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PCall(PExpr):
    """Application of a previously defined pure function."""

    name: str
    args: tuple[PExpr, ...]
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PBin(PExpr):
    op: str  # + - div mod = ≠ < and or
    lhs: PExpr
    rhs: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PNot(PExpr):
    arg: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PRefLit(PExpr):
    """A reference literal ``refN``; valid in CLI values and heap files only."""

    rid: int
    pos: Optional[tuple[int, int]] = POS


# ---------------------------------------------------------------------------
# Computation expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Return(Expr):
    value: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class Bind(Expr):
    var: str
    head: Expr
    body: Expr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class If(Expr):
    cond: PExpr
    then: Expr
    els: Expr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class Pattern:
    ctor: str  # constructor name, or "None"/"Some"
    vars: tuple[str, ...]
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class Case(Expr):
    scrutinee: PExpr
    branches: tuple[tuple[Pattern, Expr], ...]
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class SelfCall(Expr):
    args: tuple[PExpr, ...]
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class ExtCall(Expr):
    name: str
    args: tuple[PExpr, ...]
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class RefNew(Expr):
    value: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class RefGet(Expr):
    ref: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class RefSet(Expr):
    ref: PExpr
    value: PExpr
    pos: Optional[tuple[int, int]] = POS


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CtorDecl:
    name: str
    arg_types: tuple[Type, ...]


@dataclass(frozen=True)
class DataDecl:
    name: str
    type_params: tuple[str, ...]
    ctors: tuple[CtorDecl, ...]
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class PureDef:
    name: str
    params: tuple[tuple[str, Type], ...]
    result_type: Type
    body: PExpr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class FunDef:
    name: str
    params: tuple[tuple[str, Type], ...]
    result_type: Type
    monad: str  # "option" | "heap"
    body: Expr
    pos: Optional[tuple[int, int]] = POS


@dataclass(frozen=True)
class Program:
    data_decls: tuple[DataDecl, ...] = ()
    pure_defs: tuple[PureDef, ...] = ()
    fun_defs: tuple[FunDef, ...] = ()

    def data_decl(self, name: str) -> DataDecl:
        for d in self.data_decls:
            if d.name == name:
                return d
        raise KeyError(name)

    def pure_def(self, name: str) -> PureDef:
        for d in self.pure_defs:
            if d.name == name:
                return d
        raise KeyError(name)

    def fun_def(self, name: str) -> FunDef:
        for d in self.fun_defs:
            if d.name == name:
                return d
        raise KeyError(name)

    def ctor_decl(self, name: str) -> tuple[DataDecl, CtorDecl]:
        for d in self.data_decls:
            for c in d.ctors:
                if c.name == name:
                    return d, c
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {
    "datatype", "pure", "option", "heap", "fun", "return", "do", "done",
    "if", "then", "else", "case", "of", "ref", "div", "mod", "and", "or",
    "not", "true", "false", "None", "Some", "nat", "bool", "unit", "list",
}

# Multi-char symbols first so max-munch wins.
SYMBOLS = [
    ("<-", "←"), ("=>", "⇒"), ("|->", "↦"), ("!=", "≠"), (":=", ":="),
    ("←", "←"), ("⇒", "⇒"), ("↦", "↦"), ("≠", "≠"),
    ("(", "("), (")", ")"), ("[", "["), ("]", "]"), (",", ","), (";", ";"),
    (":", ":"), ("=", "="), ("<", "<"), ("|", "|"), ("!", "!"), ("#", "#"),
    ("+", "+"), ("-", "-"),
]

_REF_LIT = re.compile(r"ref(\d+)$")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "nat" | "kw" | "sym" | "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    line, col, i, n = 1, 1, 0, len(source)

    def advance(k: int):
        nonlocal line, col, i
        for _ in range(k):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = source[i]
        if c.isspace():
            advance(1)
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        if source.startswith("(*", i):
            l0, c0 = line, col
            advance(2)
            depth = 1
            while i < n and depth:
                if source.startswith("(*", i):
                    depth += 1
                    advance(2)
                elif source.startswith("*)", i):
                    depth -= 1
                    advance(2)
                else:
                    advance(1)
            if depth:
                raise ParseError("unterminated block comment", l0, c0)
            continue
        if c.isdigit():
            l0, c0 = line, col
            j = i
            while j < n and source[j].isdigit():
                j += 1
            toks.append(Token("nat", source[i:j], l0, c0))
            advance(j - i)
            continue
        if c.isalpha() or c == "_":
            l0, c0 = line, col
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_'"):
                j += 1
            word = source[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            # "-- " comment handled above; "done" etc. caught as keywords
            toks.append(Token(kind, word, l0, c0))
            advance(j - i)
            continue
        for raw, canon in SYMBOLS:
            if source.startswith(raw, i):
                toks.append(Token("sym", canon, line, col))
                advance(len(raw))
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        # Symbol tables filled in declaration order; later definitions may
        # only refer to earlier ones, which rules out mutual recursion.
        self.datatypes: dict[str, DataDecl] = {}
        self.ctors: dict[str, tuple[str, CtorDecl]] = {}  # ctor -> (datatype, decl)
        self.pure_funs: dict[str, PureDef] = {}
        self.monadic_funs: dict[str, FunDef] = {}
        self.current_fun: Optional[str] = None
        self.current_monad: Optional[str] = None

    # -- token helpers

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def fail(self, msg: str, tok: Token | None = None):
        t = tok or self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- program

    def program(self) -> Program:
        datas, pures, funs = [], [], []
        while not self.at("eof"):
            if self.at("kw", "datatype"):
                datas.append(self.datadecl())
            elif self.at("kw", "pure"):
                pures.append(self.puredef())
            elif self.at("kw", "option") or self.at("kw", "heap"):
                funs.append(self.fundef())
            else:
                self.fail("expected 'datatype', 'pure fun', 'option fun' or 'heap fun'")
        return Program(tuple(datas), tuple(pures), tuple(funs))

    def _fresh_top_name(self, tok: Token) -> str:
        name = tok.text
        if name in self.datatypes or name in self.ctors or name in self.pure_funs \
                or name in self.monadic_funs:
            raise ScopeError(f"duplicate definition of {name!r}", tok.line, tok.col)
        return name

    def datadecl(self) -> DataDecl:
        kw = self.expect("kw", "datatype")
        name_tok = self.expect("ident")
        name = self._fresh_top_name(name_tok)
        params = []
        while self.at("ident"):
            p = self.next().text
            if p in params:
                self.fail(f"duplicate type parameter {p!r}")
            params.append(p)
        self.expect("sym", "=")
        # Pre-register so constructor argument types may mention the datatype.
        decl_stub = DataDecl(name, tuple(params), ())
        self.datatypes[name] = decl_stub
        ctors = [self.ctordecl(params)]
        while self.at("sym", "|"):
            self.next()
            ctors.append(self.ctordecl(params))
        decl = DataDecl(name, tuple(params), tuple(ctors), pos=(kw.line, kw.col))
        self.datatypes[name] = decl
        for c in decl.ctors:
            if c.name in self.ctors:
                raise ScopeError(f"duplicate constructor {c.name!r}", kw.line, kw.col)
            self.ctors[c.name] = (name, c)
        return decl

    def ctordecl(self, ty_params: list[str]) -> CtorDecl:
        name_tok = self.expect("ident")
        self._fresh_top_name(name_tok)
        args = []
        while self._at_atype():
            args.append(self.atype(ty_params))
        return CtorDecl(name_tok.text, tuple(args))

    # -- types

    def _at_atype(self) -> bool:
        t = self.peek()
        return (t.kind == "kw" and t.text in ("nat", "bool", "unit")) \
            or t.kind == "ident" or (t.kind == "sym" and t.text == "(")

    def atype(self, ty_params: list[str]) -> Type:
        t = self.peek()
        if self.at("kw", "nat"):
            self.next()
            return NAT
        if self.at("kw", "bool"):
            self.next()
            return BOOL
        if self.at("kw", "unit"):
            self.next()
            return UNIT
        if self.at("sym", "("):
            self.next()
            ty = self.type_(ty_params)
            self.expect("sym", ")")
            return ty
        if self.at("ident"):
            name = self.next().text
            if name in ty_params:
                return TVar(name)
            decl = self.datatypes.get(name)
            if decl is None:
                raise ScopeError(f"unknown type {name!r}", t.line, t.col)
            if decl.type_params:
                raise DslTypeError(
                    f"type {name!r} expects {len(decl.type_params)} argument(s)",
                    t.line, t.col)
            return TData(name)
        self.fail("expected a type")

    def type_(self, ty_params: list[str]) -> Type:
        t = self.peek()
        if t.kind == "kw" and t.text in ("list", "option", "ref"):
            self.next()
            arg = self.atype(ty_params)
            return {"list": TList, "option": TOption, "ref": TRef}[t.text](arg)
        if t.kind == "ident" and t.text in self.datatypes:
            decl = self.datatypes[t.text]
            if decl.type_params:
                self.next()
                args = tuple(self.atype(ty_params) for _ in decl.type_params)
                return TData(t.text, args)
        return self.atype(ty_params)

    # -- function definitions

    def _params(self, ty_params: list[str]) -> tuple[tuple[str, Type], ...]:
        self.expect("sym", "(")
        params: list[tuple[str, Type]] = []
        if not self.at("sym", ")"):
            while True:
                name_tok = self.expect("ident")
                if any(name_tok.text == p for p, _ in params):
                    self.fail(f"duplicate parameter {name_tok.text!r}", name_tok)
                self._check_binder_name(name_tok)
                self.expect("sym", ":")
                params.append((name_tok.text, self.type_(ty_params)))
                if not self.at("sym", ","):
                    break
                self.next()
        self.expect("sym", ")")
        return tuple(params)

    def _check_binder_name(self, tok: Token):
        if _REF_LIT.match(tok.text):
            self.fail(f"{tok.text!r} is reserved for reference literals", tok)
        if tok.text in self.datatypes or tok.text in self.ctors \
                or tok.text in self.pure_funs or tok.text in self.monadic_funs:
            raise ScopeError(f"{tok.text!r} shadows a top-level name", tok.line, tok.col)

    def puredef(self) -> PureDef:
        kw = self.expect("kw", "pure")
        self.expect("kw", "fun")
        name_tok = self.expect("ident")
        name = self._fresh_top_name(name_tok)
        params = self._params([])
        self.expect("sym", ":")
        rty = self.type_([])
        self.expect("sym", "=")
        self.current_fun = name
        self.current_monad = None
        scope = {p: t for p, t in params}
        body = self.pexpr(scope)
        self.current_fun = None
        d = PureDef(name, params, rty, body, pos=(kw.line, kw.col))
        _PureTypeCheck(self).check_pure_def(d)
        self.pure_funs[name] = d
        return d

    def fundef(self) -> FunDef:
        monad_tok = self.next()  # "option" | "heap"
        self.expect("kw", "fun")
        name_tok = self.expect("ident")
        name = self._fresh_top_name(name_tok)
        params = self._params([])
        self.expect("sym", ":")
        rty = self.type_([])
        self.expect("sym", "=")
        self.current_fun = name
        self.current_monad = monad_tok.text
        # Pre-register the arity so SelfCalls are checkable while parsing.
        self._self_arity = len(params)
        body = self.expr({p: t for p, t in params})
        self.current_fun = None
        self.current_monad = None
        d = FunDef(name, params, rty, monad_tok.text, body, pos=(monad_tok.line, monad_tok.col))
        d = _alpha_rename(d, self._global_names())
        _FunTypeCheck(self).check_fun_def(d)
        self.monadic_funs[name] = d
        return d

    def _global_names(self) -> set[str]:
        return set(self.datatypes) | set(self.ctors) | set(self.pure_funs) \
            | set(self.monadic_funs) | ({self.current_fun} if self.current_fun else set())

    # -- computation expressions

    def expr(self, scope: dict[str, Type]) -> Expr:
        t = self.peek()
        if self.at("kw", "return"):
            self.next()
            return Return(self.pexpr(scope), pos=(t.line, t.col))
        if self.at("kw", "do"):
            return self.doblock(scope)
        if self.at("kw", "if"):
            self.next()
            cond = self.pexpr(scope)
            self.expect("kw", "then")
            then = self.expr(scope)
            self.expect("kw", "else")
            els = self.expr(scope)
            return If(cond, then, els, pos=(t.line, t.col))
        if self.at("kw", "case"):
            return self.caseblock(scope)
        if self.at("kw", "ref"):
            self.next()
            self._require_heap(t)
            return RefNew(self.patom(scope), pos=(t.line, t.col))
        if self.at("sym", "!"):
            self.next()
            self._require_heap(t)
            return RefGet(self.patom(scope), pos=(t.line, t.col))
        if self.at("sym", "(") and self._paren_is_expr():
            self.next()
            e = self.expr(scope)
            self.expect("sym", ")")
            return e
        # Otherwise: a call of a monadic function, or an assignment.
        p = self.pexpr(scope, computation_ok=True)
        if self.at("sym", ":="):
            self.next()
            self._require_heap(t)
            return RefSet(p, self.pexpr(scope), pos=(t.line, t.col))
        if isinstance(p, PCall) and p.name == self.current_fun:
            return SelfCall(p.args, pos=p.pos)
        if isinstance(p, PCall) and p.name in self.monadic_funs:
            callee = self.monadic_funs[p.name]
            if callee.monad != self.current_monad:
                raise MonadError(
                    f"{p.name!r} is a {callee.monad}-monad function; "
                    f"cannot call it from a {self.current_monad} definition",
                    *(p.pos or (t.line, t.col)))
            return ExtCall(p.name, p.args, pos=p.pos)
        bad = self._find_monadic_mention(p)
        if bad is not None:
            if bad.name == self.current_fun:
                raise MonadError("recursive call in pure position",
                                 *(bad.pos or (t.line, t.col)))
            raise MonadError(f"call of monadic function {bad.name!r} in pure position",
                             *(bad.pos or (t.line, t.col)))
        self.fail("pure expression in computation position (wrap it in 'return')", t)

    def _find_monadic_mention(self, p: PExpr) -> Optional[PCall]:
        if isinstance(p, PCall):
            if p.name == self.current_fun or p.name in self.monadic_funs:
                return p
        for sub in _pexpr_children(p):
            hit = self._find_monadic_mention(sub)
            if hit is not None:
                return hit
        return None

    def _require_heap(self, t: Token):
        if self.current_monad != "heap":
            raise MonadError("heap primitive in an option definition", t.line, t.col)

    def _paren_is_expr(self) -> bool:
        """Disambiguate '(' expr ')' from a parenthesised pure expression."""
        t = self.peek(1)
        return t.kind == "kw" and t.text in ("return", "do", "if", "case", "ref") \
            or (t.kind == "sym" and t.text == "!") \
            or (t.kind == "sym" and t.text == "(" and self._paren_is_expr_at(2))

    def _paren_is_expr_at(self, k: int) -> bool:
        t = self.peek(k)
        return t.kind == "kw" and t.text in ("return", "do", "if", "case", "ref")

    def doblock(self, scope: dict[str, Type]) -> Expr:
        do_tok = self.expect("kw", "do")
        stmts: list[tuple[Optional[str], Expr, Token]] = []
        while True:
            t = self.peek()
            if self.at("ident") and self.peek(1).kind == "sym" and self.peek(1).text == "←":
                var_tok = self.next()
                self._check_binder_name(var_tok)
                self.next()  # ←
                head = self.expr(scope)
                scope = dict(scope)
                scope[var_tok.text] = TVar("?")  # placeholder; typing happens later
                stmts.append((var_tok.text, head, t))
            else:
                stmts.append((None, self.expr(scope), t))
            if self.at("sym", ";"):
                self.next()
                continue
            break
        self.expect("kw", "done")
        last_var, last_expr, last_tok = stmts[-1]
        if last_var is not None:
            self.fail("a do-block must end with an expression, not a binding", last_tok)
        # The final statement is the innermost continuation; bare statements
        # in the middle bind a throwaway name.
        result = last_expr
        for var, head, tok in reversed(stmts[:-1]):
            result = Bind(var if var is not None else "_", head, result,
                          pos=(tok.line, tok.col))
        return result

    def caseblock(self, scope: dict[str, Type]) -> Expr:
        case_tok = self.expect("kw", "case")
        scrut = self.pexpr(scope)
        self.expect("kw", "of")
        branches = [self.branch(scope)]
        while self.at("sym", "|"):
            self.next()
            branches.append(self.branch(scope))
        seen = set()
        for pat, _ in branches:
            if pat.ctor in seen:
                raise ScopeError(f"duplicate case branch for {pat.ctor!r}",
                                 *(pat.pos or (case_tok.line, case_tok.col)))
            seen.add(pat.ctor)
        return Case(scrut, tuple(branches), pos=(case_tok.line, case_tok.col))

    def branch(self, scope: dict[str, Type]) -> tuple[Pattern, Expr]:
        t = self.peek()
        if self.at("kw", "None"):
            self.next()
            pat = Pattern("None", (), pos=(t.line, t.col))
        elif self.at("kw", "Some"):
            self.next()
            self.expect("sym", "(")
            v = self.expect("ident")
            self._check_binder_name(v)
            self.expect("sym", ")")
            pat = Pattern("Some", (v.text,), pos=(t.line, t.col))
        else:
            name_tok = self.expect("ident")
            if name_tok.text not in self.ctors:
                raise ScopeError(f"unknown constructor {name_tok.text!r}",
                                 name_tok.line, name_tok.col)
            vars_: list[str] = []
            if self.at("sym", "("):
                self.next()
                while True:
                    v = self.expect("ident")
                    self._check_binder_name(v)
                    if v.text in vars_:
                        self.fail(f"duplicate pattern variable {v.text!r}", v)
                    vars_.append(v.text)
                    if not self.at("sym", ","):
                        break
                    self.next()
                self.expect("sym", ")")
            _, cdecl = self.ctors[name_tok.text]
            if len(vars_) != len(cdecl.arg_types):
                raise ScopeError(
                    f"constructor {name_tok.text!r} expects {len(cdecl.arg_types)} "
                    f"argument(s), pattern has {len(vars_)}",
                    name_tok.line, name_tok.col)
            pat = Pattern(name_tok.text, tuple(vars_), pos=(t.line, t.col))
        self.expect("sym", "⇒")
        inner = dict(scope)
        for v in pat.vars:
            inner[v] = TVar("?")
        return pat, self.expr(inner)

    # -- pure expressions (precedence climbing)

    def pexpr(self, scope: dict[str, Type], computation_ok: bool = False) -> PExpr:
        return self.p_or(scope, computation_ok)

    def p_or(self, scope, comp=False) -> PExpr:
        e = self.p_and(scope, comp)
        while self.at("kw", "or"):
            t = self.next()
            e = PBin("or", e, self.p_and(scope), pos=(t.line, t.col))
        return e

    def p_and(self, scope, comp=False) -> PExpr:
        e = self.p_not(scope, comp)
        while self.at("kw", "and"):
            t = self.next()
            e = PBin("and", e, self.p_not(scope), pos=(t.line, t.col))
        return e

    def p_not(self, scope, comp=False) -> PExpr:
        if self.at("kw", "not"):
            t = self.next()
            return PNot(self.p_not(scope), pos=(t.line, t.col))
        return self.p_cmp(scope, comp)

    def p_cmp(self, scope, comp=False) -> PExpr:
        e = self.p_cons(scope, comp)
        t = self.peek()
        if t.kind == "sym" and t.text in ("=", "≠", "<"):
            self.next()
            return PBin(t.text, e, self.p_cons(scope), pos=(t.line, t.col))
        return e

    def p_cons(self, scope, comp=False) -> PExpr:
        e = self.p_add(scope, comp)
        if self.at("sym", "#"):
            t = self.next()
            return PCons(e, self.p_cons(scope), pos=(t.line, t.col))
        return e

    def p_add(self, scope, comp=False) -> PExpr:
        e = self.p_mul(scope, comp)
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            t = self.next()
            e = PBin(t.text, e, self.p_mul(scope), pos=(t.line, t.col))
        return e

    def p_mul(self, scope, comp=False) -> PExpr:
        e = self.patom(scope, comp)
        while self.peek().kind == "kw" and self.peek().text in ("div", "mod"):
            t = self.next()
            e = PBin(t.text, e, self.patom(scope), pos=(t.line, t.col))
        return e

    def patom(self, scope: dict[str, Type], comp: bool = False) -> PExpr:
        t = self.peek()
        if t.kind == "nat":
            self.next()
            return PNat(int(t.text), pos=(t.line, t.col))
        if self.at("kw", "true") or self.at("kw", "false"):
            self.next()
            return PBool(t.text == "true", pos=(t.line, t.col))
        if self.at("kw", "None"):
            self.next()
            return PNone(pos=(t.line, t.col))
        if self.at("kw", "Some"):
            self.next()
            self.expect("sym", "(")
            arg = self.pexpr(scope)
            self.expect("sym", ")")
            return PSome(arg, pos=(t.line, t.col))
        if self.at("sym", "("):
            self.next()
            if self.at("sym", ")"):
                self.next()
                return PUnit(pos=(t.line, t.col))
            e = self.pexpr(scope)
            self.expect("sym", ")")
            return e
        if self.at("sym", "["):
            self.next()
            elems = []
            if not self.at("sym", "]"):
                while True:
                    elems.append(self.pexpr(scope))
                    if not self.at("sym", ","):
                        break
                    self.next()
            self.expect("sym", "]")
            out: PExpr = PNil(pos=(t.line, t.col))
            for e in reversed(elems):
                out = PCons(e, out, pos=(t.line, t.col))
            return out
        if t.kind == "ident":
            self.next()
            name = t.text
            if self.at("sym", "("):
                self.next()
                args = []
                if not self.at("sym", ")"):
                    while True:
                        args.append(self.pexpr(scope))
                        if not self.at("sym", ","):
                            break
                        self.next()
                self.expect("sym", ")")
                return self._resolve_app(name, tuple(args), t, comp)
            if name in self.ctors:
                _, cdecl = self.ctors[name]
                if cdecl.arg_types:
                    raise ScopeError(
                        f"constructor {name!r} expects {len(cdecl.arg_types)} argument(s)",
                        t.line, t.col)
                return PCtor(name, (), pos=(t.line, t.col))
            if name not in scope:
                raise ScopeError(f"unbound variable {name!r}", t.line, t.col)
            return PVar(name, pos=(t.line, t.col))
        self.fail("expected a pure expression")

    def _resolve_app(self, name: str, args: tuple[PExpr, ...], t: Token,
                     comp: bool) -> PExpr:
        if name in self.ctors:
            _, cdecl = self.ctors[name]
            if len(args) != len(cdecl.arg_types):
                raise ScopeError(
                    f"constructor {name!r} expects {len(cdecl.arg_types)} argument(s), "
                    f"got {len(args)}", t.line, t.col)
            return PCtor(name, args, pos=(t.line, t.col))
        if name in self.pure_funs:
            d = self.pure_funs[name]
            if len(args) != len(d.params):
                raise ScopeError(
                    f"function {name!r} expects {len(d.params)} argument(s), got {len(args)}",
                    t.line, t.col)
            return PCall(name, args, pos=(t.line, t.col))
        if name == self.current_fun and self.current_monad is None:
            raise ScopeError("pure functions may not call themselves", t.line, t.col)
        if name == self.current_fun or name in self.monadic_funs:
            if comp:
                # The caller (expr) decides whether this is a Self/ExtCall;
                # report arity errors here where the position is known.
                arity = self._self_arity if name == self.current_fun \
                    else len(self.monadic_funs[name].params)
                if len(args) != arity:
                    raise ScopeError(
                        f"function {name!r} expects {arity} argument(s), got {len(args)}",
                        t.line, t.col)
                return PCall(name, args, pos=(t.line, t.col))
            if name == self.current_fun:
                raise MonadError("recursive call in pure position", t.line, t.col)
            raise MonadError(f"call of monadic function {name!r} in pure position",
                             t.line, t.col)
        raise ScopeError(f"unknown function {name!r}", t.line, t.col)


def _pexpr_children(p: PExpr) -> tuple[PExpr, ...]:
    if isinstance(p, PCons):
        return (p.head, p.tail)
    if isinstance(p, PSome):
        return (p.arg,)
    if isinstance(p, (PCtor, PCall)):
        return p.args
    if isinstance(p, PBin):
        return (p.lhs, p.rhs)
    if isinstance(p, PNot):
        return (p.arg,)
    return ()


# ---------------------------------------------------------------------------
# Alpha-renaming
# ---------------------------------------------------------------------------


def _alpha_rename(d: FunDef, taken_globals: set[str]) -> FunDef:
    """Rename binders so all bound names in ``d`` are pairwise distinct.

    Source names are kept when possible; clashes get a numeric suffix.
    Top-level names are avoided so every name in a later induction rule is
    unambiguous.
    """
    used = set(taken_globals) | {p for p, _ in d.params}

    def fresh(name: str) -> str:
        if name != "_" and name not in used:
            used.add(name)
            return name
        base = name if name != "_" else "_u"
        k = 1
        while f"{base}{k}" in used:
            k += 1
        used.add(f"{base}{k}")
        return f"{base}{k}"

    def rn_p(p: PExpr, env: dict[str, str]) -> PExpr:
        if isinstance(p, PVar):
            return replace(p, name=env.get(p.name, p.name))
        if isinstance(p, PCons):
            return replace(p, head=rn_p(p.head, env), tail=rn_p(p.tail, env))
        if isinstance(p, PSome):
            return replace(p, arg=rn_p(p.arg, env))
        if isinstance(p, (PCtor, PCall)):
            return replace(p, args=tuple(rn_p(a, env) for a in p.args))
        if isinstance(p, PBin):
            return replace(p, lhs=rn_p(p.lhs, env), rhs=rn_p(p.rhs, env))
        if isinstance(p, PNot):
            return replace(p, arg=rn_p(p.arg, env))
        return p

    def rn_e(e: Expr, env: dict[str, str]) -> Expr:
        if isinstance(e, Return):
            return replace(e, value=rn_p(e.value, env))
        if isinstance(e, Bind):
            head = rn_e(e.head, env)
            var = fresh(e.var)
            return replace(e, var=var, head=head,
                           body=rn_e(e.body, {**env, e.var: var}))
        if isinstance(e, If):
            return replace(e, cond=rn_p(e.cond, env), then=rn_e(e.then, env),
                           els=rn_e(e.els, env))
        if isinstance(e, Case):
            branches = []
            for pat, body in e.branches:
                vs = tuple(fresh(v) for v in pat.vars)
                inner = {**env, **dict(zip(pat.vars, vs))}
                branches.append((replace(pat, vars=vs), rn_e(body, inner)))
            return replace(e, scrutinee=rn_p(e.scrutinee, env), branches=tuple(branches))
        if isinstance(e, SelfCall):
            return replace(e, args=tuple(rn_p(a, env) for a in e.args))
        if isinstance(e, ExtCall):
            return replace(e, args=tuple(rn_p(a, env) for a in e.args))
        if isinstance(e, RefNew):
            return replace(e, value=rn_p(e.value, env))
        if isinstance(e, RefGet):
            return replace(e, ref=rn_p(e.ref, env))
        if isinstance(e, RefSet):
            return replace(e, ref=rn_p(e.ref, env), value=rn_p(e.value, env))
        raise AssertionError(e)

    return replace(d, body=rn_e(d.body, {}))


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------


class _PureTypeCheck:
    def __init__(self, parser: _Parser):
        self.p = parser

    def check_pure_def(self, d: PureDef):
        env = {name: ty for name, ty in d.params}
        got = self.infer(d.body, env, expected=d.result_type)
        if got != d.result_type:
            raise DslTypeError(
                f"body of {d.name!r} has type {got}, declared {d.result_type}",
                *(d.pos or (None, None)))

    def _instantiate(self, t: Type, subst: dict[str, Type]) -> Type:
        if isinstance(t, TVar):
            return subst[t.name]
        if isinstance(t, TList):
            return TList(self._instantiate(t.elem, subst))
        if isinstance(t, TOption):
            return TOption(self._instantiate(t.elem, subst))
        if isinstance(t, TRef):
            return TRef(self._instantiate(t.elem, subst))
        if isinstance(t, TData):
            return TData(t.name, tuple(self._instantiate(a, subst) for a in t.args))
        return t

    def _match(self, decl_ty: Type, actual: Type, subst: dict[str, Type]) -> bool:
        """Match a declaration type with TVars against a concrete type."""
        if isinstance(decl_ty, TVar):
            if decl_ty.name in subst:
                return subst[decl_ty.name] == actual
            subst[decl_ty.name] = actual
            return True
        if type(decl_ty) is not type(actual):
            return False
        if isinstance(decl_ty, (TList, TOption, TRef)):
            return self._match(decl_ty.elem, actual.elem, subst)
        if isinstance(decl_ty, TData):
            return decl_ty.name == actual.name and all(
                self._match(a, b, subst) for a, b in zip(decl_ty.args, actual.args))
        return True

    def infer(self, p: PExpr, env: dict[str, Type], expected: Type | None = None) -> Type:
        pos = getattr(p, "pos", None) or (None, None)
        if isinstance(p, PVar):
            if p.name not in env:
                raise ScopeError(f"unbound variable {p.name!r}", *pos)
            return env[p.name]
        if isinstance(p, PNat):
            return NAT
        if isinstance(p, PBool):
            return BOOL
        if isinstance(p, PUnit):
            return UNIT
        if isinstance(p, PRefLit):
            if expected is not None and isinstance(expected, TRef):
                return expected
            raise DslTypeError("reference literal needs an expected 'ref' type", *pos)
        if isinstance(p, PNil):
            if expected is not None and isinstance(expected, TList):
                return expected
            raise DslTypeError("cannot infer the element type of []", *pos)
        if isinstance(p, PCons):
            if expected is not None and isinstance(expected, TList):
                h = self.infer(p.head, env, expected.elem)
                self._require(h, expected.elem, p.head)
                t = self.infer(p.tail, env, expected)
                self._require(t, expected, p.tail)
                return expected
            h = self.infer(p.head, env)
            t = self.infer(p.tail, env, TList(h))
            self._require(t, TList(h), p.tail)
            return TList(h)
        if isinstance(p, PNone):
            if expected is not None and isinstance(expected, TOption):
                return expected
            raise DslTypeError("cannot infer the element type of None", *pos)
        if isinstance(p, PSome):
            inner = expected.elem if isinstance(expected, TOption) else None
            a = self.infer(p.arg, env, inner)
            return TOption(a)
        if isinstance(p, PCtor):
            dname, cdecl = self.p.ctors[p.name]
            decl = self.p.datatypes[dname]
            subst: dict[str, Type] = {}
            if expected is not None and isinstance(expected, TData) \
                    and expected.name == dname:
                subst = dict(zip(decl.type_params, expected.args))
            for arg, dty in zip(p.args, cdecl.arg_types):
                want = None
                try:
                    want = self._instantiate(dty, subst)
                except KeyError:
                    pass
                got = self.infer(arg, env, want)
                if not self._match(dty, got, subst):
                    raise DslTypeError(
                        f"argument of {p.name!r} has type {got}, expected {dty}",
                        *(getattr(arg, 'pos', None) or pos))
            try:
                targs = tuple(subst[v] for v in decl.type_params)
            except KeyError as e:
                raise DslTypeError(
                    f"cannot infer type parameter {e.args[0]!r} of {p.name!r}", *pos)
            return TData(dname, targs)
        if isinstance(p, PCall):
            d = self.p.pure_funs[p.name]
            for arg, (_, want) in zip(p.args, d.params):
                got = self.infer(arg, env, want)
                self._require(got, want, arg)
            return d.result_type
        if isinstance(p, PBin):
            if p.op in ("+", "-", "div", "mod"):
                self._require(self.infer(p.lhs, env, NAT), NAT, p.lhs)
                self._require(self.infer(p.rhs, env, NAT), NAT, p.rhs)
                return NAT
            if p.op == "<":
                self._require(self.infer(p.lhs, env, NAT), NAT, p.lhs)
                self._require(self.infer(p.rhs, env, NAT), NAT, p.rhs)
                return BOOL
            if p.op in ("=", "≠"):
                lt = self.infer(p.lhs, env)
                rt = self.infer(p.rhs, env, lt)
                self._require(rt, lt, p.rhs)
                return BOOL
            if p.op in ("and", "or"):
                self._require(self.infer(p.lhs, env, BOOL), BOOL, p.lhs)
                self._require(self.infer(p.rhs, env, BOOL), BOOL, p.rhs)
                return BOOL
        if isinstance(p, PNot):
            self._require(self.infer(p.arg, env, BOOL), BOOL, p.arg)
            return BOOL
        raise AssertionError(p)

    def _require(self, got: Type, want: Type, node):
        if got != want:
            pos = getattr(node, "pos", None) or (None, None)
            raise DslTypeError(f"expected type {want}, got {got}", *pos)


class _FunTypeCheck(_PureTypeCheck):
    def check_fun_def(self, d: FunDef):
        self.fun = d
        env = {name: ty for name, ty in d.params}
        self.check_expr(d.body, env, d.result_type)

    def check_expr(self, e: Expr, env: dict[str, Type], expected: Type):
        pos = getattr(e, "pos", None) or (None, None)
        if isinstance(e, Return):
            got = self.infer(e.value, env, expected)
            self._require(got, expected, e.value)
            return
        if isinstance(e, Bind):
            head_ty = self.infer_expr(e.head, env)
            self.check_expr(e.body, {**env, e.var: head_ty}, expected)
            return
        if isinstance(e, If):
            self._require(self.infer(e.cond, env, BOOL), BOOL, e.cond)
            self.check_expr(e.then, env, expected)
            self.check_expr(e.els, env, expected)
            return
        if isinstance(e, Case):
            st = self.infer(e.scrutinee, env)
            for pat, body in e.branches:
                binds = self._pattern_env(pat, st)
                self.check_expr(body, {**env, **binds}, expected)
            self._check_exhaustive(e, st)
            return
        got = self.infer_expr(e, env)
        if got != expected:
            raise DslTypeError(f"expected type {expected}, got {got}", *pos)

    def infer_expr(self, e: Expr, env: dict[str, Type]) -> Type:
        pos = getattr(e, "pos", None) or (None, None)
        if isinstance(e, Return):
            return self.infer(e.value, env)
        if isinstance(e, SelfCall):
            for arg, (_, want) in zip(e.args, self.fun.params):
                self._require(self.infer(arg, env, want), want, arg)
            return self.fun.result_type
        if isinstance(e, ExtCall):
            callee = self.p.monadic_funs[e.name]
            for arg, (_, want) in zip(e.args, callee.params):
                self._require(self.infer(arg, env, want), want, arg)
            return callee.result_type
        if isinstance(e, RefNew):
            return TRef(self.infer(e.value, env))
        if isinstance(e, RefGet):
            rt = self.infer(e.ref, env)
            if not isinstance(rt, TRef):
                raise DslTypeError(f"'!' expects a reference, got {rt}", *pos)
            return rt.elem
        if isinstance(e, RefSet):
            rt = self.infer(e.ref, env)
            if not isinstance(rt, TRef):
                raise DslTypeError(f"':=' expects a reference, got {rt}", *pos)
            self._require(self.infer(e.value, env, rt.elem), rt.elem, e.value)
            return UNIT
        if isinstance(e, Bind):
            head_ty = self.infer_expr(e.head, env)
            return self.infer_expr(e.body, {**env, e.var: head_ty})
        if isinstance(e, If):
            self._require(self.infer(e.cond, env, BOOL), BOOL, e.cond)
            t1 = self.infer_expr(e.then, env)
            self.check_expr(e.els, env, t1)
            return t1
        if isinstance(e, Case):
            st = self.infer(e.scrutinee, env)
            tys = []
            for pat, body in e.branches:
                binds = self._pattern_env(pat, st)
                tys.append(self.infer_expr(body, {**env, **binds}))
            for t in tys[1:]:
                if t != tys[0]:
                    raise DslTypeError("case branches have different types", *pos)
            self._check_exhaustive(e, st)
            return tys[0]
        raise AssertionError(e)

    def _pattern_env(self, pat: Pattern, scrut_ty: Type) -> dict[str, Type]:
        pos = pat.pos or (None, None)
        if pat.ctor == "None":
            if not isinstance(scrut_ty, TOption):
                raise DslTypeError(f"option pattern against {scrut_ty}", *pos)
            return {}
        if pat.ctor == "Some":
            if not isinstance(scrut_ty, TOption):
                raise DslTypeError(f"option pattern against {scrut_ty}", *pos)
            return {pat.vars[0]: scrut_ty.elem}
        dname, cdecl = self.p.ctors[pat.ctor]
        if not isinstance(scrut_ty, TData) or scrut_ty.name != dname:
            raise DslTypeError(
                f"pattern {pat.ctor!r} belongs to {dname!r}, scrutinee has type {scrut_ty}",
                *pos)
        decl = self.p.datatypes[dname]
        subst = dict(zip(decl.type_params, scrut_ty.args))
        return {v: self._instantiate(t, subst)
                for v, t in zip(pat.vars, cdecl.arg_types)}

    def _check_exhaustive(self, e: Case, scrut_ty: Type):
        pos = e.pos or (None, None)
        covered = {pat.ctor for pat, _ in e.branches}
        if isinstance(scrut_ty, TOption):
            missing = {"None", "Some"} - covered
        elif isinstance(scrut_ty, TData):
            missing = {c.name for c in self.p.datatypes[scrut_ty.name].ctors} - covered
        else:
            raise DslTypeError(f"cannot match on values of type {scrut_ty}", *pos)
        if missing:
            raise DslTypeError(
                "non-exhaustive case: missing " + ", ".join(sorted(missing)), *pos)


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def parse_program(source: str) -> Program:
    """Parse, scope-check, monad-check, and type-check a program.

    Binders are alpha-renamed to be unique within each definition.  Raises
    ParseError, ScopeError, MonadError, or DslTypeError with a position.
    """
    return _Parser(source).program()


def parse_pexpr(source: str, program: Program | None = None) -> PExpr:
    """Parse a closed pure expression (used for CLI values and Q specs)."""
    p = _Parser("")
    if program is not None:
        for d in program.data_decls:
            p.datatypes[d.name] = d
            for c in d.ctors:
                p.ctors[c.name] = (d.name, c)
        for pd in program.pure_defs:
            p.pure_funs[pd.name] = pd
    p.toks = tokenize(source)
    p.i = 0
    e = p.pexpr({})
    p.expect("eof")
    return e


def parse_values(source: str, program: Program | None = None) -> list[PExpr]:
    """Parse a whitespace-separated sequence of value literals.

    Identifiers of the form ``refN`` denote reference literals.
    """
    p = _Parser("")
    if program is not None:
        for d in program.data_decls:
            p.datatypes[d.name] = d
            for c in d.ctors:
                p.ctors[c.name] = (d.name, c)
    toks = []
    for t in tokenize(source):
        m = _REF_LIT.match(t.text) if t.kind == "ident" else None
        toks.append(t if m is None else Token("reflit", t.text, t.line, t.col))
    p.toks = toks
    out = []
    orig_patom = p.patom

    def patom(scope, comp=False):
        t = p.peek()
        if t.kind == "reflit":
            p.next()
            return PRefLit(int(t.text[3:]), pos=(t.line, t.col))
        return orig_patom(scope, comp)

    p.patom = patom
    while not p.at("eof"):
        out.append(p.pexpr({}))
    return out


# ---------------------------------------------------------------------------
# Free variables
# ---------------------------------------------------------------------------


def free_vars(e: Union[Expr, PExpr]) -> set[str]:
    """The set of variable names occurring free in a (pure) expression."""
    if isinstance(e, PExpr):
        if isinstance(e, PVar):
            return {e.name}
        if isinstance(e, PCons):
            return free_vars(e.head) | free_vars(e.tail)
        if isinstance(e, PSome):
            return free_vars(e.arg)
        if isinstance(e, (PCtor, PCall)):
            return set().union(*(free_vars(a) for a in e.args)) if e.args else set()
        if isinstance(e, PBin):
            return free_vars(e.lhs) | free_vars(e.rhs)
        if isinstance(e, PNot):
            return free_vars(e.arg)
        return set()
    if isinstance(e, Return):
        return free_vars(e.value)
    if isinstance(e, Bind):
        return free_vars(e.head) | (free_vars(e.body) - {e.var})
    if isinstance(e, If):
        return free_vars(e.cond) | free_vars(e.then) | free_vars(e.els)
    if isinstance(e, Case):
        out = free_vars(e.scrutinee)
        for pat, body in e.branches:
            out |= free_vars(body) - set(pat.vars)
        return out
    if isinstance(e, (SelfCall, ExtCall)):
        return set().union(*(free_vars(a) for a in e.args)) if e.args else set()
    if isinstance(e, RefNew):
        return free_vars(e.value)
    if isinstance(e, RefGet):
        return free_vars(e.ref)
    if isinstance(e, RefSet):
        return free_vars(e.ref) | free_vars(e.value)
    raise AssertionError(e)


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------

# Precedence levels for pure expressions, matching the parser.
_PREC = {"or": 1, "and": 2, "=": 4, "≠": 4, "<": 4, "#": 5, "+": 6, "-": 6,
         "div": 7, "mod": 7}


def pretty_pexpr(p: PExpr, prec: int = 0) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PNat):
        return str(p.value)
    if isinstance(p, PBool):
        return "true" if p.value else "false"
    if isinstance(p, PUnit):
        return "()"
    if isinstance(p, PRefLit):
        return f"ref{p.rid}"
    if isinstance(p, PNil):
        return "[]"
    if isinstance(p, PCons):
        # Re-sugar a literal spine into list brackets.
        items, cur = [], p
        while isinstance(cur, PCons):
            items.append(cur.head)
            cur = cur.tail
        if isinstance(cur, PNil):
            return "[" + ", ".join(pretty_pexpr(x) for x in items) + "]"
        lvl = _PREC["#"]
        s = f"{pretty_pexpr(p.head, lvl + 1)} # {pretty_pexpr(p.tail, lvl)}"
        return f"({s})" if prec > lvl else s
    if isinstance(p, PNone):
        return "None"
    if isinstance(p, PSome):
        return f"Some({pretty_pexpr(p.arg)})"
    if isinstance(p, PCtor):
        if not p.args:
            return p.name
        return p.name + "(" + ", ".join(pretty_pexpr(a) for a in p.args) + ")"
    if isinstance(p, PCall):
        return p.name + "(" + ", ".join(pretty_pexpr(a) for a in p.args) + ")"
    if isinstance(p, PBin):
        lvl = _PREC[p.op]
        if p.op == "#":  # right-assoc, handled by PCons
            pass
        left = pretty_pexpr(p.lhs, lvl)
        right = pretty_pexpr(p.rhs, lvl + 1)
        if p.op in ("=", "≠", "<"):  # non-assoc
            left = pretty_pexpr(p.lhs, lvl + 1)
        s = f"{left} {p.op} {right}"
        return f"({s})" if prec > lvl else s
    if isinstance(p, PNot):
        s = f"not {pretty_pexpr(p.arg, 3)}"
        return f"({s})" if prec > 3 else s
    raise AssertionError(p)


def pretty(e: Union[Expr, PExpr], max_width: int | None = None) -> str:
    """Render an expression on a single line.

    Output re-parses to an alpha-equivalent expression.  Recursive calls
    print as ⟨self⟩ because a bare expression does not know its function's
    name; pretty_expr_named and pretty_program substitute the real name,
    and whole programs round-trip through parse_program.
    """
    if isinstance(e, PExpr):
        s = pretty_pexpr(e)
    else:
        s = _pretty_expr(e, in_branch=False)
    if max_width is not None and len(s) > max_width:
        s = s[: max_width - 1] + "…"
    return s


def _pretty_expr(e: Expr, in_branch: bool) -> str:
    if isinstance(e, Return):
        return f"return {pretty_pexpr(e.value, 8)}"
    if isinstance(e, Bind):
        stmts = []
        cur: Expr = e
        while isinstance(cur, Bind):
            head = _pretty_expr(cur.head, in_branch=False)
            if cur.var.startswith("_") and cur.var not in free_vars(cur.body):
                stmts.append(head)
            else:
                stmts.append(f"{cur.var} ← {head}")
            cur = cur.body
        stmts.append(_pretty_expr(cur, in_branch=False))
        return "do " + "; ".join(stmts) + " done"
    if isinstance(e, If):
        s = (f"if {pretty_pexpr(e.cond)} then {_pretty_expr(e.then, in_branch)} "
             f"else {_pretty_expr(e.els, in_branch)}")
        return s
    if isinstance(e, Case):
        parts = []
        for pat, body in e.branches:
            pv = pat.ctor + (f"({', '.join(pat.vars)})" if pat.vars else "")
            parts.append(f"{pv} ⇒ {_pretty_expr(body, in_branch=True)}")
        s = f"case {pretty_pexpr(e.scrutinee)} of " + " | ".join(parts)
        # A case nested in a branch would swallow the outer branches.
        return f"({s})" if in_branch else s
    if isinstance(e, SelfCall):
        return "⟨self⟩(" + ", ".join(pretty_pexpr(a) for a in e.args) + ")"
    if isinstance(e, ExtCall):
        return e.name + "(" + ", ".join(pretty_pexpr(a) for a in e.args) + ")"
    if isinstance(e, RefNew):
        return f"ref {pretty_pexpr(e.value, 99)}"
    if isinstance(e, RefGet):
        return f"!{pretty_pexpr(e.ref, 99)}"
    if isinstance(e, RefSet):
        return f"{pretty_pexpr(e.ref, 99)} := {pretty_pexpr(e.value, 8)}"
    raise AssertionError(e)


def pretty_expr_named(e: Expr, self_name: str) -> str:
    """Like pretty(), but prints recursive calls with the function's name."""
    return pretty(e).replace("⟨self⟩(", self_name + "(")


def pretty_type(t: Type) -> str:
    return str(t)


def pretty_program(prog: Program) -> str:
    """Multi-line concrete syntax; parse_program(pretty_program(p)) ≅ p."""
    chunks = []
    for d in prog.data_decls:
        ctors = " | ".join(
            c.name + "".join(" " + _atomize(t) for t in c.arg_types)
            for c in d.ctors)
        params = "".join(" " + p for p in d.type_params)
        chunks.append(f"datatype {d.name}{params} = {ctors}")
    for d in prog.pure_defs:
        ps = ", ".join(f"{n} : {t}" for n, t in d.params)
        chunks.append(f"pure fun {d.name}({ps}) : {d.result_type} = "
                      f"{pretty_pexpr(d.body)}")
    for d in prog.fun_defs:
        ps = ", ".join(f"{n} : {t}" for n, t in d.params)
        body = pretty_expr_named(d.body, d.name)
        chunks.append(f"{d.monad} fun {d.name}({ps}) : {d.result_type} =\n  {body}")
    return "\n\n".join(chunks) + "\n"


# ---------------------------------------------------------------------------
# Alpha-equivalence
# ---------------------------------------------------------------------------


def _alpha_p(a: PExpr, b: PExpr, env: dict[str, str]) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, PVar):
        return env.get(a.name, a.name) == b.name
    if isinstance(a, (PNat, PBool)):
        return a.value == b.value
    if isinstance(a, PRefLit):
        return a.rid == b.rid
    if isinstance(a, PCons):
        return _alpha_p(a.head, b.head, env) and _alpha_p(a.tail, b.tail, env)
    if isinstance(a, PSome):
        return _alpha_p(a.arg, b.arg, env)
    if isinstance(a, (PCtor, PCall)):
        return a.name == b.name and len(a.args) == len(b.args) and all(
            _alpha_p(x, y, env) for x, y in zip(a.args, b.args))
    if isinstance(a, PBin):
        return a.op == b.op and _alpha_p(a.lhs, b.lhs, env) and _alpha_p(a.rhs, b.rhs, env)
    if isinstance(a, PNot):
        return _alpha_p(a.arg, b.arg, env)
    return True  # PUnit, PNil, PNone


def _alpha_e(a: Expr, b: Expr, env: dict[str, str]) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Return):
        return _alpha_p(a.value, b.value, env)
    if isinstance(a, Bind):
        return _alpha_e(a.head, b.head, env) and \
            _alpha_e(a.body, b.body, {**env, a.var: b.var})
    if isinstance(a, If):
        return _alpha_p(a.cond, b.cond, env) and _alpha_e(a.then, b.then, env) \
            and _alpha_e(a.els, b.els, env)
    if isinstance(a, Case):
        if len(a.branches) != len(b.branches) or not _alpha_p(a.scrutinee, b.scrutinee, env):
            return False
        for (pa, ea), (pb, eb) in zip(a.branches, b.branches):
            if pa.ctor != pb.ctor or len(pa.vars) != len(pb.vars):
                return False
            if not _alpha_e(ea, eb, {**env, **dict(zip(pa.vars, pb.vars))}):
                return False
        return True
    if isinstance(a, (SelfCall, ExtCall)):
        if isinstance(a, ExtCall) and a.name != b.name:
            return False
        return len(a.args) == len(b.args) and all(
            _alpha_p(x, y, env) for x, y in zip(a.args, b.args))
    if isinstance(a, RefNew):
        return _alpha_p(a.value, b.value, env)
    if isinstance(a, RefGet):
        return _alpha_p(a.ref, b.ref, env)
    if isinstance(a, RefSet):
        return _alpha_p(a.ref, b.ref, env) and _alpha_p(a.value, b.value, env)
    raise AssertionError(a)


def alpha_equivalent(a: Union[Program, FunDef, Expr], b) -> bool:
    """Structural equality up to renaming of bound variables."""
    if isinstance(a, Program) and isinstance(b, Program):
        return (a.data_decls == b.data_decls and a.pure_defs == b.pure_defs
                and len(a.fun_defs) == len(b.fun_defs)
                and all(alpha_equivalent(x, y)
                        for x, y in zip(a.fun_defs, b.fun_defs)))
    if isinstance(a, FunDef) and isinstance(b, FunDef):
        if (a.name != b.name or a.monad != b.monad or a.result_type != b.result_type
                or len(a.params) != len(b.params)
                or any(ta != tb for (_, ta), (_, tb) in zip(a.params, b.params))):
            return False
        env = {pa: pb for (pa, _), (pb, _) in zip(a.params, b.params)}
        return _alpha_e(a.body, b.body, env)
    if isinstance(a, Expr) and isinstance(b, Expr):
        return _alpha_e(a, b, {})
    if isinstance(a, PExpr) and isinstance(b, PExpr):
        return _alpha_p(a, b, {})
    return False
