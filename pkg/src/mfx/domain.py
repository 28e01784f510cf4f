"""Runtime values, heaps, and computation outcomes with an explicit bottom.

The option monad's order is flat: ``a ⊑ b`` iff ``a`` is Bottom or ``a = b``.
The heap monad's order is the pointwise lifting of the same flat order over
per-input outcomes; the evaluator checks it by sampling heaps, so this module
only ever compares outcomes at a fixed input.

Bottom identifies divergence with irrecoverable failure and carries no heap;
heaps are persistent (updates return fresh heaps) and all values are
immutable, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DanglingRef, NotStabilized
from . import syntax
from .syntax import (PBool, PCons, PCtor, PExpr, PNat, PNil, PNone, PRefLit,
                     PSome, PUnit, parse_values)

# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Value:
    pass


@dataclass(frozen=True)
class VUnit(Value):
    def __str__(self):
        return "()"


@dataclass(frozen=True)
class VBool(Value):
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class VNat(Value):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("naturals are non-negative")

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class VList(Value):
    items: tuple[Value, ...]

    def __str__(self):
        return "[" + ", ".join(str(v) for v in self.items) + "]"


@dataclass(frozen=True)
class VNone(Value):
    def __str__(self):
        return "None"


@dataclass(frozen=True)
class VSome(Value):
    value: Value

    def __str__(self):
        return f"Some({self.value})"


@dataclass(frozen=True)
class VCtor(Value):
    name: str
    args: tuple[Value, ...]

    def __str__(self):
        if not self.args:
            return self.name
        return self.name + "(" + ", ".join(str(v) for v in self.args) + ")"


@dataclass(frozen=True)
class VRef(Value):
    """An opaque reference; equality is id equality (pointer equality)."""

    rid: int

    def __str__(self):
        return f"ref{self.rid}"


UNIT_V = VUnit()
TRUE, FALSE = VBool(True), VBool(False)


def render_value(v: Value) -> str:
    """Canonical text form, in DSL literal syntax."""
    return str(v)


def value_to_pexpr(v: Value) -> PExpr:
    """Embed a runtime value back into pure-expression syntax."""
    if isinstance(v, VUnit):
        return PUnit()
    if isinstance(v, VBool):
        return PBool(v.value)
    if isinstance(v, VNat):
        return PNat(v.value)
    if isinstance(v, VList):
        out: PExpr = PNil()
        for item in reversed(v.items):
            out = PCons(value_to_pexpr(item), out)
        return out
    if isinstance(v, VNone):
        return PNone()
    if isinstance(v, VSome):
        return PSome(value_to_pexpr(v.value))
    if isinstance(v, VCtor):
        return PCtor(v.name, tuple(value_to_pexpr(a) for a in v.args))
    if isinstance(v, VRef):
        return PRefLit(v.rid)
    raise AssertionError(v)


def pexpr_to_value(p: PExpr) -> Value:
    """Convert a closed literal pure expression into a value.

    Only literal forms are accepted; variables, calls, and operators are
    rejected (used for CLI arguments and heap files).
    """
    if isinstance(p, PUnit):
        return UNIT_V
    if isinstance(p, PBool):
        return VBool(p.value)
    if isinstance(p, PNat):
        return VNat(p.value)
    if isinstance(p, PNil):
        return VList(())
    if isinstance(p, PCons):
        tail = pexpr_to_value(p.tail)
        if not isinstance(tail, VList):
            raise ValueError("cons onto a non-list value")
        return VList((pexpr_to_value(p.head),) + tail.items)
    if isinstance(p, PNone):
        return VNone()
    if isinstance(p, PSome):
        return VSome(pexpr_to_value(p.arg))
    if isinstance(p, PCtor):
        return VCtor(p.name, tuple(pexpr_to_value(a) for a in p.args))
    if isinstance(p, PRefLit):
        return VRef(p.rid)
    raise ValueError(f"not a value literal: {syntax.pretty_pexpr(p)}")


# ---------------------------------------------------------------------------
# Heaps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Heap:
    """A finite store of reference cells; equality is extensional.

    ``cells`` is kept sorted by id so that rendering and hashing are
    canonical.  Every id in the store is below ``next_id``.
    """

    cells: tuple[tuple[int, Value], ...] = ()
    next_id: int = 0

    def __post_init__(self):
        ids = [i for i, _ in self.cells]
        if ids != sorted(set(ids)):
            raise ValueError("heap cells must be sorted and unique")
        if any(i >= self.next_id for i in ids):
            raise ValueError("heap id not below next_id")

    def lookup(self, rid: int) -> Value:
        for i, v in self.cells:
            if i == rid:
                return v
        raise DanglingRef(f"ref{rid} is not allocated")

    def contains(self, rid: int) -> bool:
        return any(i == rid for i, _ in self.cells)

    def ids(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.cells)

    def __str__(self):
        body = ", ".join(f"{i} ↦ {v}" for i, v in self.cells)
        return "{" + body + f"; next={self.next_id}" + "}"


EMPTY_HEAP = Heap()


def heap_alloc(h: Heap, v: Value) -> tuple[VRef, Heap]:
    """Allocate a fresh cell; the new id is ``h.next_id``."""
    rid = h.next_id
    return VRef(rid), Heap(h.cells + ((rid, v),), rid + 1)


def heap_get(h: Heap, r: VRef) -> Value:
    """Read a cell; raises DanglingRef if ``r`` is unallocated."""
    return h.lookup(r.rid)


def heap_set(h: Heap, r: VRef, v: Value) -> Heap:
    """Write a cell, leaving everything else unchanged."""
    if not h.contains(r.rid):
        raise DanglingRef(f"ref{r.rid} is not allocated")
    cells = tuple((i, v if i == r.rid else old) for i, old in h.cells)
    return Heap(cells, h.next_id)


def _value_refs(v: Value) -> set[int]:
    if isinstance(v, VRef):
        return {v.rid}
    if isinstance(v, VList):
        return set().union(*(_value_refs(x) for x in v.items)) if v.items else set()
    if isinstance(v, VSome):
        return _value_refs(v.value)
    if isinstance(v, VCtor):
        return set().union(*(_value_refs(a) for a in v.args)) if v.args else set()
    return set()


def heap_closed(h: Heap, *roots: Value) -> bool:
    """True if no reference reachable from the store or the roots dangles."""
    stored = set(h.ids())
    mentioned = set().union(*(_value_refs(v) for _, v in h.cells)) if h.cells else set()
    for r in roots:
        mentioned |= _value_refs(r)
    return mentioned <= stored


def render_heap(h: Heap) -> str:
    return str(h)


def parse_heap(text: str, program=None) -> Heap:
    """Parse the heap literal file format: one ``id ↦ value`` per line plus
    ``next=n``.  Blank lines and ``--`` comments are allowed.  Pass the
    program whose datatypes the stored values use."""
    cells: list[tuple[int, Value]] = []
    next_id = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("--")[0].strip()
        if not line:
            continue
        compact = line.replace(" ", "")
        if compact.startswith("next="):
            if next_id is not None:
                raise ValueError(f"line {lineno}: duplicate next=")
            next_id = int(compact[5:])
            continue
        sep = "↦" if "↦" in line else "|->"
        if sep not in line:
            raise ValueError(f"line {lineno}: expected 'id ↦ value' or 'next=n'")
        lhs, rhs = line.split(sep, 1)
        rid = int(lhs.strip())
        vals = parse_values(rhs, program)
        if len(vals) != 1:
            raise ValueError(f"line {lineno}: expected exactly one value")
        cells.append((rid, pexpr_to_value(vals[0])))
    if next_id is None:
        raise ValueError("heap file must end with next=n")
    cells.sort(key=lambda c: c[0])
    h = Heap(tuple(cells), next_id)
    if not heap_closed(h):
        raise ValueError("heap file contains a dangling reference")
    return h


# ---------------------------------------------------------------------------
# Outcomes and the flat order
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    pass


@dataclass(frozen=True)
class Ok(Outcome):
    """Successful heap-monad run: a value and the final heap."""

    value: Value
    heap: Heap

    def __str__(self):
        return f"Ok({self.value}, {self.heap})"


@dataclass(frozen=True)
class OkPure(Outcome):
    """Successful option-monad run."""

    value: Value

    def __str__(self):
        return f"OkPure({self.value})"


@dataclass(frozen=True)
class Bottom(Outcome):
    """Divergence or failure; carries no value and no heap."""

    def __str__(self):
        return "Bottom"


BOTTOM = Bottom()


def outcome_le(a: Outcome, b: Outcome) -> bool:
    """The flat order on per-input outcomes: a ⊑ b iff a is Bottom or a = b."""
    return a == BOTTOM or a == b


def render_outcome(o: Outcome) -> str:
    return str(o)


# ---------------------------------------------------------------------------
# Chains and least upper bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chain:
    """A finite prefix of an ascending sequence of outcomes.

    Index i holds the outcome of the i-th approximant at a fixed input.
    """

    elems: tuple[Outcome, ...]

    def is_chain(self) -> bool:
        return all(outcome_le(a, b) for a, b in zip(self.elems, self.elems[1:]))

    def __len__(self):
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)


def lub_eventually_constant(c: Chain) -> Outcome:
    """The least upper bound of a flat chain that has stabilized.

    Flat chains step up at most once, so the last element is the lub as soon
    as it is not Bottom.  A Bottom-only prefix raises NotStabilized: the
    chain may still rise with more fuel.
    """
    if not c.elems:
        raise NotStabilized("empty chain")
    last = c.elems[-1]
    if last == BOTTOM:
        raise NotStabilized(
            f"chain is Bottom through index {len(c.elems) - 1}")
    return last
