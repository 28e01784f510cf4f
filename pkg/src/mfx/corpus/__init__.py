"""Bundled example programs and heap files.

These are the acceptance surface: trace (option monad, with step supplied
as a prior pure definition), traverse over heap-allocated linked lists, and
occurs over mutable first-order terms, plus heap literals for the acyclic,
shared-variable, and cyclic cases.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..domain import Heap, parse_heap
from ..syntax import Program, parse_program

PROGRAMS = ("trace", "traverse", "occurs")
HEAPS = ("acyclic", "cyclic", "shared", "cyclic_term")

# Which program's datatypes each heap file uses.
_HEAP_PROGRAM = {"acyclic": "traverse", "cyclic": "traverse",
                 "shared": "occurs", "cyclic_term": "occurs"}


def corpus_path(filename: str) -> Path:
    """Filesystem path of a bundled corpus file."""
    p = resources.files(__package__) / filename
    return Path(str(p))


def load_program(name: str) -> Program:
    """Parse one of the bundled programs ('trace', 'traverse', 'occurs')."""
    text = corpus_path(f"{name}.mfx").read_text(encoding="utf-8")
    return parse_program(text)


def load_heap(name: str) -> Heap:
    """Parse one of the bundled heap files (e.g. 'acyclic')."""
    prog = load_program(_HEAP_PROGRAM[name])
    return parse_heap(corpus_path(f"{name}.heap").read_text(encoding="utf-8"), prog)
