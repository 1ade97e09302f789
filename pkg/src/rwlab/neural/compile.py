"""Compilation of (term, cursor) observations into straight-line programs.

A program is a list of rows evaluated in order; each row either loads a leaf
vector, loads a machine-introduced variable vector from the episode context,
or applies one of the two-layer nets to up to three earlier rows. Identical
subterm objects share one row (the embedding is a pure function of
structure), so the base program of a term is cached on the term itself and a
cursor position is spliced in afterwards: a cursor-net row wrapping the
addressed node plus fresh copies of the rows along the path to the root.
"""

from __future__ import annotations

import numpy as np

from ..terms import FRESH, Term, UnknownSymbolError, fresh_index
from .layout import ModelLayout, ROW_FRESH, ROW_LEAF, ROW_NET


class Program:
    __slots__ = ("code", "arg", "c0", "c1", "c2", "n_rows", "fresh_hi")

    def __init__(self, code, arg, c0, c1, c2, fresh_hi):
        self.code = code
        self.arg = arg
        self.c0 = c0
        self.c1 = c1
        self.c2 = c2
        self.n_rows = len(code)
        self.fresh_hi = fresh_hi


class _BaseProgram:
    __slots__ = ("code", "arg", "c0", "c1", "c2", "row_of", "fresh_hi")

    def __init__(self, code, arg, c0, c1, c2, row_of, fresh_hi):
        self.code = code
        self.arg = arg
        self.c0 = c0
        self.c1 = c1
        self.c2 = c2
        self.row_of = row_of
        self.fresh_hi = fresh_hi


def _base_program(term: Term, layout: ModelLayout) -> _BaseProgram:
    cached = term._prog
    if cached is not None and cached[0] is layout:
        return cached[1]
    code: list[int] = []
    arg: list[int] = []
    c0: list[int] = []
    c1: list[int] = []
    c2: list[int] = []
    row_of: dict[int, int] = {}
    fresh_hi = 0

    def add(op, a, ch0=-1, ch1=-1, ch2=-1) -> int:
        code.append(op)
        arg.append(a)
        c0.append(ch0)
        c1.append(ch1)
        c2.append(ch2)
        return len(code) - 1

    stack = [term]
    while stack:
        node = stack[-1]
        if id(node) in row_of:
            stack.pop()
            continue
        pending = [a for a in node.args if id(a) not in row_of]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        if node.args:
            net = layout.net_ids.get(f"op:{node.sym.name}")
            if net is None:
                raise UnknownSymbolError(f"no net for operator '{node.sym.name}'", 0)
            ch = [row_of[id(a)] for a in node.args]
            ch += [-1] * (3 - len(ch))
            row = add(ROW_NET, net, *ch)
        elif node.sym.kind == FRESH:
            k = fresh_index(node.sym)
            fresh_hi = max(fresh_hi, k + 1)
            raw = add(ROW_FRESH, k)
            row = add(ROW_NET, layout.fresh_net_id, raw)
        else:
            leaf = layout.leaf_rows.get(node.sym.name)
            if leaf is None:
                raise UnknownSymbolError(f"no leaf vector for '{node.sym.name}'", 0)
            row = add(ROW_LEAF, leaf)
        row_of[id(node)] = row

    base = _BaseProgram(
        np.asarray(code, dtype=np.int8),
        np.asarray(arg, dtype=np.int32),
        np.asarray(c0, dtype=np.int32),
        np.asarray(c1, dtype=np.int32),
        np.asarray(c2, dtype=np.int32),
        row_of,
        fresh_hi,
    )
    term._prog = (layout, base)
    return base


def compile_state(term: Term, cursor: tuple[int, ...], layout: ModelLayout) -> Program:
    """Program computing the embedding of `term` with the cursor at `cursor`."""
    base = _base_program(term, layout)
    spine = [term]
    for i in cursor:
        spine.append(spine[-1].args[i])

    extra = len(cursor) + 1
    n = len(base.code)
    code = np.empty(n + extra, dtype=np.int8)
    arg = np.empty(n + extra, dtype=np.int32)
    c0 = np.empty(n + extra, dtype=np.int32)
    c1 = np.empty(n + extra, dtype=np.int32)
    c2 = np.empty(n + extra, dtype=np.int32)
    code[:n] = base.code
    arg[:n] = base.arg
    c0[:n] = base.c0
    c1[:n] = base.c1
    c2[:n] = base.c2

    # Wrap the addressed node, then re-emit its ancestors with the one child
    # redirected; other occurrences of shared nodes keep their original rows.
    code[n] = ROW_NET
    arg[n] = layout.cursor_net_id
    c0[n] = base.row_of[id(spine[-1])]
    c1[n] = -1
    c2[n] = -1
    prev = n
    row = n + 1
    for depth in range(len(cursor) - 1, -1, -1):
        node = spine[depth]
        orig = base.row_of[id(node)]
        code[row] = ROW_NET
        arg[row] = arg[orig]
        c0[row] = c0[orig]
        c1[row] = c1[orig]
        c2[row] = c2[orig]
        child = cursor[depth]
        if child == 0:
            c0[row] = prev
        elif child == 1:
            c1[row] = prev
        else:
            c2[row] = prev
        prev = row
        row += 1
    return Program(code, arg, c0, c1, c2, base.fresh_hi)
