"""Legal-rewrite scanning with a compiled fast path.

Finding which rewrite actions apply at the cursor is one of the two hot
loops of the whole workbench (the other is the policy network). Two
interchangeable implementations live behind `build_scanner`:

- a pure-Python scanner that indexes rules by the root symbol of their
  matched side and runs the recursive matcher on the few candidates, and
- a compiled scanner (``rwlab._core``) that matches precompiled pattern
  instruction strings against a cached flat preorder encoding of the term.

`set_backend` / `active_backend` control the selection; the environment
variable ``RWLAB_BACKEND`` (``auto``/``c``/``py``) sets the initial choice.
Both implementations must return identical action-id sets.
"""

from __future__ import annotations

import os

import numpy as np

from .terms import FRESH, PATTERN, Term, fresh_index, match

try:
    from . import _core
except ImportError:
    _core = None

_BACKEND = os.environ.get("RWLAB_BACKEND", "auto")
if _BACKEND not in ("auto", "c", "py"):
    raise ValueError(f"RWLAB_BACKEND must be auto, c or py, not {_BACKEND!r}")
if _BACKEND == "c" and _core is None:
    raise ImportError("RWLAB_BACKEND=c but the compiled rwlab._core module is not built")


def set_backend(name: str) -> None:
    """Force 'c' or 'py', or 'auto' to prefer the compiled module."""
    global _BACKEND
    if name not in ("auto", "c", "py"):
        raise ValueError(name)
    if name == "c" and _core is None:
        raise ImportError("compiled rwlab._core module is not built")
    _BACKEND = name


def active_backend() -> str:
    if _BACKEND == "py":
        return "py"
    if _core is not None:
        return "c"
    return "py"


def compiled_module():
    return _core


# --- flat term encoding -----------------------------------------------------
#
# A term is flattened to parallel preorder arrays: symbol code, subtree size
# and the Term object at each position. Machine-introduced variables get
# negative codes (-2 - index) so the code table stays fixed per signature.


class FlatTerm:
    __slots__ = ("sym", "size", "refs")

    def __init__(self, sym: np.ndarray, size: np.ndarray, refs: list[Term]):
        self.sym = sym
        self.size = size
        self.refs = refs


def flat_encode(term: Term, codes: dict[str, int], codes_token: int) -> FlatTerm:
    cached = term._flat
    if cached is not None and cached[0] == codes_token:
        return cached[1]
    n = term.size
    sym = np.empty(n, dtype=np.int32)
    size = np.empty(n, dtype=np.int32)
    refs: list[Term] = [term] * n
    stack = [term]
    i = 0
    while stack:
        t = stack.pop()
        code = codes.get(t.sym.name)
        if code is None:
            if t.sym.kind != FRESH:
                raise KeyError(f"symbol '{t.sym.name}' has no code")
            code = -2 - fresh_index(t.sym)
        sym[i] = code
        size[i] = t.size
        refs[i] = t
        i += 1
        for a in reversed(t.args):
            stack.append(a)
    flat = FlatTerm(sym, size, refs)
    term._flat = (codes_token, flat)
    return flat


def flat_position(flat: FlatTerm, path: tuple[int, ...]) -> int:
    """Preorder index of the node addressed by `path`."""
    i = 0
    for child in path:
        i += 1
        for _ in range(child):
            i += int(flat.size[i])
    return i


def _compile_pattern(lhs: Term, codes: dict[str, int]):
    kinds: list[int] = []
    vals: list[int] = []
    slots: dict[str, int] = {}
    stack = [lhs]
    while stack:
        node = stack.pop()
        if node.sym.kind == PATTERN:
            if node.sym.name in slots:
                kinds.append(2)
                vals.append(slots[node.sym.name])
            else:
                slots[node.sym.name] = len(slots)
                kinds.append(1)
                vals.append(slots[node.sym.name])
        else:
            kinds.append(0)
            vals.append(codes[node.sym.name])
            for a in reversed(node.args):
                stack.append(a)
    if len(slots) > 16:  # compiled matcher register file
        raise ValueError(f"pattern has {len(slots)} variables, limit is 16")
    return kinds, vals, len(slots)


class _CompiledScanner:
    """Per-action-table matcher state shared by both scanner backends."""

    def __init__(self, actions):
        names: list[str] = []
        seen: set[str] = set()
        for act in actions:
            for rule in act.rules:
                for node in rule.lhs.nodes():
                    if node.sym.kind != PATTERN and node.sym.name not in seen:
                        seen.add(node.sym.name)
                        names.append(node.sym.name)
                for node in rule.rhs.nodes():
                    if node.sym.kind != PATTERN and node.sym.name not in seen:
                        seen.add(node.sym.name)
                        names.append(node.sym.name)
        self.codes = {name: i for i, name in enumerate(sorted(names))}
        self.codes_token = id(self)

        self.always_ids: list[int] = []
        by_root: dict[str, list[tuple[int, Term]]] = {}
        self.py_by_root: dict[str, list[tuple[int, Term]]] = {}
        for act in actions:
            if act.kind != "rewrite":
                continue
            for rule in act.rules:
                if rule.lhs.sym.kind == PATTERN:
                    self.always_ids.append(act.id)
                else:
                    by_root.setdefault(rule.lhs.sym.name, []).append((act.id, rule.lhs))
                    self.py_by_root.setdefault(rule.lhs.sym.name, []).append((act.id, rule.lhs))

        # Concatenated instruction strings per root symbol, for the compiled
        # matcher: (kinds, vals, offsets, action ids).
        self.c_by_code: dict[int, tuple] = {}
        for root, cands in by_root.items():
            kinds: list[int] = []
            vals: list[int] = []
            offs: list[int] = [0]
            ids: list[int] = []
            for aid, lhs in cands:
                k, v, _ = _compile_pattern(lhs, self.codes)
                kinds.extend(k)
                vals.extend(v)
                offs.append(len(kinds))
                ids.append(aid)
            self.c_by_code[self.codes[root]] = (
                np.asarray(kinds, dtype=np.int8),
                np.asarray(vals, dtype=np.int32),
                np.asarray(offs, dtype=np.int32),
                np.asarray(ids, dtype=np.int32),
            )


def build_scanner(actions):
    """A callable (term, cursor, node) -> mutable list of rewrite action ids."""
    state = _CompiledScanner(actions)
    if active_backend() == "c":
        return _make_c_scanner(state)
    return _make_py_scanner(state)


def _make_py_scanner(state: _CompiledScanner):
    by_root = state.py_by_root
    always = state.always_ids
    empty: list = []

    def scan(term: Term, cursor: tuple[int, ...], node: Term) -> list[int]:
        ids = list(always)
        for aid, lhs in by_root.get(node.sym.name, empty):
            if match(lhs, node) is not None:
                ids.append(aid)
        return ids

    return scan


def _make_c_scanner(state: _CompiledScanner):
    c_by_code = state.c_by_code
    always = state.always_ids
    codes = state.codes
    token = state.codes_token
    scan_candidates = _core.scan_candidates
    most = max((len(cand[3]) for cand in c_by_code.values()), default=1)
    out = np.empty(most, dtype=np.int32)

    def scan(term: Term, cursor: tuple[int, ...], node: Term) -> list[int]:
        ids = list(always)
        code = codes.get(node.sym.name)
        if code is None:
            return ids  # fresh-variable leaf: only bare-variable rules apply
        cand = c_by_code.get(code)
        if cand is None:
            return ids
        flat = flat_encode(term, codes, token)
        start = flat_position(flat, cursor)
        kinds, vals, offs, aids = cand
        n = scan_candidates(flat.sym, flat.size, start, kinds, vals, offs, aids, out)
        ids.extend(int(v) for v in out[:n])
        return ids

    return scan
