"""Immutable first-order terms: parsing, printing, matching and rewriting.

Terms are ordered trees of `Symbol` nodes and are value types: all operations
return new terms and never mutate their inputs. The concrete syntax is a
whitespace-separated s-expression, ``term := symbol | "(" symbol term* ")"``,
with symbol tokens drawn from ``[A-Za-z0-9_\\/*+=?^.-]+``.

Positions inside a term are addressed by paths: tuples of 0-based child
indices from the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# Symbol kinds.
OPERATOR = "operator"
CONSTANT = "constant"
VARIABLE = "variable"  # object-level variable such as x, y, z
FRESH = "fresh"        # machine-introduced variable v0, v1, ...
PATTERN = "pattern"    # rule pattern variable ?x, ?y, ...

_TOKEN_RE = re.compile(r"[()]|[A-Za-z0-9_\\/*+=?^.-]+")
_FRESH_RE = re.compile(r"v\d+")
_NUMERAL_RE = re.compile(r"\d+")


class TermError(Exception):
    """Base class for term-level failures."""


class ParseError(TermError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbolError(ParseError):
    pass


class ArityError(ParseError):
    pass


class InvalidPathError(TermError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: str = OPERATOR


_FRESH_CACHE: dict[int, Symbol] = {}


def fresh_symbol(index: int) -> Symbol:
    """The index-th machine-introduced variable (v0, v1, ...)."""
    sym = _FRESH_CACHE.get(index)
    if sym is None:
        sym = Symbol(f"v{index}", 0, FRESH)
        _FRESH_CACHE[index] = sym
    return sym


def fresh_index(sym: Symbol) -> int:
    return int(sym.name[1:])


class Term:
    """An immutable, hash-caching term node.

    The `_flat` and `_prog` slots hold lazily built derived encodings used by
    the matching and neural kernels; they are caches of pure functions of the
    structure and never take part in equality.
    """

    __slots__ = ("sym", "args", "size", "_hash", "_flat", "_prog")

    def __init__(self, sym: Symbol, args: tuple["Term", ...] = ()):
        if len(args) != sym.arity:
            raise ArityError(
                f"symbol '{sym.name}' expects {sym.arity} argument(s), got {len(args)}", 0
            )
        self.sym = sym
        self.args = args
        size = 1
        for a in args:
            size += a.size
        self.size = size
        self._hash = hash((sym.name, sym.arity) + tuple(a._hash for a in args))
        self._flat = None
        self._prog = None

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        if self._hash != other._hash or self.size != other.size:
            return False
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if a.sym != b.sym:
                return False
            stack.extend(zip(a.args, b.args))
        return True

    def __repr__(self) -> str:
        return f"Term({print_term(self)!r})"

    def __str__(self) -> str:
        return print_term(self)

    def nodes(self):
        """Iterate over all subterm nodes in preorder."""
        stack = [self]
        while stack:
            t = stack.pop()
            yield t
            stack.extend(reversed(t.args))


class Signature:
    """A fixed set of symbols plus per-environment token conventions.

    `aliases` maps alternative spellings onto canonical symbol names,
    `numerals` enables decimal literals as sugar for successor towers and
    `fresh_ok` accepts ``v<k>`` tokens as machine-introduced variables.
    """

    def __init__(
        self,
        name: str,
        symbols: list[Symbol],
        aliases: dict[str, str] | None = None,
        numerals: bool = False,
        fresh_ok: bool = False,
    ):
        self.name = name
        self.symbols: dict[str, Symbol] = {}
        for sym in symbols:
            if sym.name in self.symbols:
                raise ValueError(f"duplicate symbol '{sym.name}' in signature {name}")
            self.symbols[sym.name] = sym
        self.aliases = dict(aliases or {})
        self.numerals = numerals
        self.fresh_ok = fresh_ok
        if numerals and ("S" not in self.symbols or "0" not in self.symbols):
            raise ValueError("numeral sugar needs S and 0 in the signature")

    def __repr__(self) -> str:
        return f"Signature({self.name!r}, {len(self.symbols)} symbols)"

    def leaf_symbols(self) -> list[Symbol]:
        return [s for s in self.symbols.values() if s.arity == 0]

    def operator_symbols(self) -> list[Symbol]:
        return [s for s in self.symbols.values() if s.arity > 0]

    def contains_term(self, t: Term) -> bool:
        """True iff every node of t belongs to this signature."""
        for node in t.nodes():
            sym = node.sym
            if sym.kind == FRESH:
                if not self.fresh_ok:
                    return False
            elif self.symbols.get(sym.name) is not sym and self.symbols.get(sym.name) != sym:
                return False
        return True


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {ch!r}", pos)
        tokens.append((m.group(), pos))
        pos = m.end()
    return tokens


def _numeral_term(value: int, sig: Signature) -> Term:
    t = Term(sig.symbols["0"])
    s = sig.symbols["S"]
    for _ in range(value):
        t = Term(s, (t,))
    return t


def _make_leaf(name: str, pos: int, sig: Signature, allow_pattern: bool) -> Term:
    if allow_pattern and name.startswith("?"):
        return Term(Symbol(name, 0, PATTERN))
    name = sig.aliases.get(name, name)
    sym = sig.symbols.get(name)
    if sym is not None:
        if sym.arity != 0:
            raise ArityError(f"symbol '{name}' expects {sym.arity} argument(s), got 0", pos)
        return Term(sym)
    if sig.fresh_ok and _FRESH_RE.fullmatch(name):
        return Term(fresh_symbol(int(name[1:])))
    if sig.numerals and _NUMERAL_RE.fullmatch(name):
        return _numeral_term(int(name), sig)
    raise UnknownSymbolError(f"unknown symbol '{name}'", pos)


def _parse(text: str, sig: Signature, allow_pattern: bool) -> Term:
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty input", 0)
    stack: list[tuple[str, int, list[Term]]] = []
    result: Term | None = None

    def emit(term: Term, pos: int):
        nonlocal result
        if stack:
            stack[-1][2].append(term)
        elif result is None:
            result = term
        else:
            raise ParseError("trailing content after complete term", pos)

    i = 0
    while i < len(tokens):
        tok, pos = tokens[i]
        if tok == "(":
            if i + 1 >= len(tokens) or tokens[i + 1][0] in ("(", ")"):
                raise ParseError("expected a symbol after '('", pos)
            head, hpos = tokens[i + 1]
            if result is not None and not stack:
                raise ParseError("trailing content after complete term", pos)
            stack.append((head, hpos, []))
            i += 2
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", pos)
            head, hpos, kids = stack.pop()
            if allow_pattern and head.startswith("?"):
                raise ParseError(f"pattern variable '{head}' cannot take arguments", hpos)
            name = sig.aliases.get(head, head)
            sym = sig.symbols.get(name)
            if sym is None:
                raise UnknownSymbolError(f"unknown symbol '{name}'", hpos)
            if sym.arity != len(kids):
                raise ArityError(
                    f"symbol '{name}' expects {sym.arity} argument(s), got {len(kids)}", hpos
                )
            emit(Term(sym, tuple(kids)), pos)
            i += 1
        else:
            emit(_make_leaf(tok, pos, sig, allow_pattern), pos)
            i += 1
    if stack:
        raise ParseError("unclosed '('", stack[-1][1])
    assert result is not None
    return result


def parse_term(text: str, sig: Signature) -> Term:
    """Parse the canonical s-expression syntax into a Term."""
    return _parse(text, sig, allow_pattern=False)


def parse_pattern(text: str, sig: Signature) -> Term:
    """Like parse_term, but also accepts ?-prefixed pattern variables."""
    return _parse(text, sig, allow_pattern=True)


def print_term(t: Term) -> str:
    """Canonical s-expression rendering; parse_term(print_term(t)) == t."""
    toks: list[str] = []
    stack: list[object] = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, str):
            toks.append(x)
            continue
        if not x.args:
            toks.append(x.sym.name)
        else:
            toks.append("(")
            toks.append(x.sym.name)
            stack.append(")")
            for a in reversed(x.args):
                stack.append(a)
    out: list[str] = []
    prev = ""
    for tok in toks:
        if out and tok != ")" and prev != "(":
            out.append(" ")
        out.append(tok)
        prev = tok
    return "".join(out)


def subterm_at(t: Term, path: tuple[int, ...]) -> Term:
    node = t
    for depth, i in enumerate(path):
        if i < 0 or i >= len(node.args):
            raise InvalidPathError(f"path {path} invalid at depth {depth} in {print_term(t)}")
        node = node.args[i]
    return node


def replace_at(t: Term, path: tuple[int, ...], replacement: Term) -> Term:
    """Rebuild t with the subterm at `path` replaced; shares unchanged subtrees."""
    if not path:
        return replacement
    i = path[0]
    if i < 0 or i >= len(t.args):
        raise InvalidPathError(f"path {path} invalid in {print_term(t)}")
    args = list(t.args)
    args[i] = replace_at(args[i], path[1:], replacement)
    return Term(t.sym, tuple(args))


def all_paths(t: Term):
    """All node paths of t in preorder."""
    stack: list[tuple[Term, tuple[int, ...]]] = [(t, ())]
    while stack:
        node, path = stack.pop()
        yield path
        for i in range(len(node.args) - 1, -1, -1):
            stack.append((node.args[i], path + (i,)))


def match(pattern: Term, t: Term) -> dict[str, Term] | None:
    """First-order syntactic matching of `pattern` against `t`.

    Returns the binding map iff substituting it into the pattern reproduces t
    exactly; repeated pattern variables must bind equal subterms.
    """
    binding: dict[str, Term] = {}
    stack = [(pattern, t)]
    while stack:
        p, s = stack.pop()
        if p.sym.kind == PATTERN:
            prev = binding.get(p.sym.name)
            if prev is None:
                binding[p.sym.name] = s
            elif prev != s:
                return None
        else:
            if p.sym != s.sym:
                return None
            stack.extend(zip(p.args, s.args))
    return binding


def substitute(pattern: Term, binding: dict[str, Term]) -> Term:
    if pattern.sym.kind == PATTERN:
        return binding[pattern.sym.name]
    if not pattern.args:
        return pattern
    return Term(pattern.sym, tuple(substitute(a, binding) for a in pattern.args))


def pattern_vars(pattern: Term) -> tuple[str, ...]:
    """Pattern variable names in order of first occurrence (preorder)."""
    seen: list[str] = []
    stack = [pattern]
    while stack:
        node = stack.pop()
        if node.sym.kind == PATTERN:
            if node.sym.name not in seen:
                seen.append(node.sym.name)
        else:
            stack.extend(reversed(node.args))
    return tuple(seen)


@dataclass(frozen=True)
class RewriteRule:
    """A directed rewrite `lhs -> rhs` over pattern variables.

    `introduces` lists rhs pattern variables that the lhs does not bind; when
    applied, those are instantiated with machine-introduced fresh variables.
    """

    name: str
    lhs: Term
    rhs: Term
    direction: str = "fwd"
    introduces: tuple[str, ...] = ()


def make_rule(name: str, lhs_text: str, rhs_text: str, sig: Signature, direction: str = "fwd") -> RewriteRule:
    lhs = parse_pattern(lhs_text, sig)
    rhs = parse_pattern(rhs_text, sig)
    bound = set(pattern_vars(lhs))
    introduces = tuple(v for v in pattern_vars(rhs) if v not in bound)
    return RewriteRule(name, lhs, rhs, direction, introduces)


def next_fresh_index(t: Term) -> int:
    """Smallest index k such that v<k> does not occur in t."""
    top = -1
    for node in t.nodes():
        if node.sym.kind == FRESH:
            top = max(top, fresh_index(node.sym))
    return top + 1


def rewrite_at(t: Term, path: tuple[int, ...], rule: RewriteRule) -> Term | None:
    """Apply `rule` at `path`; None when the lhs does not match there.

    Never mutates `t`. Unbound rhs variables are instantiated with fresh
    variables numbered deterministically from the occupied indices of `t`.
    """
    node = subterm_at(t, path)
    binding = match(rule.lhs, node)
    if binding is None:
        return None
    if rule.introduces:
        base = next_fresh_index(t)
        for offset, var in enumerate(rule.introduces):
            binding[var] = Term(fresh_symbol(base + offset))
    return replace_at(t, path, substitute(rule.rhs, binding))
