"""Model-free reference algorithms used to generate, check and grade problems.

Everything here is independent of the learned policy: a semantic evaluator
for arithmetic terms, a fixed deterministic rewriting strategy whose step
count grades arithmetic problems, a polynomial canonicalizer (two separate
routes: a stepwise production normalizer and a brute-force expansion used to
cross-check it), and the difficulty classifier built on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .envs import make_env, EnvSpec
from .rules import POLY_SIG
from .terms import Term, VARIABLE, rewrite_at


class OracleError(Exception):
    pass


class NormalizeBudgetError(OracleError):
    """The stepwise normalizer exceeded its step budget."""


class ValueCapError(OracleError):
    """A numeral in the normal form exceeds the configured cap."""


class NonNumeralExponentError(OracleError):
    """An exponent position does not normalize to a constant."""


# --- Robinson arithmetic -----------------------------------------------------


def eval_ra(t: Term) -> int:
    """Value of an arithmetic term under the standard semantics."""
    vals: dict[int, int] = {}
    stack = [t]
    while stack:
        node = stack[-1]
        if id(node) in vals:
            stack.pop()
            continue
        pending = [a for a in node.args if id(a) not in vals]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        name = node.sym.name
        if name == "0":
            v = 0
        elif name == "S":
            v = vals[id(node.args[0])] + 1
        elif name == "+":
            v = vals[id(node.args[0])] + vals[id(node.args[1])]
        elif name == "*":
            v = vals[id(node.args[0])] * vals[id(node.args[1])]
        else:
            raise OracleError(f"eval_ra: not an arithmetic symbol: '{name}'")
        vals[id(node)] = v
    return vals[id(t)]


@lru_cache(maxsize=1)
def _ra_spec() -> EnvSpec:
    return make_env("ra")


# Value-reducing action ids in the arithmetic table: drop_zero, push_succ,
# mul_zero, expand_mul.
_REDUCE_ADD_ZERO = 0
_REDUCE_PUSH_SUCC = 2
_REDUCE_MUL_ZERO = 4
_REDUCE_EXPAND_MUL = 5
_MOVE_IDS = (7, 8)


def _reducing_action(node: Term) -> int | None:
    name = node.sym.name
    if name == "+":
        right = node.args[1].sym.name
        if right == "0":
            return _REDUCE_ADD_ZERO
        if right == "S":
            return _REDUCE_PUSH_SUCC
    elif name == "*":
        right = node.args[1].sym.name
        if right == "0":
            return _REDUCE_MUL_ZERO
        if right == "S":
            return _REDUCE_EXPAND_MUL
    return None


def _leftmost_innermost_redex(t: Term):
    stack: list[tuple[Term, tuple[int, ...], bool]] = [(t, (), False)]
    while stack:
        node, path, visited = stack.pop()
        if not visited:
            stack.append((node, path, True))
            for i in range(len(node.args) - 1, -1, -1):
                stack.append((node.args[i], path + (i,), False))
        else:
            aid = _reducing_action(node)
            if aid is not None:
                return path, aid
    return None


@dataclass(frozen=True)
class StrategyResult:
    steps: int            # rewrite count, cursor moves excluded
    actions: tuple[int, ...]  # full replayable action trace (moves + rewrites)


def lopl_solve(t: Term, limit: int = 1000) -> StrategyResult | None:
    """Normalize by always rewriting the leftmost innermost reducible node.

    Uses only the four value-reducing arithmetic rules. Returns the rewrite
    count plus a replayable action trace, or None once `limit` rewrites were
    spent without reaching a normal form.
    """
    spec = _ra_spec()
    term = t
    actions: list[int] = []
    steps = 0
    while True:
        redex = _leftmost_innermost_redex(term)
        if redex is None:
            return StrategyResult(steps, tuple(actions))
        if steps >= limit:
            return None
        path, aid = redex
        actions.extend(_MOVE_IDS[i] for i in path)
        actions.append(aid)
        rule = spec.actions[aid].rules[0]
        term = rewrite_at(term, path, rule)
        assert term is not None
        steps += 1


# --- polynomial arithmetic ---------------------------------------------------
#
# A polynomial is a dict mapping a monomial key to its integer coefficient;
# a key is a tuple of (variable, exponent) pairs sorted by variable name.

Poly = dict


def eval_poly(t: Term, assignment: dict[str, int]) -> int:
    """Numeric value of a polynomial term under a variable assignment (0^0 = 1)."""
    vals: dict[int, int] = {}
    stack = [t]
    while stack:
        node = stack[-1]
        if id(node) in vals:
            stack.pop()
            continue
        pending = [a for a in node.args if id(a) not in vals]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        name = node.sym.name
        if name == "0":
            v = 0
        elif name == "1":
            v = 1
        elif node.sym.kind == VARIABLE:
            v = assignment[name]
        elif name == "S":
            v = vals[id(node.args[0])] + 1
        elif name == "+":
            v = vals[id(node.args[0])] + vals[id(node.args[1])]
        elif name == "*":
            v = vals[id(node.args[0])] * vals[id(node.args[1])]
        elif name == "^":
            v = vals[id(node.args[0])] ** vals[id(node.args[1])]
        else:
            raise OracleError(f"eval_poly: not a polynomial symbol: '{name}'")
        vals[id(node)] = v
    return vals[id(t)]


class _StepMeter:
    __slots__ = ("steps", "budget")

    def __init__(self, budget: int | None):
        self.steps = 0
        self.budget = budget

    def tick(self, k: int = 1):
        self.steps += k
        if self.budget is not None and self.steps > self.budget:
            raise NormalizeBudgetError(f"normalizer exceeded {self.budget} steps")


def _strip_succ(t: Term) -> tuple[Term, int]:
    count = 0
    node = t
    while node.sym.name == "S":
        count += 1
        node = node.args[0]
    return node, count


def _mono_mul(ka, kb):
    exps: dict[str, int] = dict(ka)
    for v, e in kb:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _poly_add(pa: Poly, pb: Poly, meter: _StepMeter) -> Poly:
    out = dict(pa)
    for key, c in pb.items():
        meter.tick()
        out[key] = out.get(key, 0) + c
        if out[key] == 0:
            del out[key]
    return out


def _poly_mul(pa: Poly, pb: Poly, meter: _StepMeter) -> Poly:
    out: Poly = {}
    for ka, ca in pa.items():
        for kb, cb in pb.items():
            meter.tick()
            key = _mono_mul(ka, kb)
            out[key] = out.get(key, 0) + ca * cb
            if out[key] == 0:
                del out[key]
    return out


def _to_poly(t: Term, meter: _StepMeter) -> Poly:
    node, succ = _strip_succ(t)
    name = node.sym.name
    if name == "0":
        p: Poly = {}
    elif name == "1":
        p = {(): 1}
    elif node.sym.kind == VARIABLE:
        p = {((name, 1),): 1}
    elif name == "+":
        p = _poly_add(_to_poly(node.args[0], meter), _to_poly(node.args[1], meter), meter)
    elif name == "*":
        p = _poly_mul(_to_poly(node.args[0], meter), _to_poly(node.args[1], meter), meter)
    elif name == "^":
        base = _to_poly(node.args[0], meter)
        expo = _to_poly(node.args[1], meter)
        if any(key != () for key in expo):
            raise NonNumeralExponentError(f"exponent is not a constant in {node}")
        k = expo.get((), 0)
        p = {(): 1}
        for _ in range(k):
            p = _poly_mul(p, base, meter)
    else:
        raise OracleError(f"not a polynomial symbol: '{name}'")
    if succ:
        meter.tick(succ)
        p = dict(p)
        p[()] = p.get((), 0) + succ
        if p[()] == 0:
            del p[()]
    return p


def _numeral(k: int) -> Term:
    t = Term(POLY_SIG.symbols["0"])
    s = POLY_SIG.symbols["S"]
    for _ in range(k):
        t = Term(s, (t,))
    return t


def _left_assoc(op: str, parts: list[Term]) -> Term:
    sym = POLY_SIG.symbols[op]
    acc = parts[0]
    for p in parts[1:]:
        acc = Term(sym, (acc, p))
    return acc


def render_poly(p: Poly) -> Term:
    """Canonical term for a polynomial: monomials sorted by graded
    lexicographic order (largest first, alphabetical variables), products
    left-associated with the coefficient first, numerals as successor towers.
    """
    if not p:
        return _numeral(0)
    all_vars = sorted({v for key in p for v, _ in key})

    def order_key(key):
        exps = dict(key)
        vec = tuple(exps.get(v, 0) for v in all_vars)
        return (-sum(vec), tuple(-e for e in vec))

    pow_sym = POLY_SIG.symbols["^"]
    monos: list[Term] = []
    for key in sorted(p.keys(), key=order_key):
        coeff = p[key]
        factors: list[Term] = []
        if coeff != 1 or not key:
            factors.append(_numeral(coeff))
        for v, e in key:
            var = Term(POLY_SIG.symbols[v])
            factors.append(var if e == 1 else Term(pow_sym, (var, _numeral(e))))
        monos.append(_left_assoc("*", factors))
    return _left_assoc("+", monos)


def poly_normalize_steps(
    t: Term, value_cap: int | None = 100, budget: int | None = None
) -> tuple[Term, int]:
    """Normalize and also report the number of elementary steps spent.

    A step is one monomial insertion, one pairwise monomial product or one
    successor absorption; the count is the length of the normalizer's own
    derivation and grades how much work the expression takes to flatten.
    """
    meter = _StepMeter(budget)
    p = _to_poly(t, meter)
    if value_cap is not None:
        for key, coeff in p.items():
            if coeff > value_cap or any(e > value_cap for _, e in key):
                raise ValueCapError(f"normal form exceeds value cap {value_cap}")
    return render_poly(p), meter.steps


def poly_normalize(t: Term, value_cap: int | None = 100, budget: int | None = None) -> Term:
    """Canonical form of a polynomial term; deterministic and idempotent."""
    return poly_normalize_steps(t, value_cap=value_cap, budget=budget)[0]


def expand_reference(t: Term) -> Poly:
    """Brute-force expansion oracle, kept deliberately separate from the
    production normalizer: distributes into a flat list of monomials and only
    merges at the very end."""

    def go(node: Term) -> list[tuple[int, dict[str, int]]]:
        node, succ = _strip_succ(node)
        name = node.sym.name
        if name == "0":
            monos: list[tuple[int, dict[str, int]]] = []
        elif name == "1":
            monos = [(1, {})]
        elif node.sym.kind == VARIABLE:
            monos = [(1, {name: 1})]
        elif name == "+":
            monos = go(node.args[0]) + go(node.args[1])
        elif name == "*":
            left, right = go(node.args[0]), go(node.args[1])
            monos = []
            for ca, ea in left:
                for cb, eb in right:
                    exps = dict(ea)
                    for v, e in eb.items():
                        exps[v] = exps.get(v, 0) + e
                    monos.append((ca * cb, exps))
        elif name == "^":
            expo = go(node.args[1])
            if any(e for _, e in expo):
                raise NonNumeralExponentError(f"exponent is not a constant in {node}")
            k = sum(c for c, _ in expo)
            monos = [(1, {})]
            for _ in range(k):
                base = go(node.args[0])
                acc = []
                for ca, ea in monos:
                    for cb, eb in base:
                        exps = dict(ea)
                        for v, e in eb.items():
                            exps[v] = exps.get(v, 0) + e
                        acc.append((ca * cb, exps))
                monos = acc
        else:
            raise OracleError(f"not a polynomial symbol: '{name}'")
        for _ in range(succ):
            monos = monos + [(1, {})]
        return monos

    out: Poly = {}
    for coeff, exps in go(t):
        key = tuple(sorted((v, e) for v, e in exps.items() if e))
        out[key] = out.get(key, 0) + coeff
        if out[key] == 0:
            del out[key]
    return out


# --- difficulty --------------------------------------------------------------

LOW_BELOW = 90
MEDIUM_MAX = 130


@dataclass(frozen=True)
class Difficulty:
    steps: int | None  # None when the oracle gave up
    category: str      # "low" | "medium" | "high"


def categorize(steps: int | None, low_below: int = LOW_BELOW, medium_max: int = MEDIUM_MAX) -> str:
    if steps is None:
        return "high"
    if steps < low_below:
        return "low"
    if steps <= medium_max:
        return "medium"
    return "high"


def difficulty(
    term: Term,
    env: str,
    lopl_limit: int = 1000,
    normalize_budget: int | None = 200_000,
    value_cap: int | None = 100,
    low_below: int = LOW_BELOW,
    medium_max: int = MEDIUM_MAX,
) -> Difficulty:
    """Grade a problem by oracle solution length; oracle failure means high."""
    if env == "ra":
        res = lopl_solve(term, limit=lopl_limit)
        steps = None if res is None else res.steps
    elif env == "poly":
        try:
            _, steps = poly_normalize_steps(term, value_cap=value_cap, budget=normalize_budget)
        except OracleError:
            steps = None
    else:
        raise OracleError(f"difficulty is defined for ra/poly, not '{env}'")
    return Difficulty(steps, categorize(steps, low_below, medium_max))
