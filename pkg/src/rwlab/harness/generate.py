"""Problem generation for the three environments.

Arithmetic and polynomial problems are random well-formed terms graded (and
sorted) by the oracle; every arithmetic problem ships with a replayable
oracle solution. Loop-theory problems are built backwards: start from a
trivially true equation, scramble one side with random rewrites whose
inverses are recorded, and attach the inverted script as a known solution,
certified by replay at generation time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..envs import SOLVED, EnvSpec, Problem, ReplayError, make_env, replay
from ..oracles import OracleError, difficulty, eval_ra, lopl_solve, poly_normalize_steps, categorize
from ..terms import Term, all_paths, rewrite_at, subterm_at


@dataclass(frozen=True)
class ProblemSet:
    env: str
    problems: tuple[Problem, ...]

    def __len__(self) -> int:
        return len(self.problems)

    def __iter__(self):
        return iter(self.problems)


def _tower(sig, value: int) -> Term:
    t = Term(sig.symbols["0"])
    s = sig.symbols["S"]
    for _ in range(value):
        t = Term(s, (t,))
    return t


def _random_ra_term(rng: np.random.Generator, depth: int, sig) -> Term:
    if depth <= 0:
        return _tower(sig, int(rng.integers(0, 4)))
    r = rng.random()
    if r < 0.15:
        return _tower(sig, int(rng.integers(0, 4)))
    if r < 0.35:
        return Term(sig.symbols["S"], (_random_ra_term(rng, depth - 1, sig),))
    op = "+" if rng.random() < 0.6 else "*"
    return Term(
        sig.symbols[op],
        (_random_ra_term(rng, depth - 1, sig), _random_ra_term(rng, depth - 1, sig)),
    )


def _has_op(t: Term) -> bool:
    return any(node.sym.name in ("+", "*", "^") for node in t.nodes())


def generate_ra(
    count: int,
    max_depth: int = 6,
    seed: int = 0,
    value_cap: int = 100,
    lopl_limit: int = 1000,
) -> ProblemSet:
    """Random arithmetic problems, difficulty-sorted, oracle solution attached."""
    spec = make_env("ra")
    sig = spec.signature
    rng = np.random.default_rng(seed)
    seen: set[Term] = set()
    rows = []
    while len(rows) < count:
        depth = int(rng.integers(2, max_depth + 1))
        term = _random_ra_term(rng, depth, sig)
        if not _has_op(term) or term in seen:
            continue
        if eval_ra(term) > value_cap:
            continue
        seen.add(term)
        res = lopl_solve(term, limit=lopl_limit)
        steps = None if res is None else res.steps
        rows.append((term, steps, None if res is None else res.actions))
    rows.sort(key=lambda r: (r[1] is None, r[1] if r[1] is not None else 0))
    problems = tuple(
        Problem(
            id=f"ra-s{seed}-{i:05d}",
            term=term,
            difficulty_steps=steps,
            difficulty=categorize(steps),
            solution=actions,
        )
        for i, (term, steps, actions) in enumerate(rows)
    )
    return ProblemSet("ra", problems)


def _random_poly_term(rng: np.random.Generator, depth: int, sig) -> Term:
    if depth <= 0:
        r = rng.random()
        if r < 0.45:
            return Term(sig.symbols[rng.choice(("x", "y", "z"))])
        if r < 0.6:
            return Term(sig.symbols["1"])
        return _tower(sig, int(rng.integers(0, 4)))
    r = rng.random()
    if r < 0.2:
        return _random_poly_term(rng, 0, sig)
    if r < 0.3:
        return Term(sig.symbols["S"], (_random_poly_term(rng, depth - 1, sig),))
    if r < 0.45:
        # Exponents stay variable-free so the normal form has numeral powers.
        base = _random_poly_term(rng, depth - 1, sig)
        return Term(sig.symbols["^"], (base, _tower(sig, int(rng.integers(0, 4)))))
    op = "+" if rng.random() < 0.55 else "*"
    return Term(
        sig.symbols[op],
        (_random_poly_term(rng, depth - 1, sig), _random_poly_term(rng, depth - 1, sig)),
    )


def generate_poly(
    count: int,
    max_depth: int = 5,
    value_cap: int = 100,
    seed: int = 0,
    normalize_budget: int = 200_000,
) -> ProblemSet:
    """Random polynomial problems with their canonical goals, sorted by the
    normalizer's own step count; over-cap or runaway terms are resampled."""
    spec = make_env("poly")
    sig = spec.signature
    rng = np.random.default_rng(seed)
    seen: set[Term] = set()
    rows = []
    while len(rows) < count:
        depth = int(rng.integers(2, max_depth + 1))
        term = _random_poly_term(rng, depth, sig)
        if not _has_op(term) or term in seen:
            continue
        seen.add(term)
        try:
            goal, steps = poly_normalize_steps(term, value_cap=value_cap, budget=normalize_budget)
        except OracleError:
            continue
        if goal == term:
            continue
        rows.append((term, goal, steps))
    rows.sort(key=lambda r: r[2])
    problems = tuple(
        Problem(
            id=f"poly-s{seed}-{i:05d}",
            term=term,
            goal=goal,
            difficulty_steps=steps,
            difficulty=categorize(steps),
        )
        for i, (term, goal, steps) in enumerate(rows)
    )
    return ProblemSet("poly", problems)


_AIM_LEAF_P = 0.55


def _random_aim_term(rng: np.random.Generator, depth: int, sig) -> Term:
    if depth <= 0 or rng.random() < _AIM_LEAF_P * (1 if depth < 2 else 0.5):
        name = rng.choice(("x", "y", "z", "u", "v", "w", "e"))
        return Term(sig.symbols[name])
    r = rng.random()
    if r < 0.75:
        op = rng.choice(("*", "/", "\\"))
        arity = 2
    elif r < 0.9:
        op = rng.choice(("T", "K"))
        arity = 2
    else:
        op = rng.choice(("a", "L", "R"))
        arity = 3
    return Term(
        sig.symbols[op],
        tuple(_random_aim_term(rng, depth - 1, sig) for _ in range(arity)),
    )


def _scramble_candidates(spec: EnvSpec, term: Term, ok_ids: frozenset, max_path: int):
    out = []
    for path in all_paths(term):
        if len(path) > max_path:
            continue
        node = subterm_at(term, path)
        for aid in spec._scan(term, path, node):
            if aid in ok_ids:
                out.append((aid, path))
    return out


def scramble_action_ids(spec: EnvSpec) -> frozenset:
    """Rewrite actions usable for scrambling: the action and its inverse both
    bind every variable, so the inverted script restores the term exactly."""
    ids = set()
    for act in spec.actions:
        if act.kind != "rewrite":
            continue
        inv = spec.actions[act.id ^ 1]
        if not act.rules[0].introduces and not inv.rules[0].introduces:
            ids.add(act.id)
    return frozenset(ids)


def generate_aim(
    count: int,
    scramble_depth: int = 4,
    seed: int = 0,
    max_term_depth: int = 3,
    max_side_size: int = 48,
    max_path: int = 5,
) -> ProblemSet:
    """Equations scrambled away from triviality, with certified solutions.

    Each problem's scramble depth is drawn uniformly from 1..scramble_depth;
    the recorded solution is the inverted scramble script (cursor moves
    included) and is replay-checked before the problem is accepted.
    """
    spec = make_env("aim")
    sig = spec.signature
    rng = np.random.default_rng(seed)
    ok_ids = scramble_action_ids(spec)
    move_base = spec.num_actions - 3
    seen: set[Term] = set()
    problems: list[Problem] = []
    while len(problems) < count:
        base = _random_aim_term(rng, int(rng.integers(1, max_term_depth + 1)), sig)
        depth = int(rng.integers(1, scramble_depth + 1))
        side = base
        script: list[tuple[int, tuple[int, ...]]] = []
        for _ in range(depth):
            cands = _scramble_candidates(spec, side, ok_ids, max_path)
            rng.shuffle(cands)
            applied = False
            for aid, path in cands:
                nxt = rewrite_at(side, path, spec.actions[aid].rules[0])
                if nxt is not None and nxt.size <= max_side_size:
                    side = nxt
                    script.append((aid, path))
                    applied = True
                    break
            if not applied:
                break
        if not script or side == base:
            continue
        eq = Term(sig.symbols["="], (side, base))
        if eq in seen:
            continue
        solution: list[int] = []
        for aid, path in reversed(script):
            solution.append(move_base + 0)
            solution.extend(move_base + i for i in path)
            solution.append(aid ^ 1)
        problem = Problem(
            id=f"aim-s{seed}-{len(problems):05d}",
            term=eq,
            solution=tuple(solution),
        )
        try:
            result = replay(spec, problem, problem.solution)
        except ReplayError:
            continue
        if result.outcome != SOLVED:
            continue
        seen.add(eq)
        problems.append(problem)
    return ProblemSet("aim", tuple(problems))


def generate(env: str, count: int, seed: int = 0, **kw) -> ProblemSet:
    if env == "ra":
        return generate_ra(count, seed=seed, **kw)
    if env == "poly":
        return generate_poly(count, seed=seed, **kw)
    if env == "aim":
        return generate_aim(count, seed=seed, **kw)
    raise ValueError(f"unknown environment '{env}'")
