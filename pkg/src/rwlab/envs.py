"""Deterministic rewriting environments behind one shared contract.

A state is a term plus a cursor position plus a step counter. Actions either
rewrite the subterm at the cursor with a fixed rule (after which the cursor
jumps back to the root) or move the cursor to a child. The only reward is 1
on reaching the goal condition:

- ``ra``:   the term consists of successor/zero nodes only,
- ``poly``: the term equals the problem's goal term syntactically,
- ``aim``:  both sides of the root equality are syntactically equal.

Episodes end on success or when the per-environment step limit is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import rules as _tables
from .matching import build_scanner
from .terms import (
    RewriteRule,
    Signature,
    Term,
    make_rule,
    print_term,
    rewrite_at,
    subterm_at,
)

SOLVED = "solved"
STEP_LIMIT = "step-limit"
ONGOING = "ongoing"

ENV_NAMES = ("ra", "poly", "aim")

DEFAULT_STEP_LIMITS = {"ra": 100, "poly": 100, "aim": 30}


class EnvError(Exception):
    pass


class IllegalActionError(EnvError):
    pass


class SignatureMismatchError(EnvError):
    pass


class ReplayError(EnvError):
    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (action index {index})")
        self.index = index


@dataclass(frozen=True)
class Action:
    """One entry of an environment's ordered action table."""

    id: int
    name: str
    kind: str  # "rewrite" | "move"
    rules: tuple[RewriteRule, ...] = ()
    child: int = -1
    resets_cursor: bool = False


@dataclass(frozen=True, eq=False)
class EnvState:
    term: Term
    cursor: tuple[int, ...]
    steps_taken: int
    problem_id: str
    goal: Term | None = None

    def key(self) -> tuple[Term, tuple[int, ...]]:
        """Identity of the observation, as used for loop detection."""
        return (self.term, self.cursor)


@dataclass(frozen=True, eq=False)
class StepResult:
    state: EnvState
    reward: float
    done: bool
    outcome: str


@dataclass(frozen=True, eq=False)
class Problem:
    id: str
    term: Term
    goal: Term | None = None
    difficulty_steps: int | None = None
    difficulty: str | None = None
    solution: tuple[int, ...] | None = None


class EnvSpec:
    """Immutable environment description: signature, action table, limits.

    Instances are safe to share; all stepping operates on values.
    """

    def __init__(self, name: str, signature: Signature, actions: tuple[Action, ...], step_limit: int):
        self.name = name
        self.signature = signature
        self.actions = actions
        self.step_limit = step_limit
        self.num_actions = len(actions)
        self.move_actions = tuple(a for a in actions if a.kind == "move")
        # Rewrites are forbidden at the root equality node of a proof state;
        # removing it would leave nothing to prove.
        self.root_is_goal_node = name == "aim"
        self._scan = build_scanner(actions)

    def __repr__(self) -> str:
        return f"EnvSpec({self.name!r}, {self.num_actions} actions)"

    def action_by_name(self, name: str) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def inverse_action_id(self, action_id: int) -> int | None:
        """Id of the opposite direction of a rewrite action, if present."""
        act = self.actions[action_id]
        if act.kind != "rewrite" or len(act.rules) != 1:
            return None
        rule = act.rules[0]
        want_dir = "bwd" if rule.direction == "fwd" else "fwd"
        base = rule.name.rsplit(":", 1)[0]
        for other in self.actions:
            if other.kind != "rewrite" or other.id == action_id:
                continue
            r = other.rules[0]
            if r.name.rsplit(":", 1)[0] == base and r.direction == want_dir:
                return other.id
        return None


def _ra_actions() -> tuple[Action, ...]:
    acts = []
    for i, (name, lhs, rhs) in enumerate(_tables.RA_REWRITES):
        rule = make_rule(f"{name}:fwd", lhs, rhs, _tables.RA_SIG)
        acts.append(Action(i, name, "rewrite", (rule,), resets_cursor=True))
    acts.append(Action(7, "move_left", "move", child=0))
    acts.append(Action(8, "move_right", "move", child=1))
    return tuple(acts)


def _poly_actions() -> tuple[Action, ...]:
    acts = []
    rewrites = iter(_tables.POLY_REWRITES)
    for i in range(28):
        if i == 7:
            acts.append(Action(7, "move_left", "move", child=0))
        elif i == 8:
            acts.append(Action(8, "move_right", "move", child=1))
        else:
            name, schemas = next(rewrites)
            rs = tuple(
                make_rule(f"{name}.{j}:fwd", lhs, rhs, _tables.POLY_SIG)
                for j, (lhs, rhs) in enumerate(schemas)
            )
            acts.append(Action(i, name, "rewrite", rs, resets_cursor=True))
    return tuple(acts)


def _aim_actions() -> tuple[Action, ...]:
    acts = []
    for i, (name, lhs, rhs) in enumerate(_tables.AIM_EQUATIONS):
        fwd = make_rule(f"{name}:fwd", lhs, rhs, _tables.AIM_SIG, direction="fwd")
        bwd = make_rule(f"{name}:bwd", rhs, lhs, _tables.AIM_SIG, direction="bwd")
        acts.append(Action(2 * i, f"{name}_fwd", "rewrite", (fwd,), resets_cursor=True))
        acts.append(Action(2 * i + 1, f"{name}_bwd", "rewrite", (bwd,), resets_cursor=True))
    base = 2 * len(_tables.AIM_EQUATIONS)
    for c in range(3):
        acts.append(Action(base + c, f"move_{c}", "move", child=c))
    return tuple(acts)


_EXPECTED_ACTION_COUNTS = {"ra": 9, "poly": 28, "aim": 177}


def make_env(name: str, step_limit: int | None = None) -> EnvSpec:
    """Build the full ordered action table for one of the environments."""
    if name == "ra":
        sig, actions = _tables.RA_SIG, _ra_actions()
    elif name == "poly":
        sig, actions = _tables.POLY_SIG, _poly_actions()
    elif name == "aim":
        sig, actions = _tables.AIM_SIG, _aim_actions()
    else:
        raise EnvError(f"unknown environment '{name}'; expected one of {ENV_NAMES}")
    assert len(actions) == _EXPECTED_ACTION_COUNTS[name]
    limit = DEFAULT_STEP_LIMITS[name] if step_limit is None else int(step_limit)
    if limit <= 0:
        raise EnvError(f"step limit must be positive, got {limit}")
    return EnvSpec(name, sig, actions, limit)


def is_solved(spec: EnvSpec, state: EnvState) -> bool:
    term = state.term
    if spec.name == "ra":
        for node in term.nodes():
            if node.sym.name not in ("S", "0"):
                return False
        return True
    if spec.name == "poly":
        if state.goal is None:
            raise EnvError(f"problem '{state.problem_id}' has no goal term")
        return term == state.goal
    return term.sym.name == "=" and term.args[0] == term.args[1]


def reset(spec: EnvSpec, problem: Problem) -> EnvState:
    """Initial state: cursor at the root, step counter zeroed."""
    if not spec.signature.contains_term(problem.term):
        raise SignatureMismatchError(
            f"problem '{problem.id}' does not parse in the {spec.name} signature"
        )
    if spec.name == "poly" and problem.goal is None:
        raise EnvError(f"poly problem '{problem.id}' is missing its goal term")
    return EnvState(problem.term, (), 0, problem.id, problem.goal)


def legal_actions(spec: EnvSpec, state: EnvState) -> tuple[int, ...]:
    """Ascending ids of actions applicable in `state`.

    A rewrite is legal iff one of its rules matches at the cursor; a move is
    legal iff the cursor node has that child.
    """
    node = subterm_at(state.term, state.cursor)
    if spec.root_is_goal_node and not state.cursor:
        ids: list[int] = []
    else:
        ids = spec._scan(state.term, state.cursor, node)
    arity = len(node.args)
    for act in spec.move_actions:
        if act.child < arity:
            ids.append(act.id)
    ids.sort()
    return tuple(ids)


def step(spec: EnvSpec, state: EnvState, action_id: int, step_limit: int | None = None) -> StepResult:
    """Apply one action. Illegal actions are contract violations, not learnable
    outcomes, and raise IllegalActionError."""
    if is_solved(spec, state):
        return StepResult(state, 1.0, True, SOLVED)
    if action_id < 0 or action_id >= spec.num_actions:
        raise IllegalActionError(f"action id {action_id} out of range for {spec.name}")
    act = spec.actions[action_id]
    if act.kind == "move":
        node = subterm_at(state.term, state.cursor)
        if act.child >= len(node.args):
            raise IllegalActionError(
                f"cannot move to child {act.child} of {node.sym.name}/{len(node.args)}"
            )
        new_state = EnvState(
            state.term, state.cursor + (act.child,), state.steps_taken + 1, state.problem_id, state.goal
        )
    else:
        if spec.root_is_goal_node and not state.cursor:
            raise IllegalActionError("rewrites are not allowed at the equation root")
        new_term = None
        for rule in act.rules:
            new_term = rewrite_at(state.term, state.cursor, rule)
            if new_term is not None:
                break
        if new_term is None:
            raise IllegalActionError(
                f"action '{act.name}' does not match at cursor {list(state.cursor)} "
                f"of {print_term(state.term)}"
            )
        cursor = () if act.resets_cursor else state.cursor
        new_state = EnvState(new_term, cursor, state.steps_taken + 1, state.problem_id, state.goal)
    if is_solved(spec, new_state):
        return StepResult(new_state, 1.0, True, SOLVED)
    limit = spec.step_limit if step_limit is None else step_limit
    if new_state.steps_taken >= limit:
        return StepResult(new_state, 0.0, True, STEP_LIMIT)
    return StepResult(new_state, 0.0, False, ONGOING)


def replay(spec: EnvSpec, problem: Problem, actions, step_limit: int | None = None) -> StepResult:
    """Fold `step` over an action list; certifies stored solutions.

    The step limit defaults to whatever lets the trace run to completion, so
    a recorded solution is never cut short artificially.
    """
    actions = list(actions)
    limit = max(spec.step_limit, len(actions)) if step_limit is None else step_limit
    state = reset(spec, problem)
    if is_solved(spec, state):
        return StepResult(state, 1.0, True, SOLVED)
    result = StepResult(state, 0.0, False, ONGOING)
    for i, aid in enumerate(actions):
        if result.done:
            raise ReplayError("action after episode end", i)
        try:
            result = step(spec, result.state, aid, step_limit=limit)
        except IllegalActionError as exc:
            raise ReplayError(str(exc), i) from exc
    return result
