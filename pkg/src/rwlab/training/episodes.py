"""Episode collection and loop pruning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..envs import SOLVED, EnvSpec, EnvState, Problem, is_solved, legal_actions, reset, step
from ..neural import EpisodeContext, PolicyParams, Workspace, policy_forward


@dataclass(frozen=True, eq=False)
class Episode:
    """One rollout: the visited (state, action) pairs plus how it ended.

    `masks` carries the legal-action set that was in force at each
    transition, so training never has to recompute it.
    """

    problem_id: str
    transitions: tuple[tuple[EnvState, int], ...]
    masks: tuple[tuple[int, ...], ...]
    outcome: str
    final_state: EnvState

    @property
    def length(self) -> int:
        return len(self.transitions)

    @property
    def reward(self) -> float:
        return 1.0 if self.outcome == SOLVED else 0.0

    def actions(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.transitions)


def sample_action(dist: np.ndarray, mask: tuple[int, ...], rng: np.random.Generator) -> int:
    """Draw a legal action from the masked distribution."""
    ids = np.asarray(mask, dtype=np.intp)
    p = dist[ids]
    total = p.sum()
    if total <= 0.0:
        return int(ids[rng.integers(len(ids))])
    r = rng.random() * total
    return int(ids[min(np.searchsorted(np.cumsum(p), r), len(ids) - 1)])


def collect_episode(
    spec: EnvSpec,
    problem: Problem,
    params: PolicyParams,
    rng: np.random.Generator,
    noise: float = 0.05,
    step_limit: int | None = None,
    ctx: EpisodeContext | None = None,
    ws: Workspace | None = None,
) -> Episode:
    """Roll out the noisy policy on one problem until success or the limit.

    With probability `noise` a step takes a uniformly random legal action
    instead of sampling from the policy; `noise=1` is a pure random walk.
    """
    ws = ws or Workspace(params.layout)
    if ctx is None and spec.signature.fresh_ok:
        ctx = EpisodeContext(params.layout.n, rng=np.random.default_rng(rng.integers(2**63)))
    state = reset(spec, problem)
    transitions: list[tuple[EnvState, int]] = []
    masks: list[tuple[int, ...]] = []
    if is_solved(spec, state):
        return Episode(problem.id, (), (), SOLVED, state)
    while True:
        mask = legal_actions(spec, state)
        if not mask:
            return Episode(problem.id, tuple(transitions), tuple(masks), "stuck", state)
        if noise > 0.0 and rng.random() < noise:
            action = int(mask[rng.integers(len(mask))])
        else:
            dist, _ = policy_forward(state, params, ctx, mask, ws=ws)
            action = sample_action(dist, mask, rng)
        transitions.append((state, action))
        masks.append(mask)
        result = step(spec, state, action, step_limit=step_limit)
        state = result.state
        if result.done:
            return Episode(problem.id, tuple(transitions), tuple(masks), result.outcome, state)


def prune_loops(episode: Episode) -> Episode:
    """Cut out revisits: whenever an observation recurs, drop the segment
    between its first and second occurrence, repeated to a fixpoint. The
    result visits no observation twice and replays to the same final state.
    """
    trans = list(episode.transitions)
    masks = list(episode.masks)
    states = [s for s, _ in trans] + [episode.final_state]
    changed = True
    while changed:
        changed = False
        seen: dict = {}
        i = 0
        while i < len(states):
            key = states[i].key()
            j = seen.get(key)
            if j is not None:
                del states[j:i]
                del trans[j:i]
                del masks[j:i]
                changed = True
                break
            seen[key] = i
            i += 1
    return Episode(episode.problem_id, tuple(trans), tuple(masks), episode.outcome, episode.final_state)
