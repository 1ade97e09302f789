"""Per-problem store of the k shortest solutions, plus the two samplers.

Solution length is the number of environment steps, cursor moves included
(that is what the agent has to produce). Ties keep the earlier find, and an
episode identical to a stored one is dropped rather than wasting a slot.
"""

from __future__ import annotations

import numpy as np

from ..envs import SOLVED, Problem
from .episodes import Episode


class SolutionHistory:
    def __init__(self, k: int = 1):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.k = k
        self._store: dict[str, list[tuple[Episode, int]]] = {}
        self._arrival = 0
        self._pools: dict[str, list] = {}
        self._sample_ids: list[str] | None = None

    def __len__(self) -> int:
        return len(self._store)

    def __contains__(self, problem_id: str) -> bool:
        return problem_id in self._store

    def add(self, episode: Episode) -> bool:
        """Insert a solved episode; keeps the k shortest per problem."""
        if episode.outcome != SOLVED:
            return False
        entries = self._store.setdefault(episode.problem_id, [])
        acts = episode.actions()
        if any(e.actions() == acts for e, _ in entries):
            return False
        self._arrival += 1
        entries.append((episode, self._arrival))
        entries.sort(key=lambda pair: (pair[0].length, pair[1]))
        del entries[self.k:]
        self._pools.pop(episode.problem_id, None)
        self._sample_ids = None
        return True

    def solved_ids(self) -> list[str]:
        return list(self._store)

    def solutions(self, problem_id: str) -> list[Episode]:
        return [e for e, _ in self._store.get(problem_id, [])]

    def min_length(self, problem_id: str) -> int | None:
        entries = self._store.get(problem_id)
        return entries[0][0].length if entries else None

    def transition_pool(self, problem_id: str) -> list:
        """All (state, action, mask) triples stored for one problem."""
        pool = self._pools.get(problem_id)
        if pool is None:
            pool = []
            for ep, _ in self._store[problem_id]:
                pool.extend(
                    (state, action, mask)
                    for (state, action), mask in zip(ep.transitions, ep.masks)
                )
            self._pools[problem_id] = pool
        return pool

    def sample_ids(self) -> list[str]:
        """Problems that can contribute at least one transition."""
        if self._sample_ids is None:
            self._sample_ids = [pid for pid in self._store if self.transition_pool(pid)]
        return self._sample_ids


def update_history(history: SolutionHistory, episode: Episode) -> SolutionHistory:
    history.add(episode)
    return history


def sample_batch_stratified(history: SolutionHistory, batch_size: int, rng: np.random.Generator) -> list:
    """Two-stage draw: a solved problem uniformly, then one of its stored
    transitions uniformly. Returns (state, action, mask) triples."""
    pids = history.sample_ids()
    if not pids:
        raise ValueError("history holds no sampleable solutions")
    out = []
    for _ in range(batch_size):
        pid = pids[rng.integers(len(pids))]
        pool = history.transition_pool(pid)
        out.append(pool[rng.integers(len(pool))])
    return out


def sample_problem_biased(
    problems: list[Problem],
    history: SolutionHistory,
    bias: float,
    rng: np.random.Generator,
) -> Problem:
    """Draw a problem, weighting ones without a stored solution `bias`-fold."""
    if not problems:
        raise ValueError("no problems to sample from")
    if bias == 1.0:
        return problems[rng.integers(len(problems))]
    weights = np.fromiter(
        (1.0 if p.id in history else float(bias) for p in problems),
        dtype=np.float64,
        count=len(problems),
    )
    r = rng.random() * weights.sum()
    idx = int(np.searchsorted(np.cumsum(weights), r))
    return problems[min(idx, len(problems) - 1)]
