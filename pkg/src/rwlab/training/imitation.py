"""Shortest-solution imitation training and the behavioral-cloning baseline.

Both trainers share the same epoch skeleton: collect noisy episodes over the
active problem set, learn by cross-entropy on stored solutions, evaluate
greedily, and (when a curriculum is enabled) unlock the next block of
problems once the success rate clears the advance threshold. They differ in
what they learn from: the imitation trainer keeps only the k shortest
solutions per problem and samples them stratified per problem, while the
cloning baseline pushes every solved episode's transitions through one FIFO
buffer and samples it uniformly, so long episodes dominate its batches.
"""

from __future__ import annotations

import time
import zlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..envs import SOLVED, EnvSpec, Problem, is_solved, legal_actions, replay, reset, step
from ..neural import (
    AdamState,
    EpisodeContext,
    PolicyParams,
    TrainSample,
    Workspace,
    adam_step,
    grad,
    init_params,
    policy_forward,
)
from .config import TrainConfig
from .episodes import Episode, collect_episode, prune_loops
from .history import SolutionHistory, sample_batch_stratified, sample_problem_biased


@dataclass
class CurriculumState:
    """How much of the difficulty-sorted problem list is unlocked."""

    block_size: int
    threshold: float
    total: int
    active: int = 0

    def __post_init__(self):
        if self.active == 0:
            self.active = min(self.block_size, self.total)

    @property
    def level(self) -> int:
        return (self.active + self.block_size - 1) // self.block_size

    @property
    def complete(self) -> bool:
        return self.active >= self.total

    def advance(self) -> None:
        self.active = min(self.active + self.block_size, self.total)


@dataclass
class TrainResult:
    params: PolicyParams
    history: SolutionHistory | None
    metrics: list[dict] = field(default_factory=list)


def _ctx_seed(problem_id: str, seed: int) -> int:
    # Stable across processes, unlike hash() on strings.
    return zlib.crc32(problem_id.encode()) ^ (seed & 0xFFFFFFFF)


def greedy_rollout(
    spec: EnvSpec,
    problem: Problem,
    params: PolicyParams,
    step_limit: int | None = None,
    ctx_seed: int = 0,
    ws: Workspace | None = None,
) -> tuple[bool, list[int]]:
    """Deterministic argmax rollout; ties resolve to the lowest action id."""
    ws = ws or Workspace(params.layout)
    ctx = None
    if spec.signature.fresh_ok:
        ctx = EpisodeContext(params.layout.n, seed=_ctx_seed(problem.id, ctx_seed))
    state = reset(spec, problem)
    actions: list[int] = []
    if is_solved(spec, state):
        return True, actions
    while True:
        mask = legal_actions(spec, state)
        if not mask:
            return False, actions
        dist, _ = policy_forward(state, params, ctx, mask, ws=ws)
        action = int(np.argmax(dist))
        actions.append(action)
        result = step(spec, state, action, step_limit=step_limit)
        state = result.state
        if result.done:
            return result.outcome == SOLVED, actions


def greedy_success(
    spec: EnvSpec,
    problems: list[Problem],
    params: PolicyParams,
    sample_size: int,
    rng: np.random.Generator,
    step_limit: int | None = None,
    ctx_seed: int = 0,
    ws: Workspace | None = None,
) -> float:
    """Greedy success rate on a with-replacement sample of the problems (or
    on every problem once, when the sample would cover the whole set)."""
    ws = ws or Workspace(params.layout)
    if sample_size >= len(problems):
        chosen = problems
    else:
        chosen = [problems[int(i)] for i in rng.integers(len(problems), size=sample_size)]
    if not chosen:
        return 0.0
    solved = 0
    for p in chosen:
        ok, _ = greedy_rollout(spec, p, params, step_limit=step_limit, ctx_seed=ctx_seed, ws=ws)
        solved += ok
    return solved / len(chosen)


def audit_history(spec: EnvSpec, history: SolutionHistory, problems_by_id: dict[str, Problem]) -> float:
    """Fraction of stored solutions that replay to a solved state."""
    total = 0
    good = 0
    for pid in history.solved_ids():
        for ep in history.solutions(pid):
            total += 1
            result = replay(spec, problems_by_id[pid], ep.actions())
            good += result.outcome == SOLVED
    return 1.0 if total == 0 else good / total


def _training_ctx(spec: EnvSpec, params: PolicyParams, rng: np.random.Generator):
    # Stored observations may mention machine-introduced variables; their
    # vectors are redrawn every time a state is embedded for training.
    if spec.signature.fresh_ok:
        return EpisodeContext(params.layout.n, rng=np.random.default_rng(rng.integers(2**63)))
    return None


def _epoch_row(epoch, level, solved_count, eval_success, loss, wall) -> dict:
    return {
        "epoch": epoch,
        "level": level,
        "solved_count": solved_count,
        "eval_success": round(float(eval_success), 6),
        "loss": round(float(loss), 8),
        "wall_time": round(wall, 3),
    }


def train_3sil(
    spec: EnvSpec,
    problems: list[Problem],
    config: TrainConfig,
    on_epoch=None,
) -> TrainResult:
    """Imitation training on the k shortest stored solutions (stratified).

    Problems must be difficulty-sorted when the curriculum is enabled. Stops
    early once the curriculum is complete and the evaluation clears the
    advance threshold (or `stop_at_success` without a curriculum).
    """
    rng = np.random.default_rng(config.seed)
    params = init_params(spec, seed=config.seed, n=config.n_embed, hidden=config.hidden)
    opt = AdamState.for_params(params, lr=config.lr)
    history = SolutionHistory(config.k)
    ws = Workspace(params.layout)
    problems_by_id = {p.id: p for p in problems}
    cur = (
        CurriculumState(config.block_size, config.advance_threshold, total=len(problems))
        if config.curriculum
        else None
    )
    metrics: list[dict] = []
    result = TrainResult(params, history, metrics)

    for epoch in range(config.max_epochs):
        t0 = time.monotonic()
        active = problems[: cur.active] if cur else problems
        num = config.warmup_episodes if epoch == 0 else config.episodes_per_epoch
        for _ in range(num):
            problem = sample_problem_biased(active, history, config.bias, rng)
            episode = collect_episode(
                spec, problem, params, rng,
                noise=config.action_noise, step_limit=config.step_limit, ws=ws,
            )
            if config.prune:
                episode = prune_loops(episode)
            history.add(episode)

        losses = []
        if history.sample_ids():
            for _ in range(config.num_batches):
                triples = sample_batch_stratified(history, config.batch_size, rng)
                batch = [
                    TrainSample(state=s, ctx=_training_ctx(spec, params, rng), mask=m, action=a)
                    for s, a, m in triples
                ]
                grads, loss = grad(batch, params, "cross-entropy", ws=ws)
                adam_step(params, grads, opt)
                losses.append(loss)

        eval_rate = greedy_success(
            spec, active, params, config.eval_sample, rng,
            step_limit=config.step_limit, ctx_seed=config.seed, ws=ws,
        )
        row = _epoch_row(
            epoch,
            cur.level if cur else 1,
            len(history),
            eval_rate,
            float(np.mean(losses)) if losses else 0.0,
            time.monotonic() - t0,
        )
        if config.audit_history:
            row["history_valid"] = round(audit_history(spec, history, problems_by_id), 6)
        metrics.append(row)
        if on_epoch is not None:
            on_epoch(epoch, params, row)

        if cur:
            if eval_rate >= cur.threshold:
                if cur.complete:
                    break
                cur.advance()
        elif config.stop_at_success is not None and eval_rate >= config.stop_at_success:
            break
    return result


def train_bc(
    spec: EnvSpec,
    problems: list[Problem],
    config: TrainConfig,
    on_epoch=None,
) -> TrainResult:
    """Behavioral cloning on every found solution via one FIFO buffer."""
    rng = np.random.default_rng(config.seed)
    params = init_params(spec, seed=config.seed, n=config.n_embed, hidden=config.hidden)
    opt = AdamState.for_params(params, lr=config.lr)
    buffer: deque = deque(maxlen=config.buffer_size)
    solved_tracker = SolutionHistory(k=1)  # only for the sampling bias
    ws = Workspace(params.layout)
    cur = (
        CurriculumState(config.block_size, config.advance_threshold, total=len(problems))
        if config.curriculum
        else None
    )
    metrics: list[dict] = []
    result = TrainResult(params, None, metrics)

    for epoch in range(config.max_epochs):
        t0 = time.monotonic()
        active = problems[: cur.active] if cur else problems
        num = config.warmup_episodes if epoch == 0 else config.episodes_per_epoch
        for _ in range(num):
            problem = sample_problem_biased(active, solved_tracker, config.bias, rng)
            episode = collect_episode(
                spec, problem, params, rng,
                noise=config.action_noise, step_limit=config.step_limit, ws=ws,
            )
            if config.prune:
                episode = prune_loops(episode)
            if episode.outcome == SOLVED:
                solved_tracker.add(episode)
                for (state, action), mask in zip(episode.transitions, episode.masks):
                    buffer.append((state, action, mask))

        losses = []
        if buffer:
            pool = list(buffer)
            for _ in range(config.num_batches):
                batch = [
                    TrainSample(
                        state=pool[i][0], ctx=_training_ctx(spec, params, rng),
                        mask=pool[i][2], action=pool[i][1],
                    )
                    for i in rng.integers(len(pool), size=config.batch_size)
                ]
                grads, loss = grad(batch, params, "cross-entropy", ws=ws)
                adam_step(params, grads, opt)
                losses.append(loss)

        eval_rate = greedy_success(
            spec, active, params, config.eval_sample, rng,
            step_limit=config.step_limit, ctx_seed=config.seed, ws=ws,
        )
        row = _epoch_row(
            epoch,
            cur.level if cur else 1,
            len(solved_tracker),
            eval_rate,
            float(np.mean(losses)) if losses else 0.0,
            time.monotonic() - t0,
        )
        metrics.append(row)
        if on_epoch is not None:
            on_epoch(epoch, params, row)

        if cur:
            if eval_rate >= cur.threshold:
                if cur.complete:
                    break
                cur.advance()
        elif config.stop_at_success is not None and eval_rate >= config.stop_at_success:
            break
    return result
