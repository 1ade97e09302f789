"""Actor-critic baselines: advantage targets, the three loss variants and a
compact episodic trainer.

The loss arithmetic follows the standard formulations exactly (n-step
bootstrapped targets with discount 0.99, clipped ratio objective with band
0.2, positive-advantage filtering with a 0.01 critic weight); the collection
cadence is an episodic desk-scale adaptation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..envs import SOLVED, EnvSpec, Problem, legal_actions
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
from .history import SolutionHistory, sample_problem_biased
from .imitation import CurriculumState, TrainResult, _epoch_row, greedy_success


def nstep_targets(rewards: list[float], values: list[float], gamma: float, n: int, solved: bool) -> list[float]:
    """Bootstrapped n-step return for every timestep of one episode.

    `values` holds V(s_0..s_T) including the final state; a solved episode is
    terminal (nothing to bootstrap past the end), a truncated one bootstraps
    from the state it was cut at.
    """
    horizon = len(rewards)
    targets = []
    for t in range(horizon):
        m = min(n, horizon - t)
        acc = 0.0
        for i in range(m):
            acc += (gamma ** i) * rewards[t + i]
        if t + m < horizon or not solved:
            acc += (gamma ** m) * values[t + m]
        targets.append(acc)
    return targets


def episode_samples(
    spec: EnvSpec,
    episode: Episode,
    params: PolicyParams,
    gamma: float,
    n: int,
    ws: Workspace | None = None,
    ctx: EpisodeContext | None = None,
    want_old_prob: bool = False,
) -> list[TrainSample]:
    """Turn one episode into advantage-annotated training samples."""
    ws = ws or Workspace(params.layout)
    if ctx is None and spec.signature.fresh_ok:
        ctx = EpisodeContext(params.layout.n, seed=0)
    dists = []
    values = []
    for (state, action), mask in zip(episode.transitions, episode.masks):
        dist, value = policy_forward(state, params, ctx, mask, ws=ws)
        dists.append(dist)
        values.append(value)
    final_mask = legal_actions(spec, episode.final_state)
    if final_mask:
        _, v_last = policy_forward(episode.final_state, params, ctx, final_mask, ws=ws)
    else:
        v_last = 0.0
    values.append(v_last)
    rewards = [0.0] * episode.length
    if episode.outcome == SOLVED and episode.length:
        rewards[-1] = 1.0
    targets = nstep_targets(rewards, values, gamma, n, episode.outcome == SOLVED)
    samples = []
    for t, ((state, action), mask) in enumerate(zip(episode.transitions, episode.masks)):
        samples.append(
            TrainSample(
                state=state,
                ctx=ctx,
                mask=mask,
                action=action,
                advantage=targets[t] - values[t],
                value_target=targets[t],
                old_prob=float(dists[t][action]) if want_old_prob else 1.0,
            )
        )
    return samples


def a2c_losses(batch: list[TrainSample], params: PolicyParams, ws: Workspace | None = None) -> float:
    """Mean of policy loss -log pi(a|s) * A plus value loss (target - V)^2 / 2."""
    ws = ws or Workspace(params.layout)
    total = 0.0
    for s in batch:
        dist, value = policy_forward(s.state, params, s.ctx, s.mask, ws=ws)
        p = max(float(dist[s.action]), 1e-300)
        total += -s.advantage * np.log(p) + 0.5 * (s.value_target - value) ** 2
    return total / len(batch) if batch else 0.0


def sil_paac_filter(batch: list[TrainSample]) -> list[TrainSample]:
    """Keep only transitions whose advantage is strictly positive."""
    return [s for s in batch if s.advantage > 0.0]


def ppo_loss(batch: list[TrainSample], params: PolicyParams, clip: float = 0.2,
             ws: Workspace | None = None) -> float:
    """Mean clipped-ratio objective plus value loss.

    Every sample must carry the behavior policy's probability of its action.
    """
    ws = ws or Workspace(params.layout)
    total = 0.0
    for s in batch:
        if s.old_prob <= 0.0:
            raise ValueError("ppo_loss needs positive behavior-policy probabilities")
        dist, value = policy_forward(s.state, params, s.ctx, s.mask, ws=ws)
        ratio = float(dist[s.action]) / s.old_prob
        unclipped = ratio * s.advantage
        clipped = min(max(ratio, 1.0 - clip), 1.0 + clip) * s.advantage
        total += -min(unclipped, clipped) + 0.5 * (s.value_target - value) ** 2
    return total / len(batch) if batch else 0.0


@dataclass
class _PrioritizedBuffer:
    """Replay with sampling probability proportional to priority^alpha."""

    capacity: int
    alpha: float = 0.6
    items: list = field(default_factory=list)
    priorities: list = field(default_factory=list)

    def push(self, item, priority: float):
        if len(self.items) >= self.capacity:
            self.items.pop(0)
            self.priorities.pop(0)
        self.items.append(item)
        self.priorities.append(max(priority, 1e-6))

    def sample(self, count: int, rng: np.random.Generator) -> list:
        if not self.items:
            return []
        p = np.asarray(self.priorities) ** self.alpha
        p /= p.sum()
        idx = rng.choice(len(self.items), size=count, p=p)
        return [self.items[int(i)] for i in idx]


def train_rl(
    spec: EnvSpec,
    problems: list[Problem],
    config: TrainConfig,
    on_epoch=None,
) -> TrainResult:
    """Episodic trainer for the a2c / sil / ppo baselines."""
    if config.algo not in ("a2c", "sil", "ppo"):
        raise ValueError(f"train_rl got algo '{config.algo}'")
    rng = np.random.default_rng(config.seed)
    lr = 0.002 if config.algo == "ppo" else config.lr
    params = init_params(
        spec, seed=config.seed, n=config.n_embed, hidden=config.hidden, value_head=True
    )
    opt = AdamState.for_params(params, lr=lr)
    history = SolutionHistory(k=1)  # tracks solved problems for bias/metrics
    ws = Workspace(params.layout)
    sil_buffer = _PrioritizedBuffer(config.buffer_size)
    ppo_pending: list[TrainSample] = []
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
        losses = []
        for _ in range(num):
            problem = sample_problem_biased(active, history, config.bias, rng)
            episode = collect_episode(
                spec, problem, params, rng,
                noise=config.action_noise, step_limit=config.step_limit, ws=ws,
            )
            if config.prune:
                episode = prune_loops(episode)
            history.add(episode)
            if not episode.length:
                continue
            samples = episode_samples(
                spec, episode, params, config.gamma, config.nstep, ws=ws,
                want_old_prob=config.algo == "ppo",
            )
            if config.algo == "ppo":
                ppo_pending.extend(samples)
                if len(ppo_pending) >= config.ppo_update_every:
                    for _ in range(config.ppo_epochs):
                        order = rng.permutation(len(ppo_pending))
                        for lo in range(0, len(order), config.batch_size):
                            chunk = [ppo_pending[i] for i in order[lo : lo + config.batch_size]]
                            grads, loss = grad(chunk, params, "ppo-clip", clip=config.clip, ws=ws)
                            adam_step(params, grads, opt)
                            losses.append(loss)
                    ppo_pending.clear()
            else:
                grads, loss = grad(samples, params, "a2c", ws=ws)
                adam_step(params, grads, opt)
                losses.append(loss)
                if config.algo == "sil":
                    # Full-episode discounted returns prioritize good memories.
                    mc = episode_samples(spec, episode, params, config.gamma,
                                         n=max(episode.length, 1), ws=ws)
                    for s in mc:
                        sil_buffer.push(s, max(s.advantage, 0.0))
        if config.algo == "sil" and sil_buffer.items:
            for _ in range(config.num_batches):
                batch = sil_buffer.sample(config.batch_size, rng)
                batch = sil_paac_filter(batch)
                if not batch:
                    continue
                grads, loss = grad(
                    batch, params, "sil-paac", sil_value_coef=config.sil_value_coef, ws=ws
                )
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
