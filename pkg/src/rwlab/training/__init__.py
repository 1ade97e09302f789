from .config import ConfigError, TrainConfig, parse_config, read_config, write_config
from .episodes import Episode, collect_episode, prune_loops, sample_action
from .history import (
    SolutionHistory,
    sample_batch_stratified,
    sample_problem_biased,
    update_history,
)
from .imitation import (
    CurriculumState,
    TrainResult,
    audit_history,
    greedy_rollout,
    greedy_success,
    train_3sil,
    train_bc,
)
from .rl import (
    a2c_losses,
    episode_samples,
    nstep_targets,
    ppo_loss,
    sil_paac_filter,
    train_rl,
)

__all__ = [
    "ConfigError",
    "CurriculumState",
    "Episode",
    "SolutionHistory",
    "TrainConfig",
    "TrainResult",
    "a2c_losses",
    "audit_history",
    "collect_episode",
    "episode_samples",
    "greedy_rollout",
    "greedy_success",
    "nstep_targets",
    "parse_config",
    "ppo_loss",
    "prune_loops",
    "read_config",
    "sample_action",
    "sample_batch_stratified",
    "sample_problem_biased",
    "train_3sil",
    "train_bc",
    "train_rl",
    "update_history",
    "write_config",
]
