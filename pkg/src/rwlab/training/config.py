"""Training configuration and its flat key = value file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass
class TrainConfig:
    """Knobs for every trainer; `defaults` gives the per-environment values
    the experiments were run with (the loop-theory ones are full-scale and
    meant to be dialed down for desk use)."""

    env: str = "ra"
    algo: str = "3sil"           # 3sil | bc | a2c | sil | ppo
    seed: int = 0
    k: int = 1                   # stored solutions per problem
    batch_size: int = 32
    num_batches: int = 250       # gradient steps per epoch
    warmup_episodes: int = 1000  # episodes collected in epoch 0
    episodes_per_epoch: int = 1000
    max_epochs: int = 100
    action_noise: float = 0.05   # chance of a uniform random legal action
    bias: float = 1.0            # sampling weight of unsolved problems
    prune: bool = False          # loop-prune episodes before storing
    step_limit: int | None = None  # None = environment default
    curriculum: bool = False
    block_size: int = 400
    advance_threshold: float = 0.95
    eval_sample: int = 400
    lr: float = 1e-3
    n_embed: int | None = None   # None = per-environment default
    hidden: int = 64
    gamma: float = 0.99
    nstep: int = 5
    clip: float = 0.2
    sil_value_coef: float = 0.01
    buffer_size: int = 40_000
    ppo_update_every: int = 2000
    ppo_epochs: int = 4
    save_every: int = 0          # checkpoint every N epochs; 0 = final only
    audit_history: bool = False  # replay-validate the history every epoch
    stop_at_success: float | None = None  # early stop once eval reaches this

    @classmethod
    def defaults(cls, env: str) -> "TrainConfig":
        if env == "ra":
            return cls(env="ra", curriculum=True, block_size=400, advance_threshold=0.95)
        if env == "poly":
            return cls(
                env="poly",
                curriculum=True,
                block_size=400,
                advance_threshold=0.90,
                max_epochs=750,
                bias=5.0,
                prune=True,
            )
        if env == "aim":
            return cls(
                env="aim",
                warmup_episodes=2_000_000,
                episodes_per_epoch=10_000,
                num_batches=500,
                max_epochs=100,
                bias=5.0,
                prune=True,
            )
        raise ValueError(f"unknown environment '{env}'")


class ConfigError(Exception):
    pass


_FIELDS = {f.name: f for f in dataclasses.fields(TrainConfig)}
_OPTIONAL_INT = ("step_limit", "n_embed")
_OPTIONAL_FLOAT = ("stop_at_success",)


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name in _OPTIONAL_INT:
        return None if raw.lower() in ("none", "") else int(raw)
    if name in _OPTIONAL_FLOAT:
        return None if raw.lower() in ("none", "") else float(raw)
    ftype = _FIELDS[name].type
    if ftype == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)
    return raw


def parse_config(text: str, base: TrainConfig | None = None) -> TrainConfig:
    """Parse `key = value` lines (# starts a comment) over optional defaults."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        try:
            values[key] = _coerce(key, raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {exc}") from exc
    if base is None:
        base = TrainConfig.defaults(values["env"]) if "env" in values else TrainConfig()
    return dataclasses.replace(base, **values)


def read_config(path) -> TrainConfig:
    return parse_config(Path(path).read_text())


def write_config(config: TrainConfig, path) -> None:
    lines = []
    for f in dataclasses.fields(TrainConfig):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {'none' if value is None else value}")
    Path(path).write_text("\n".join(lines) + "\n")
