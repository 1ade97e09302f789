from .backends import Workspace
from .checkpoint import CheckpointError, load_checkpoint, read_header, save_checkpoint
from .compile import Program, compile_state
from .core import (
    AdamState,
    EpisodeContext,
    Gradients,
    LOSS_KINDS,
    PolicyParams,
    TrainSample,
    adam_step,
    embed,
    grad,
    init_params,
    masked_dist,
    policy_forward,
    state_value,
    zero_gradients,
)
from .layout import ModelLayout

__all__ = [
    "AdamState",
    "CheckpointError",
    "EpisodeContext",
    "Gradients",
    "LOSS_KINDS",
    "ModelLayout",
    "PolicyParams",
    "Program",
    "TrainSample",
    "Workspace",
    "adam_step",
    "compile_state",
    "embed",
    "grad",
    "init_params",
    "load_checkpoint",
    "masked_dist",
    "policy_forward",
    "read_header",
    "save_checkpoint",
    "state_value",
    "zero_gradients",
]
