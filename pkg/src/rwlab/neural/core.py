"""Tree-network policy: parameters, forward evaluation, gradients, Adam.

The model embeds an observation bottom-up with one small two-layer net per
operator (the cursor is a unary net spliced in at its position), feeds the
root vector through a three-layer predictor and softmaxes over the legal
actions. Gradients are reverse-accumulated through the dynamically shaped
fold; no autodiff framework is involved.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..envs import EnvSpec, EnvState
from .backends import Workspace, backward, forward
from .compile import compile_state
from .layout import ModelLayout

log = logging.getLogger(__name__)

LOSS_KINDS = ("cross-entropy", "a2c", "sil-paac", "ppo-clip", "value-mse")


class _Views:
    """Named ndarray views over a flat parameter or gradient buffer."""

    __slots__ = (
        "buf", "layout", "net_views", "leaf_mat",
        "pred_w0", "pred_b0", "pred_w1", "pred_b1", "pred_w2", "pred_b2",
        "val_w", "val_b",
    )

    def __init__(self, layout: ModelLayout, buf: np.ndarray):
        self.layout = layout
        self.buf = buf

        def view(name):
            off, shape = layout.entries[name]
            size = int(np.prod(shape)) if shape else 1
            return buf[off : off + size].reshape(shape)

        nets = []
        for name, net_id in layout.net_ids.items():
            in_dim = int(layout.net_in[net_id])
            nets.append(
                (view(f"{name}:w1"), view(f"{name}:b1"), view(f"{name}:w2"), view(f"{name}:b2"), in_dim)
            )
        self.net_views = nets
        self.leaf_mat = view("leaves")
        self.pred_w0 = view("pred:w0")
        self.pred_b0 = view("pred:b0")
        self.pred_w1 = view("pred:w1")
        self.pred_b1 = view("pred:b1")
        self.pred_w2 = view("pred:w2")
        self.pred_b2 = view("pred:b2")
        if layout.value_head:
            self.val_w = view("value:w")
            self.val_b = view("value:b")
        else:
            self.val_w = None
            self.val_b = None


class PolicyParams(_Views):
    """All trainable tensors, packed into one contiguous float64 buffer."""

    __slots__ = ("frozen", "seed")

    def __init__(self, layout: ModelLayout, buf: np.ndarray, seed: int = 0):
        if buf.shape != (layout.total,):
            raise ValueError(f"parameter buffer has shape {buf.shape}, expected ({layout.total},)")
        super().__init__(layout, buf)
        self.frozen = layout.frozen_mask()
        self.seed = seed

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.layout, self.buf.copy(), self.seed)

    @property
    def num_params(self) -> int:
        return self.layout.total


class Gradients(_Views):
    __slots__ = ()


def zero_gradients(layout: ModelLayout) -> Gradients:
    return Gradients(layout, np.zeros(layout.total))


def init_params(
    spec: EnvSpec,
    seed: int = 0,
    n: int | None = None,
    hidden: int = 64,
    value_head: bool = False,
    nonlins: tuple[str, str] = ("sigmoid", "relu"),
) -> PolicyParams:
    """Fan-in-scaled uniform weights, standard-normal leaf vectors."""
    layout = ModelLayout(spec, n=n, hidden=hidden, value_head=value_head, nonlins=nonlins)
    rng = np.random.default_rng(seed)
    buf = np.empty(layout.total)
    for name, (off, shape) in layout.entries.items():
        size = int(np.prod(shape)) if shape else 1
        if name == "leaves":
            buf[off : off + size] = rng.standard_normal(size)
        else:
            if len(shape) == 2:
                fan_in = shape[1]
            elif name.startswith("value:"):
                fan_in = layout.hidden
            else:
                # 1-D bias: scale like its weight matrix ("X:b1" -> "X:w1").
                wname = name[:-3] + ":w" + name[-1]
                fan_in = layout.entries[wname][1][1]
            bound = 1.0 / np.sqrt(fan_in)
            buf[off : off + size] = rng.uniform(-bound, bound, size)
    return PolicyParams(layout, buf, seed)


class EpisodeContext:
    """Vectors for machine-introduced variables, resampled per episode.

    Rows are drawn lazily in index order from a per-episode stream, so the
    matrix is a pure function of the seed regardless of evaluation order.
    """

    def __init__(self, n: int, rng: np.random.Generator | None = None, seed: int | None = None):
        if rng is None:
            rng = np.random.default_rng(0 if seed is None else seed)
        self._rng = rng
        self._n = n
        self._mat = np.empty((0, n))

    def matrix(self, rows: int) -> np.ndarray:
        if rows > len(self._mat):
            extra = self._rng.standard_normal((rows - len(self._mat), self._n))
            self._mat = np.vstack([self._mat, extra]) if self._mat.size else extra
        return self._mat

    def vector(self, index: int) -> np.ndarray:
        return self.matrix(index + 1)[index]


_NULL_CTX = EpisodeContext(1, seed=0)


def masked_dist(logits: np.ndarray, mask: tuple[int, ...]) -> np.ndarray:
    """Softmax restricted to the legal ids; illegal entries are exactly 0."""
    if len(mask) == 0:
        raise ValueError("empty legal-action mask")
    ids = np.asarray(mask, dtype=np.intp)
    z = logits[ids]
    z = z - z.max()
    ez = np.exp(z)
    dist = np.zeros_like(logits)
    dist[ids] = ez / ez.sum()
    return dist


@dataclass
class TrainSample:
    """One transition prepared for a gradient step.

    Which fields matter depends on the loss kind: imitation uses `action`
    only, the actor-critic losses additionally use `advantage` and
    `value_target`, the clipped-ratio loss also needs `old_prob`.
    """

    state: EnvState
    ctx: "EpisodeContext"
    mask: tuple[int, ...]
    action: int = -1
    advantage: float = 0.0
    value_target: float = 0.0
    old_prob: float = 1.0


def _run_forward(state: EnvState, params: PolicyParams, ctx: EpisodeContext | None, ws: Workspace):
    prog = compile_state(state.term, state.cursor, params.layout)
    if prog.fresh_hi > 0:
        if ctx is None:
            raise ValueError("observation contains machine-introduced variables but no context was given")
        ctxmat = ctx.matrix(prog.fresh_hi)
    else:
        ctxmat = _NULL_CTX.matrix(0)
    forward(params, prog, ctxmat, ws)
    return prog, ctxmat


def embed(state: EnvState, params: PolicyParams, ctx: EpisodeContext | None = None,
          ws: Workspace | None = None) -> np.ndarray:
    """Root embedding vector of the observation (cursor net applied)."""
    ws = ws or Workspace(params.layout)
    prog, _ = _run_forward(state, params, ctx, ws)
    return ws.out[prog.n_rows - 1, : params.layout.n].copy()


def policy_forward(
    state: EnvState,
    params: PolicyParams,
    ctx: EpisodeContext | None,
    mask: tuple[int, ...],
    ws: Workspace | None = None,
) -> tuple[np.ndarray, float | None]:
    """Masked action distribution (and state value if the head exists)."""
    ws = ws or Workspace(params.layout)
    _run_forward(state, params, ctx, ws)
    dist = masked_dist(ws.logits, mask)
    value = float(ws.value[0]) if params.layout.value_head else None
    return dist, value


def state_value(state: EnvState, params: PolicyParams, ctx: EpisodeContext | None,
                ws: Workspace | None = None) -> float:
    ws = ws or Workspace(params.layout)
    _run_forward(state, params, ctx, ws)
    return float(ws.value[0])


def _loss_and_dlogits(kind: str, sample: TrainSample, dist: np.ndarray, value: float | None,
                      clip: float, sil_value_coef: float):
    a = sample.action
    if kind == "cross-entropy":
        p = max(dist[a], 1e-300)
        d = dist.copy()
        d[a] -= 1.0
        return -np.log(p), d, 0.0
    if kind in ("a2c", "sil-paac"):
        adv = sample.advantage
        p = max(dist[a], 1e-300)
        d = dist.copy()
        d[a] -= 1.0
        d *= adv
        coef = sil_value_coef if kind == "sil-paac" else 1.0
        dv = coef * (value - sample.value_target)
        loss = -adv * np.log(p) + coef * 0.5 * (sample.value_target - value) ** 2
        return loss, d, dv
    if kind == "ppo-clip":
        if sample.old_prob <= 0.0:
            raise ValueError("ppo-clip needs a positive behavior-policy probability")
        adv = sample.advantage
        ratio = dist[a] / sample.old_prob
        unclipped = ratio * adv
        clipped = min(max(ratio, 1.0 - clip), 1.0 + clip) * adv
        # d(-min)/dratio is -adv on the unclipped branch, 0 when the clipped
        # branch is strictly smaller (its derivative vanishes outside the band).
        if unclipped <= clipped:
            dratio = -adv
        else:
            dratio = 0.0
        donehot = -dist * ratio
        donehot[a] += ratio
        d = dratio * donehot
        dv = value - sample.value_target
        loss = -min(unclipped, clipped) + 0.5 * (sample.value_target - value) ** 2
        return loss, d, dv
    if kind == "value-mse":
        d = np.zeros_like(dist)
        return 0.5 * (sample.value_target - value) ** 2, d, value - sample.value_target
    raise ValueError(f"unknown loss kind '{kind}'; expected one of {LOSS_KINDS}")


def grad(
    batch: list[TrainSample],
    params: PolicyParams,
    loss_kind: str,
    clip: float = 0.2,
    sil_value_coef: float = 0.01,
    ws: Workspace | None = None,
) -> tuple[Gradients, float]:
    """Mean loss over the batch and its gradient; frozen slots get exact zeros."""
    if loss_kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind '{loss_kind}'; expected one of {LOSS_KINDS}")
    if loss_kind != "cross-entropy" and not params.layout.value_head:
        raise ValueError(f"loss kind '{loss_kind}' needs a value head")
    ws = ws or Workspace(params.layout)
    grads = zero_gradients(params.layout)
    total = 0.0
    for sample in batch:
        prog, ctxmat = _run_forward(sample.state, params, sample.ctx, ws)
        dist = masked_dist(ws.logits, sample.mask)
        value = float(ws.value[0]) if params.layout.value_head else None
        loss, dlogits, dvalue = _loss_and_dlogits(
            loss_kind, sample, dist, value, clip, sil_value_coef
        )
        total += loss
        backward(params, grads, prog, ctxmat, ws, dlogits, dvalue)
    if batch:
        grads.buf /= len(batch)
        total /= len(batch)
    grads.buf[params.frozen] = 0.0
    return grads, float(total)


@dataclass
class AdamState:
    """First/second-moment accumulators mirroring the parameter buffer."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: PolicyParams, lr: float = 1e-3, **kw) -> "AdamState":
        return cls(np.zeros_like(params.buf), np.zeros_like(params.buf), lr=lr, **kw)


def adam_step(params: PolicyParams, grads: Gradients, opt: AdamState) -> tuple[PolicyParams, AdamState]:
    """Standard bias-corrected update, applied in place.

    A non-finite gradient skips the step (and is logged) rather than
    corrupting the parameters.
    """
    g = grads.buf
    if not np.isfinite(g).all():
        log.warning("skipping optimizer step: non-finite gradient")
        return params, opt
    opt.t += 1
    opt.m *= opt.beta1
    opt.m += (1.0 - opt.beta1) * g
    opt.v *= opt.beta2
    opt.v += (1.0 - opt.beta2) * np.square(g)
    mhat = opt.m / (1.0 - opt.beta1 ** opt.t)
    vhat = opt.v / (1.0 - opt.beta2 ** opt.t)
    params.buf -= opt.lr * mhat / (np.sqrt(vhat) + opt.eps)
    return params, opt
