"""Parameter layout of the tree-network policy.

All trainable tensors live in one contiguous float64 buffer. The layout maps
names to (offset, shape) slices and precomputes the integer tables the
compute kernels need: one two-layer net per operator symbol (input width
arity*n), a cursor net and (for the loop-theory signature) a projection net
for machine-introduced variables, both unary-shaped, a row of the leaf matrix
per named leaf, and the three-layer action predictor with an optional scalar
value head.
"""

from __future__ import annotations

import numpy as np

from ..envs import EnvSpec

SIGMOID = 0
RELU = 1
_NONLIN_CODES = {"sigmoid": SIGMOID, "relu": RELU}

# Program row opcodes shared with the kernels.
ROW_LEAF = 0
ROW_FRESH = 1
ROW_NET = 2

DEFAULT_N = {"ra": 16, "poly": 32, "aim": 32}
DEFAULT_HIDDEN = 64


class ModelLayout:
    def __init__(
        self,
        spec: EnvSpec,
        n: int | None = None,
        hidden: int = DEFAULT_HIDDEN,
        value_head: bool = False,
        nonlins: tuple[str, str] = ("sigmoid", "relu"),
    ):
        self.env = spec.name
        self.n = DEFAULT_N[spec.name] if n is None else int(n)
        self.hidden = int(hidden)
        self.num_actions = spec.num_actions
        self.value_head = bool(value_head)
        self.nonlins = tuple(nonlins)
        self.nl0 = _NONLIN_CODES[nonlins[0]]
        self.nl1 = _NONLIN_CODES[nonlins[1]]

        sig = spec.signature
        n_ = self.n
        self.entries: dict[str, tuple[int, tuple[int, ...]]] = {}
        self._cursor = 0

        # Embedding nets, in signature order, then cursor and fresh projection.
        net_names: list[tuple[str, int]] = [
            (f"op:{s.name}", s.arity) for s in sig.operator_symbols()
        ]
        net_names.append(("cursor", 1))
        self.fresh_net_id = -1
        if sig.fresh_ok:
            net_names.append(("freshmap", 1))
            self.fresh_net_id = len(net_names) - 1
        self.cursor_net_id = net_names.index(("cursor", 1))
        self.net_ids = {name: i for i, (name, _) in enumerate(net_names)}
        self.num_nets = len(net_names)

        net_in = []
        w1o, b1o, w2o, b2o = [], [], [], []
        for name, arity in net_names:
            in_dim = arity * n_
            net_in.append(in_dim)
            w1o.append(self._add(f"{name}:w1", (n_, in_dim)))
            b1o.append(self._add(f"{name}:b1", (n_,)))
            w2o.append(self._add(f"{name}:w2", (n_, n_)))
            b2o.append(self._add(f"{name}:b2", (n_,)))
        self.net_in = np.asarray(net_in, dtype=np.int32)
        self.net_w1o = np.asarray(w1o, dtype=np.int64)
        self.net_b1o = np.asarray(b1o, dtype=np.int64)
        self.net_w2o = np.asarray(w2o, dtype=np.int64)
        self.net_b2o = np.asarray(b2o, dtype=np.int64)
        self.max_arity = max(arity for _, arity in net_names)

        leaves = sig.leaf_symbols()
        self.leaf_rows = {s.name: i for i, s in enumerate(leaves)}
        self.num_leaves = len(leaves)
        self.leaf_off = self._add("leaves", (self.num_leaves, n_))

        self.pred_w0 = self._add("pred:w0", (self.hidden, n_))
        self.pred_b0 = self._add("pred:b0", (self.hidden,))
        self.pred_w1 = self._add("pred:w1", (self.hidden, self.hidden))
        self.pred_b1 = self._add("pred:b1", (self.hidden,))
        self.pred_w2 = self._add("pred:w2", (self.num_actions, self.hidden))
        self.pred_b2 = self._add("pred:b2", (self.num_actions,))
        if value_head:
            self.val_w = self._add("value:w", (self.hidden,))
            self.val_b = self._add("value:b", (1,))
        else:
            self.val_w = -1
            self.val_b = -1
        self.total = self._cursor

        # The arithmetic zero leaf stays at its random initialization.
        self.frozen_leaf_rows: tuple[int, ...] = ()
        if spec.name == "ra":
            self.frozen_leaf_rows = (self.leaf_rows["0"],)

    def _add(self, name: str, shape: tuple[int, ...]) -> int:
        offset = self._cursor
        self.entries[name] = (offset, shape)
        self._cursor += int(np.prod(shape)) if shape else 1
        return offset

    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.total, dtype=bool)
        n_ = self.n
        for row in self.frozen_leaf_rows:
            start = self.leaf_off + row * n_
            mask[start : start + n_] = True
        return mask

    def describe(self) -> dict:
        return {
            "env": self.env,
            "n": self.n,
            "hidden": self.hidden,
            "num_actions": self.num_actions,
            "value_head": self.value_head,
            "nonlins": list(self.nonlins),
        }

    def matches(self, other: "ModelLayout") -> bool:
        return self.describe() == other.describe() and self.entries == other.entries
