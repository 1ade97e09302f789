"""Forward/backward compute kernels with a compiled fast path.

The per-sample work is a pile of small dense matvecs driven by the program
rows, far too fine-grained for numpy to be fast, so a Cython twin of the
reference implementation lives in ``rwlab._core``. Both backends share this
module's workspace buffers and must produce the same numbers (the reference
one is kept because it is obviously correct and always available).
"""

from __future__ import annotations

import numpy as np

from ..matching import active_backend, compiled_module
from .layout import RELU, ROW_FRESH, ROW_LEAF

_EMPTY_CTX = np.zeros((0, 0))


class Workspace:
    """Reusable scratch buffers sized to the largest program seen so far."""

    def __init__(self, layout):
        self.layout = layout
        self.cap = 0
        self.out = self.hid = self.xin = self.dout = None
        self.a0 = np.empty(layout.hidden)
        self.a1 = np.empty(layout.hidden)
        self.logits = np.empty(layout.num_actions)
        self.value = np.zeros(1)
        self.ensure(64)

    def ensure(self, rows: int):
        if rows <= self.cap:
            return
        cap = max(rows, 2 * self.cap)
        n = self.layout.n
        self.out = np.empty((cap, n))
        self.hid = np.empty((cap, n))
        self.xin = np.empty((cap, self.layout.max_arity * n))
        self.dout = np.empty((cap, n))
        self.cap = cap


def _apply_nonlin(code: int, z: np.ndarray):
    if code == RELU:
        np.maximum(z, 0.0, out=z)
    else:
        np.negative(z, out=z)
        np.exp(z, out=z)
        z += 1.0
        np.reciprocal(z, out=z)


def _nonlin_deriv(code: int, a: np.ndarray) -> np.ndarray:
    if code == RELU:
        return (a > 0.0).astype(np.float64)
    return a * (1.0 - a)


def _py_forward(params, prog, ctxmat, ws: Workspace):
    lay = params.layout
    n = lay.n
    out, hid, xin = ws.out, ws.hid, ws.xin
    code, arg, c0, c1, c2 = prog.code, prog.arg, prog.c0, prog.c1, prog.c2
    leaf_mat = params.leaf_mat
    nets = params.net_views
    for i in range(prog.n_rows):
        op = code[i]
        if op == ROW_LEAF:
            out[i, :n] = leaf_mat[arg[i]]
        elif op == ROW_FRESH:
            out[i, :n] = ctxmat[arg[i]]
        else:
            w1, b1, w2, b2, in_dim = nets[arg[i]]
            x = xin[i, :in_dim]
            x[:n] = out[c0[i], :n]
            if in_dim > n:
                x[n : 2 * n] = out[c1[i], :n]
            if in_dim > 2 * n:
                x[2 * n : 3 * n] = out[c2[i], :n]
            h = hid[i, :n]
            np.dot(w1, x, out=h)
            h += b1
            np.maximum(h, 0.0, out=h)
            y = out[i, :n]
            np.dot(w2, h, out=y)
            y += b2
    e = out[prog.n_rows - 1, :n]
    np.dot(params.pred_w0, e, out=ws.a0)
    ws.a0 += params.pred_b0
    _apply_nonlin(lay.nl0, ws.a0)
    np.dot(params.pred_w1, ws.a0, out=ws.a1)
    ws.a1 += params.pred_b1
    _apply_nonlin(lay.nl1, ws.a1)
    np.dot(params.pred_w2, ws.a1, out=ws.logits)
    ws.logits += params.pred_b2
    if lay.value_head:
        ws.value[0] = params.val_w @ ws.a1 + params.val_b[0]


def _py_backward(params, grads, prog, ctxmat, ws: Workspace, dlogits, dvalue):
    lay = params.layout
    n = lay.n
    g = grads
    a0, a1 = ws.a0, ws.a1
    e = ws.out[prog.n_rows - 1, :n]

    g.pred_w2 += np.outer(dlogits, a1)
    g.pred_b2 += dlogits
    da1 = params.pred_w2.T @ dlogits
    if lay.value_head and dvalue != 0.0:
        g.val_w += dvalue * a1
        g.val_b += dvalue
        da1 += dvalue * params.val_w
    dz1 = da1 * _nonlin_deriv(lay.nl1, a1)
    g.pred_w1 += np.outer(dz1, a0)
    g.pred_b1 += dz1
    da0 = params.pred_w1.T @ dz1
    dz0 = da0 * _nonlin_deriv(lay.nl0, a0)
    g.pred_w0 += np.outer(dz0, e)
    g.pred_b0 += dz0

    dout = ws.dout
    dout[: prog.n_rows, :n] = 0.0
    dout[prog.n_rows - 1, :n] = params.pred_w0.T @ dz0
    code, arg, c0, c1, c2 = prog.code, prog.arg, prog.c0, prog.c1, prog.c2
    nets = params.net_views
    gnets = g.net_views
    for i in range(prog.n_rows - 1, -1, -1):
        op = code[i]
        d = dout[i, :n]
        if op == ROW_LEAF:
            g.leaf_mat[arg[i]] += d
        elif op == ROW_FRESH:
            continue  # context vectors are untrainable
        else:
            w1, b1, w2, b2, in_dim = nets[arg[i]]
            gw1, gb1, gw2, gb2, _ = gnets[arg[i]]
            h = ws.hid[i, :n]
            x = ws.xin[i, :in_dim]
            gw2 += np.outer(d, h)
            gb2 += d
            dh = w2.T @ d
            dh *= h > 0.0
            gw1 += np.outer(dh, x)
            gb1 += dh
            dx = w1.T @ dh
            dout[c0[i], :n] += dx[:n]
            if in_dim > n:
                dout[c1[i], :n] += dx[n : 2 * n]
            if in_dim > 2 * n:
                dout[c2[i], :n] += dx[2 * n : 3 * n]


def _c_forward(params, prog, ctxmat, ws: Workspace):
    lay = params.layout
    compiled_module().tree_forward(
        params.buf,
        lay.net_w1o, lay.net_b1o, lay.net_w2o, lay.net_b2o, lay.net_in,
        lay.leaf_off, lay.n, lay.hidden,
        lay.pred_w0, lay.pred_b0, lay.pred_w1, lay.pred_b1, lay.pred_w2, lay.pred_b2,
        lay.val_w, lay.val_b, lay.nl0, lay.nl1,
        prog.code, prog.arg, prog.c0, prog.c1, prog.c2, prog.n_rows,
        ctxmat if ctxmat.size else _EMPTY_CTX,
        ws.out, ws.hid, ws.xin, ws.a0, ws.a1, ws.logits, ws.value,
    )


def _c_backward(params, grads, prog, ctxmat, ws: Workspace, dlogits, dvalue):
    lay = params.layout
    compiled_module().tree_backward(
        params.buf, grads.buf,
        lay.net_w1o, lay.net_b1o, lay.net_w2o, lay.net_b2o, lay.net_in,
        lay.leaf_off, lay.n, lay.hidden,
        lay.pred_w0, lay.pred_b0, lay.pred_w1, lay.pred_b1, lay.pred_w2, lay.pred_b2,
        lay.val_w, lay.val_b, lay.nl0, lay.nl1,
        prog.code, prog.arg, prog.c0, prog.c1, prog.c2, prog.n_rows,
        ws.out, ws.hid, ws.xin, ws.a0, ws.a1,
        np.ascontiguousarray(dlogits), float(dvalue),
        ws.dout,
    )


def forward(params, prog, ctxmat, ws: Workspace):
    """Fill ws.logits (and ws.value) for one compiled observation."""
    ws.ensure(prog.n_rows)
    if active_backend() == "c":
        _c_forward(params, prog, ctxmat, ws)
    else:
        _py_forward(params, prog, ctxmat, ws)


def backward(params, grads, prog, ctxmat, ws: Workspace, dlogits, dvalue=0.0):
    """Accumulate parameter gradients for one sample; forward() must have
    been called with the same program and workspace immediately before."""
    if active_backend() == "c":
        _c_backward(params, grads, prog, ctxmat, ws, dlogits, dvalue)
    else:
        _py_backward(params, grads, prog, ctxmat, ws, dlogits, dvalue)
