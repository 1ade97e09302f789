"""Versioned checkpoint container: JSON header plus raw float64 parameters.

The header records everything needed to rebuild the layout (environment, n,
hidden width, action count, head configuration) and the name/shape/offset of
every tensor; the payload is the parameter buffer verbatim, so a reload is
bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..envs import EnvSpec, make_env
from .core import PolicyParams
from .layout import ModelLayout

MAGIC = b"RWLB"
VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(params: PolicyParams, path, extra: dict | None = None) -> None:
    lay = params.layout
    header = {
        "version": VERSION,
        "seed": params.seed,
        "total": lay.total,
        "entries": [
            {"name": name, "offset": off, "shape": list(shape)}
            for name, (off, shape) in lay.entries.items()
        ],
        "extra": extra or {},
        **lay.describe(),
    }
    blob = json.dumps(header, sort_keys=True).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        fh.write(np.ascontiguousarray(params.buf).tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        size = int.from_bytes(fh.read(8), "little")
        return json.loads(fh.read(size))


def load_checkpoint(path, spec: EnvSpec | None = None) -> PolicyParams:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        size = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(size))
        payload = fh.read()
    if header.get("version") != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {header.get('version')}")
    if spec is None:
        spec = make_env(header["env"])
    elif spec.name != header["env"]:
        raise CheckpointError(
            f"{path}: checkpoint is for '{header['env']}', not '{spec.name}'"
        )
    layout = ModelLayout(
        spec,
        n=header["n"],
        hidden=header["hidden"],
        value_head=header["value_head"],
        nonlins=tuple(header["nonlins"]),
    )
    if layout.num_actions != header["num_actions"]:
        raise CheckpointError(
            f"{path}: action count {header['num_actions']} does not match the "
            f"{spec.name} table ({layout.num_actions})"
        )
    entries = [
        {"name": name, "offset": off, "shape": list(shape)}
        for name, (off, shape) in layout.entries.items()
    ]
    if entries != header["entries"] or layout.total != header["total"]:
        raise CheckpointError(f"{path}: parameter layout does not match this build")
    buf = np.frombuffer(payload, dtype=np.float64).copy()
    if buf.shape != (layout.total,):
        raise CheckpointError(f"{path}: payload holds {buf.size} values, expected {layout.total}")
    return PolicyParams(layout, buf, header.get("seed", 0))
