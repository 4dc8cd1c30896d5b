"""Binary container shared by MPS and MPO caches.

Layout: one UTF-8 JSON header line terminated by ``\\n`` followed by the raw
payload, every site tensor in site order, each flattened row-major as
little-endian complex128. The header holds ``kind``, ``shapes`` (one list per
tensor) and a free-form ``meta`` object.
"""

from __future__ import annotations

import json
from math import prod
from pathlib import Path

import numpy as np

_DTYPE = np.dtype("<c16")


def write_tensors(path: str | Path, kind: str, tensors: list[np.ndarray], meta: dict | None = None) -> None:
    header = {"kind": kind, "shapes": [list(t.shape) for t in tensors], "meta": meta or {}}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for t in tensors:
            fh.write(np.ascontiguousarray(t, dtype=_DTYPE).tobytes())


def read_tensors(path: str | Path, kind: str) -> tuple[list[np.ndarray], dict]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("kind") != kind:
            raise ValueError(f"{path}: expected a {kind!r} container, found {header.get('kind')!r}")
        payload = fh.read()
    tensors = []
    offset = 0
    for shape in header["shapes"]:
        n = prod(shape)
        chunk = np.frombuffer(payload, dtype=_DTYPE, count=n, offset=offset)
        tensors.append(chunk.astype(np.complex128).reshape(shape))
        offset += n * _DTYPE.itemsize
    if offset != len(payload):
        raise ValueError(f"{path}: payload size does not match header shapes")
    return tensors, header.get("meta", {})
