"""Dense tensor primitives shared by every other module.

Tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` stored in
row-major (C) order. A matrix view of a tensor always groups the leading axes
into the row index and the trailing axes into the column index, so that
``t.reshape(prod(shape[:k]), -1)`` is the canonical matricization.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

DenseTensor = np.ndarray


class ShapeError(ValueError):
    """Raised when tensor legs that must match have different dimensions."""


def as_tensor(data, shape: Sequence[int] | None = None) -> DenseTensor:
    t = np.asarray(data, dtype=np.complex128)
    if shape is not None:
        t = t.reshape(tuple(shape))
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor contains non-finite entries")
    return t


def contract(a: DenseTensor, b: DenseTensor, index_pairs: Sequence[tuple[int, int]]) -> DenseTensor:
    """Contract ``a`` and ``b`` over the given ``(a_axis, b_axis)`` pairs.

    The free axes of ``a`` come first in the result, followed by the free axes
    of ``b``, each group in its original order.
    """
    a_axes = [p[0] for p in index_pairs]
    b_axes = [p[1] for p in index_pairs]
    for i, j in index_pairs:
        if a.shape[i] != b.shape[j]:
            raise ShapeError(f"axis {i} of a has dim {a.shape[i]} but axis {j} of b has dim {b.shape[j]}")
    return np.tensordot(a, b, axes=(a_axes, b_axes))


@dataclass
class SvdResult:
    u: DenseTensor
    s: np.ndarray
    vdag: DenseTensor
    discarded_weight: float


def svd_truncated(
    t: DenseTensor,
    split: int | Sequence[int],
    cutoff: float = 1e-12,
    max_bond: int | None = None,
    mode: str = "value",
) -> SvdResult:
    """Truncated SVD of ``t`` across an axis bipartition.

    ``split`` is either the number of leading axes forming the row index or an
    explicit list of row axes (the remaining axes, in order, form the column
    index). With ``mode="value"`` singular values ``<= cutoff`` are dropped;
    with ``mode="weight"`` the smallest singular values are dropped as long as
    their relative squared weight stays ``<= cutoff``. At most ``max_bond`` and
    never fewer than one are kept. ``u`` carries the row axes plus a new
    trailing bond axis; ``vdag`` carries a new leading bond axis plus the
    column axes.
    """
    if isinstance(split, int):
        row_axes = list(range(split))
    else:
        row_axes = list(split)
    col_axes = [ax for ax in range(t.ndim) if ax not in row_axes]
    if not row_axes or not col_axes:
        raise ValueError("split must partition the axes into two non-empty groups")
    tp = np.transpose(t, row_axes + col_axes)
    row_shape = tp.shape[: len(row_axes)]
    col_shape = tp.shape[len(row_axes):]
    mat = tp.reshape(prod(row_shape), prod(col_shape))
    try:
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        import scipy.linalg

        u, s, vh = scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")
    total = float(np.sum(s**2))
    if mode == "value":
        keep = int(np.count_nonzero(s > cutoff))
    elif mode == "weight":
        # tail[k] = relative weight of s[k:]
        tail = np.cumsum((s**2)[::-1])[::-1] / total if total > 0 else np.zeros_like(s)
        keep = int(np.count_nonzero(tail > cutoff))
    else:
        raise ValueError(f"unknown truncation mode {mode!r}")
    if max_bond is not None:
        keep = min(keep, max_bond)
    keep = max(keep, 1)
    dropped = float(np.sum(s[keep:] ** 2))
    weight = dropped / total if total > 0 else 0.0
    return SvdResult(
        u=u[:, :keep].reshape(*row_shape, keep),
        s=s[:keep],
        vdag=vh[:keep, :].reshape(keep, *col_shape),
        discarded_weight=weight,
    )


def polar_unitary(g: DenseTensor) -> DenseTensor:
    """Unitary polar factor ``U V^dagger`` of ``g = U S V^dagger``.

    This is the unitary ``W`` maximizing ``Re Tr[g^dagger W]``. Tensors with an
    even number of legs are matricized across the middle.
    """
    g = np.asarray(g, dtype=np.complex128)
    shape = g.shape
    if g.ndim != 2:
        half = g.ndim // 2
        g = g.reshape(prod(shape[:half]), -1)
    if g.shape[0] != g.shape[1]:
        raise ShapeError(f"polar factor needs a square matrix, got {g.shape}")
    u, s, vh = np.linalg.svd(g)
    if s[0] == 0.0:
        raise ValueError("polar factor of the zero matrix is undefined")
    return (u @ vh).reshape(shape)


def random_near_identity_unitary(dim: int, scale: float = 0.01, seed: int | np.random.Generator = 0) -> DenseTensor:
    """QR-orthonormalized ``I + scale * X`` with complex Gaussian ``X``.

    The R-factor phases are absorbed into Q so that ``scale -> 0`` returns the
    identity exactly.
    """
    if dim < 1 or scale < 0:
        raise ValueError("dim must be >= 1 and scale >= 0")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = np.eye(dim, dtype=np.complex128) + scale * noise
    q, r = np.linalg.qr(m)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def is_unitary(m: np.ndarray, atol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol, rtol=0)
