"""Dense N-way tensor algebra.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 (or complex128
where a Fourier factor is involved).  Formulas in docstrings use 1-based
indices; everything in code is 0-based.

The canonical linearization is column-major over modes (mode-1 index
fastest), which is what the binary tensor format stores and what
:func:`unfold` uses to order the columns of a mode-p unfolding.
"""
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "as_tensor",
    "unfold",
    "fold",
    "mode_product",
    "multi_mode_product",
    "kronecker",
    "frobenius_norm",
    "stack_mode4",
    "linear_index",
]


def as_tensor(a, dtype=np.float64):
    t = np.asarray(a, dtype=dtype)
    if t.ndim < 1:
        raise DomainError("a tensor needs at least one mode")
    if any(d < 1 for d in t.shape):
        raise DomainError(f"every dimension must be >= 1, got {t.shape}")
    return t


def _check_mode(shape, p):
    if not 1 <= p <= len(shape):
        raise DomainError(f"mode {p} out of range for a tensor of order {len(shape)}")


@lru_cache(maxsize=128)
def _unfold_columns(shape, p):
    """Column index q (0-based) of every element, in column-major element order.

    Literal transcription of the unfolding rule
        q = 1 + sum_{k != p} (j_k - 1) * I_k,   I_k = prod_{m < k, m != p} J_m
    evaluated for all multi-indices at once.
    """
    idx = np.indices(shape).reshape(len(shape), -1, order="F")
    q = np.zeros(idx.shape[1], dtype=np.int64)
    stride = 1
    for k, jk in enumerate(shape):
        if k == p - 1:
            continue
        q += idx[k] * stride
        stride *= jk
    rows = idx[p - 1]
    q.setflags(write=False)
    rows.setflags(write=False)
    return rows, q


def linear_index(shape, index):
    """Column-major (mode-1 fastest) offset of a 0-based multi-index."""
    off, stride = 0, 1
    for j, d in zip(index, shape):
        off += j * stride
        stride *= d
    return off


def unfold(t, p):
    """Mode-p unfolding (p is 1-based): a ``J_p x prod_{k!=p} J_k`` matrix."""
    t = np.asarray(t)
    _check_mode(t.shape, p)
    rows, q = _unfold_columns(t.shape, p)
    ncols = t.size // t.shape[p - 1]
    m = np.empty((t.shape[p - 1], ncols), dtype=t.dtype)
    m[rows, q] = t.ravel(order="F")
    return m


def fold(m, p, shape):
    """Inverse of :func:`unfold`."""
    m = np.asarray(m)
    shape = tuple(int(d) for d in shape)
    _check_mode(shape, p)
    if m.ndim != 2:
        raise DomainError("fold expects a matrix")
    ncols = int(np.prod(shape, dtype=np.int64)) // shape[p - 1]
    if m.shape != (shape[p - 1], ncols):
        raise DomainError(
            f"matrix {m.shape} inconsistent with mode-{p} unfolding of {shape}"
        )
    rows, q = _unfold_columns(shape, p)
    return m[rows, q].reshape(shape, order="F")


def mode_product(t, m, p):
    """p-mode product ``t x_p m``: contracts mode p of ``t`` with the columns of ``m``."""
    t = np.asarray(t)
    m = np.asarray(m)
    _check_mode(t.shape, p)
    if m.ndim != 2 or m.shape[1] != t.shape[p - 1]:
        raise DomainError(
            f"matrix {m.shape} cannot multiply mode {p} of size {t.shape[p - 1]}"
        )
    out = np.tensordot(m, t, axes=(1, p - 1))
    return np.moveaxis(out, 0, p - 1)


def multi_mode_product(t, matrices, transpose=False):
    """Apply ``t x_1 m1 x_2 m2 ...``; ``None`` entries skip a mode.

    With ``transpose=True`` each matrix is transposed first, which is the
    projection ``t x_1 m1^T x_2 m2^T ...`` used for encoding.
    """
    out = t
    for p, m in enumerate(matrices, start=1):
        if m is None:
            continue
        out = mode_product(out, m.T if transpose else m, p)
    return out


def kronecker(a, b):
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    size = a.shape[0] * b.shape[0] * a.shape[1] * b.shape[1]
    if size > np.iinfo(np.intp).max // 16:
        raise MemoryError(f"Kronecker product of {a.shape} and {b.shape} is too large")
    return np.kron(a, b)


def frobenius_norm(t):
    t = np.asarray(t)
    return float(np.sqrt(np.sum(np.abs(t) ** 2)))


def stack_mode4(tensors):
    """Stack equally-shaped 3-way tensors along a new fourth mode."""
    tensors = [np.asarray(t) for t in tensors]
    if not tensors:
        raise DomainError("cannot stack an empty list")
    shape = tensors[0].shape
    if len(shape) != 3:
        raise DomainError(f"expected 3-way tensors, got shape {shape}")
    for t in tensors[1:]:
        if t.shape != shape:
            raise DomainError(f"shape mismatch in stack: {t.shape} vs {shape}")
    return np.stack(tensors, axis=3)
