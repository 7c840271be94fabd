"""Matrix factorizations used by the basis learners.

All routines wrap LAPACK through :mod:`numpy.linalg`, which is deterministic
for a fixed input.  Singular vectors follow one sign convention: the entry
of largest magnitude in every left singular vector is made real and
non-negative (the matching right vector absorbs the conjugate phase).
"""
import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "svd",
    "fix_signs",
    "leading_left_singular_vectors",
    "pinv",
    "lstsq",
    "rank_tolerance",
    "projector_distance",
    "leading_eigenvectors",
]


def _finite_matrix(m):
    m = np.asarray(m)
    if m.ndim != 2:
        raise DomainError(f"expected a matrix, got an array with {m.ndim} dims")
    if not np.issubdtype(m.dtype, np.complexfloating):
        m = m.astype(np.float64, copy=False)
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix contains non-finite entries")
    return m


def fix_signs(u, v=None):
    """Rotate each column of ``u`` so its largest-magnitude entry is real >= 0.

    ``v`` (right singular vectors as columns) receives the same phase so
    that ``u @ diag(s) @ v^H`` is unchanged.
    """
    u = np.array(u, copy=True)
    if u.size == 0:
        return (u, v) if v is not None else u
    pivot = np.argmax(np.abs(u), axis=0)
    lead = u[pivot, np.arange(u.shape[1])]
    mag = np.abs(lead)
    phase = np.where(mag > 0, lead / np.where(mag > 0, mag, 1), 1)
    u = u * np.conj(phase)
    if v is None:
        return u
    v = np.array(v, copy=True)
    k = min(v.shape[1], u.shape[1])
    v[:, :k] = v[:, :k] * np.conj(phase[:k])
    return u, v


def svd(m, full_matrices=False):
    """Thin SVD ``m = U diag(s) V^H`` with descending ``s``.

    Returns ``(U, s, V)`` where ``V`` holds the right singular vectors as
    columns (not ``V^H``).
    """
    m = _finite_matrix(m)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge: {exc}") from exc
    u, v = fix_signs(u, vh.conj().T)
    return u, s, v


def rank_tolerance(shape, s):
    if len(s) == 0:
        return 0.0
    return max(shape) * np.finfo(np.float64).eps * float(s[0])


def leading_left_singular_vectors(m, r, return_deficiency=False):
    """First ``r`` left singular vectors of ``m``.

    When ``r`` exceeds the numerical rank the trailing columns still form an
    orthonormal completion (taken from the full SVD), and the returned flag
    is True.
    """
    m = _finite_matrix(m)
    r = int(r)
    if r < 1 or r > m.shape[0]:
        raise DomainError(f"cannot take {r} left singular vectors of a {m.shape} matrix")
    full = r > min(m.shape)
    u, s, _ = svd(m, full_matrices=full)
    rank = int(np.sum(s > rank_tolerance(m.shape, s)))
    u = u[:, :r]
    if return_deficiency:
        return u, r > rank
    return u


def pinv(m):
    """Moore-Penrose pseudo-inverse; singular values below ``max(shape)*eps*s1`` are dropped."""
    m = _finite_matrix(m)
    if m.size == 0:
        return np.zeros(m.shape[::-1], dtype=m.dtype)
    u, s, v = svd(m)
    keep = s > rank_tolerance(m.shape, s)
    if not np.any(keep):
        return np.zeros(m.shape[::-1], dtype=m.dtype)
    return (v[:, keep] / s[keep]) @ u[:, keep].conj().T


def lstsq(a, b):
    """Minimum-norm least-squares solution of ``a x = b``."""
    a = _finite_matrix(a)
    b = np.asarray(b)
    vector = b.ndim == 1
    b2 = b[:, None] if vector else b
    if b2.ndim != 2 or b2.shape[0] != a.shape[0]:
        raise DomainError(f"shape mismatch: a is {a.shape}, b is {b.shape}")
    x = pinv(a) @ b2
    return x[:, 0] if vector else x


def projector_distance(a, b):
    """``||A A^H - B B^H||_F`` for matrices with orthonormal columns."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] != b.shape[0]:
        raise DomainError(f"row mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a @ a.conj().T - b @ b.conj().T))


def leading_eigenvectors(h, k):
    """Top-``k`` eigenvectors of a Hermitian matrix, eigenvalues descending."""
    w, v = np.linalg.eigh(h)
    order = np.argsort(w, kind="stable")[::-1][:k]
    return fix_signs(v[:, order]), w[order]
