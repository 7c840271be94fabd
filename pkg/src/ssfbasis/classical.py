"""Classical baselines: EOFs on an unfolded field, and 2D Fourier + 1D EOF."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .linalg import pinv, svd
from .tensor import fold, kronecker, unfold

log = logging.getLogger(__name__)

__all__ = [
    "EofBasis",
    "FourierEofBasis",
    "demean_matrix",
    "learn_eof",
    "eof_encode",
    "eof_decode",
    "build_fourier_matrix",
    "learn_fourier_eof",
    "fourier_eof_encode",
    "fourier_eof_decode",
]


@dataclass
class EofBasis:
    factors: np.ndarray  # I x K, orthonormal columns
    eigenvalues: np.ndarray  # K, descending
    mean: np.ndarray = None  # length I, optional

    @property
    def k(self):
        return self.factors.shape[1]


@dataclass
class FourierEofBasis:
    f1: np.ndarray  # M x NF1 complex
    f2: np.ndarray  # N x NF2 complex
    eof: np.ndarray  # I x KF real
    lx: float
    ly: float
    mean_field: np.ndarray = None
    # cached (F^T)^dagger, built on first use
    _ft_pinv: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def shape(self):
        return (self.f1.shape[0], self.f2.shape[0], self.eof.shape[0])

    @property
    def hyper(self):
        return self.f1.shape[1], self.f2.shape[1], self.eof.shape[1]

    def fourier_matrix(self):
        return kronecker(self.f2, self.f1)

    def ft_pinv(self):
        if self._ft_pinv is None:
            self._ft_pinv = pinv(self.fourier_matrix().T)
        return self._ft_pinv


def demean_matrix(y):
    """Subtract the row-wise mean: returns ``(y - m 1^T, m)``."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] < 1:
        raise DomainError("demean_matrix expects an I x J matrix with J >= 1")
    m = y.mean(axis=1)
    return y - m[:, None], m


def learn_eof(x, k):
    """Leading ``k`` EOFs of a centered ``I x J`` matrix.

    The EOFs are the eigenvectors of ``x x^T``; they are obtained here as
    left singular vectors of ``x`` and the eigenvalues as squared singular
    values.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError("learn_eof expects a matrix")
    k = int(k)
    if not 1 <= k <= x.shape[0]:
        raise DomainError(f"k={k} must lie in [1, {x.shape[0]}]")
    u, s, _ = svd(x, full_matrices=k > min(x.shape))
    lam = np.zeros(k)
    n = min(k, len(s))
    lam[:n] = s[:n] ** 2
    return EofBasis(factors=u[:, :k], eigenvalues=lam)


def eof_encode(x_star, basis):
    x_star = np.asarray(x_star, dtype=np.float64)
    if x_star.ndim != 2 or x_star.shape[0] != basis.factors.shape[0]:
        raise DomainError(
            f"data {x_star.shape} does not match EOF basis with {basis.factors.shape[0]} rows"
        )
    return basis.factors.T @ x_star


def eof_decode(w, basis):
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != basis.k:
        raise DomainError(f"coefficients {w.shape} do not match K={basis.k}")
    return basis.factors @ w


def build_fourier_matrix(n_rows, n_basis, period):
    """``F[m, f] = exp(2 pi i (m-1)(f-1) / period)`` with 1-based (m, f)."""
    if n_rows < 1 or n_basis < 1:
        raise DomainError("Fourier matrix needs positive sizes")
    if not period > 0:
        raise DomainError("period must be positive")
    m = np.arange(n_rows)[:, None]
    f = np.arange(n_basis)[None, :]
    return np.exp(2j * np.pi * (m * f) / period)


def learn_fourier_eof(x, nf1, nf2, kf, lx=None, ly=None):
    """Vertical EOFs from the mode-3 unfolding plus fixed horizontal Fourier factors.

    ``lx``/``ly`` default to the grid lengths M and N.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise DomainError("learn_fourier_eof expects an M x N x I tensor")
    m, n, i = x.shape
    for name, val in (("nf1", nf1), ("nf2", nf2), ("kf", kf)):
        if int(val) < 1:
            raise DomainError(f"{name} must be positive, got {val}")
    if kf > i:
        raise DomainError(f"kf={kf} exceeds depth count {i}")
    lx = float(m if lx is None else lx)
    ly = float(n if ly is None else ly)
    eof = learn_eof(unfold(x, 3), kf).factors
    return FourierEofBasis(
        f1=build_fourier_matrix(m, nf1, lx),
        f2=build_fourier_matrix(n, nf2, ly),
        eof=eof,
        lx=lx,
        ly=ly,
    )


def _check_field(x, basis):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != basis.shape:
        raise DomainError(f"field {x.shape} does not match basis grid {basis.shape}")
    return x


def fourier_eof_encode(x_star, basis):
    """``W* = E^T X_(3) (F^T)^dagger`` with ``F = F2 kron F1``; a ``KF x NF1*NF2`` complex matrix."""
    x_star = _check_field(x_star, basis)
    return basis.eof.T @ unfold(x_star, 3) @ basis.ft_pinv()


def fourier_eof_decode(w, basis, return_imag=False):
    """Real part of ``E W F^T`` folded back to ``M x N x I``.

    The norm of the discarded imaginary part is logged (and returned when
    ``return_imag`` is set); it vanishes only when the Fourier columns
    include every conjugate frequency pair.
    """
    w = np.asarray(w)
    nf1, nf2, kf = basis.hyper
    if w.shape != (kf, nf1 * nf2):
        raise DomainError(f"coefficients {w.shape} do not match ({kf}, {nf1 * nf2})")
    full = basis.eof @ w @ basis.fourier_matrix().T
    imag = float(np.linalg.norm(full.imag))
    log.debug("fourier_eof_decode: discarded imaginary norm %.3e", imag)
    x = fold(np.ascontiguousarray(full.real), 3, basis.shape)
    if return_imag:
        return x, imag
    return x
