"""Tucker-format basis learning for 3D fields.

A field ``X`` (M x N x I) is represented as ``S x_1 B1 x_2 B2 x_3 B3`` with
orthonormal factors.  :func:`hooi` learns the factors from one field,
:func:`mhooi` from several fields sharing the factors.  Encoding a new field
is the closed-form projection ``S = X x_1 B1^T x_2 B2^T x_3 B3^T``.
"""
from dataclasses import dataclass, field

import numpy as np

from .classical import build_fourier_matrix, learn_eof, learn_fourier_eof
from .errors import DomainError
from .linalg import (
    leading_eigenvectors,
    leading_left_singular_vectors,
    pinv,
    projector_distance,
)
from .tensor import frobenius_norm, kronecker, multi_mode_product, stack_mode4, unfold

__all__ = [
    "MultilinearRank",
    "TuckerBasis",
    "hosvd_init",
    "hooi",
    "mhooi",
    "tucker_encode",
    "tucker_decode",
    "stacked_objective",
    "separate_objective",
    "Prop1Report",
    "Prop2Report",
    "verify_prop1",
    "verify_prop2",
    "fourier_tucker_objective",
]


@dataclass(frozen=True)
class MultilinearRank:
    l1: int
    l2: int
    l3: int

    def __post_init__(self):
        for name in ("l1", "l2", "l3"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"rank component {name} must be positive")

    @classmethod
    def of(cls, r):
        if isinstance(r, MultilinearRank):
            return r
        r = tuple(int(v) for v in r)
        if len(r) != 3:
            raise DomainError(f"multilinear rank needs three entries, got {r}")
        return cls(*r)

    def as_tuple(self):
        return (self.l1, self.l2, self.l3)

    def check(self, shape):
        for p, (l, d) in enumerate(zip(self.as_tuple(), shape[:3]), start=1):
            if l > d:
                raise DomainError(f"L{p}={l} exceeds mode-{p} dimension {d}")

    @property
    def n_coefficients(self):
        return self.l1 * self.l2 * self.l3


@dataclass
class TuckerBasis:
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray
    mean_field: np.ndarray = None
    fit_trace: list = field(default_factory=list)
    rank_deficient: bool = False

    @property
    def factors(self):
        return (self.b1, self.b2, self.b3)

    @property
    def rank(self):
        return MultilinearRank(self.b1.shape[1], self.b2.shape[1], self.b3.shape[1])

    @property
    def shape(self):
        return (self.b1.shape[0], self.b2.shape[0], self.b3.shape[0])


def _check_input(x, order=3):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != order:
        raise DomainError(f"expected a {order}-way tensor, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("tensor contains NaN or infinite entries")
    return x


def hosvd_init(x, r):
    """Truncated HOSVD: leading left singular vectors of each of the first three unfoldings."""
    r = MultilinearRank.of(r)
    x = np.asarray(x, dtype=np.float64)
    r.check(x.shape)
    return [leading_left_singular_vectors(unfold(x, p), l) for p, l in enumerate(r.as_tuple(), 1)]


def _project_except(x, factors, skip):
    mats = [None if p == skip else b for p, b in enumerate(factors, start=1)]
    return multi_mode_product(x, mats, transpose=True)


def _objective(x, factors):
    return frobenius_norm(multi_mode_product(x, factors, transpose=True)) ** 2


def _random_start(shape, r, rng):
    out = []
    for d, l in zip(shape[:3], r.as_tuple()):
        q, _ = np.linalg.qr(rng.standard_normal((d, l)))
        out.append(q)
    return out


def _orthogonal_iteration(x, r, tol, max_iter, strict_paper, init):
    """Alternating per-mode updates on modes 1-3; any fourth mode stays identity."""
    factors = list(init)
    trace = [_objective(x, factors)]
    deficient = False
    for _ in range(max_iter):
        start = trace[-1]
        stale_b2 = factors[1]
        for p in (1, 2, 3):
            basis_for_c = list(factors)
            if strict_paper and p == 3:
                basis_for_c[1] = stale_b2
            c = unfold(_project_except(x, basis_for_c, p), p)
            b, flag = leading_left_singular_vectors(c, r.as_tuple()[p - 1], return_deficiency=True)
            deficient |= flag
            factors[p - 1] = b
            if strict_paper and p == 3:
                trace.append(_objective(x, factors))
            else:
                trace.append(float(np.sum((b.T @ c) ** 2)))
        end = trace[-1]
        if abs(end - start) <= tol * max(abs(start), np.finfo(float).tiny):
            break
    return factors, trace, deficient


def _best_of_starts(x, r, tol, max_iter, strict_paper, n_starts, seed):
    best = None
    rng = np.random.default_rng(seed)
    for k in range(max(int(n_starts), 1)):
        init = hosvd_init(x, r) if k == 0 else _random_start(x.shape, r, rng)
        run = _orthogonal_iteration(x, r, tol, max_iter, strict_paper, init)
        # a later start must win clearly; ties keep the HOSVD-started result
        if best is None or run[1][-1] > best[1][-1] * (1 + 1e-12):
            best = run
    return best


def hooi(x, r, tol=1e-8, max_iter=100, strict_paper=False, n_starts=1, seed=0):
    """Higher-order orthogonal iteration for one M x N x I field.

    Starts from the truncated HOSVD and sweeps modes 1, 2, 3, each time
    replacing ``B_p`` with the leading left singular vectors of the
    unfolding of ``X`` projected on the other two factors.  The default
    sweep always uses the freshest factors; ``strict_paper=True`` builds
    the mode-3 matrix with the previous sweep's ``B2`` instead.

    ``basis.fit_trace`` holds ``||S||_F^2`` after initialization and after
    every single-mode update.  Iteration stops when a sweep changes it by
    less than ``tol`` (relative) or after ``max_iter`` sweeps.

    HOOI only finds a local maximum.  ``n_starts > 1`` adds seeded random
    orthonormal starts and keeps the run with the largest final fit.

    Returns ``(core, basis)``.
    """
    x = _check_input(x)
    r = MultilinearRank.of(r)
    r.check(x.shape)
    factors, trace, deficient = _best_of_starts(
        x, r, tol, max_iter, strict_paper, n_starts, seed
    )
    basis = TuckerBasis(*factors, fit_trace=trace, rank_deficient=deficient)
    return tucker_encode(x, basis), basis


def mhooi(xs, r, tol=1e-8, max_iter=100, strict_paper=False, n_starts=1, seed=0):
    """Shared factors for several fields (M-HOOI).

    The fields are stacked along a fourth mode whose factor is pinned to
    the identity, so the per-field cores are the mode-4 slices of the
    stacked core.  Returns ``(list_of_cores, basis)``.
    """
    xs = [_check_input(x) for x in xs]
    stack = stack_mode4(xs)
    r = MultilinearRank.of(r)
    r.check(stack.shape)
    factors, trace, deficient = _best_of_starts(
        stack, r, tol, max_iter, strict_paper, n_starts, seed
    )
    basis = TuckerBasis(*factors, fit_trace=trace, rank_deficient=deficient)
    return [tucker_encode(x, basis) for x in xs], basis


def _check_shape(x, basis):
    if x.shape[:3] != basis.shape:
        raise DomainError(f"field {x.shape} does not match basis grid {basis.shape}")


def tucker_encode(x_star, basis):
    x_star = np.asarray(x_star, dtype=np.float64)
    _check_shape(x_star, basis)
    return multi_mode_product(x_star, basis.factors, transpose=True)


def tucker_decode(core, basis):
    core = np.asarray(core, dtype=np.float64)
    if core.shape[:3] != basis.rank.as_tuple():
        raise DomainError(f"core {core.shape} does not match rank {basis.rank.as_tuple()}")
    return multi_mode_product(core, basis.factors)


def separate_objective(xs, basis):
    """Sum over fields of ``||X_t - decode(encode(X_t))||_F^2``."""
    return sum(
        frobenius_norm(x - tucker_decode(tucker_encode(x, basis), basis)) ** 2 for x in xs
    )


def stacked_objective(stack, basis):
    """The same loss evaluated on the 4-way stack with an identity fourth factor."""
    t = stack.shape[3]
    core = multi_mode_product(stack, list(basis.factors) + [np.eye(t)], transpose=True)
    recon = multi_mode_product(core, list(basis.factors) + [np.eye(t)])
    return frobenius_norm(stack - recon) ** 2


@dataclass
class Prop1Report:
    b3: np.ndarray
    eof: np.ndarray
    projector_distance: float
    objective_b3: float
    objective_eof: float


def _identity_objective(x3, b3):
    return float(np.linalg.norm(x3 - b3 @ (b3.T @ x3)) ** 2)


def verify_prop1(x, k):
    """Check that the EOFs solve the Tucker problem with identity horizontal factors.

    The vertical factor is obtained from the reduced problem
    ``max ||B3^T C3||`` with ``C3 = X_(3)(I_N kron I_M)``, solved through the
    eigen-decomposition of ``C3 C3^T``.  The EOFs come from the SVD of the
    mode-3 unfolding.  Both subspaces must coincide.
    """
    x = _check_input(x)
    m, n, i = x.shape
    k = int(k)
    if not 1 <= k <= i:
        raise DomainError(f"k={k} must lie in [1, {i}]")
    x3 = unfold(x, 3)
    c3 = unfold(multi_mode_product(x, [np.eye(m), np.eye(n), None]), 3)
    b3, _ = leading_eigenvectors(c3 @ c3.T, k)
    eof = learn_eof(x3, k).factors
    return Prop1Report(
        b3=b3,
        eof=eof,
        projector_distance=projector_distance(b3, eof),
        objective_b3=_identity_objective(x3, b3),
        objective_eof=_identity_objective(x3, eof),
    )


def fourier_tucker_objective(x, f1, f2, b3):
    """``min_S ||X - S x_1 F1 x_2 F2 x_3 B3||_F^2`` for fixed factors (complex ``S``)."""
    x3 = unfold(np.asarray(x, dtype=np.float64), 3)
    ft = kronecker(f2, f1).T
    s3 = b3.T @ x3 @ pinv(ft)
    return float(np.linalg.norm(x3 - b3 @ s3 @ ft) ** 2)


@dataclass
class Prop2Report:
    b3: np.ndarray  # from C3 = X_(3)(F2 kron F1)
    b3_optimal: np.ndarray  # exact minimizer of the constrained problem
    eof: np.ndarray  # vertical EOFs of the Fourier + EOF baseline
    projector_distance: float  # b3 vs eof
    optimal_distance: float  # b3_optimal vs eof
    objective_b3: float
    objective_optimal: float
    objective_eof: float


def verify_prop2(x, nf1, nf2, kf, lx=None, ly=None):
    """Compare the Fourier-constrained Tucker optimum with the Fourier + EOF baseline.

    ``b3`` follows the reduced problem ``max ||B3^T C3||`` with
    ``C3 = X_(3)(F2 kron F1)``; since ``B3`` is real this is the top
    eigenspace of ``Re(C3 C3^H)``.  ``b3_optimal`` minimizes the loss with
    the core fitted by least squares: the top eigenspace of
    ``Re(X3 P X3^T)``, where ``P`` projects onto the row space of ``F^T``.
    The two agree whenever the Fourier columns are orthogonal with equal
    norms (grid-periodic case).  Nothing is asserted here; the report
    carries distances and objective values.
    """
    x = _check_input(x)
    m, n, i = x.shape
    kf = int(kf)
    if not 1 <= kf <= i:
        raise DomainError(f"kf={kf} must lie in [1, {i}]")
    if int(nf1) < 1 or int(nf2) < 1:
        raise DomainError("nf1 and nf2 must be positive")
    lx = float(m if lx is None else lx)
    ly = float(n if ly is None else ly)
    f1 = build_fourier_matrix(m, nf1, lx)
    f2 = build_fourier_matrix(n, nf2, ly)
    x3 = unfold(x, 3)
    ft = kronecker(f2, f1).T
    c3 = x3 @ ft.T
    b3, _ = leading_eigenvectors((c3 @ c3.conj().T).real, kf)
    h = (x3 @ pinv(ft)) @ ft
    b3_opt, _ = leading_eigenvectors((h @ h.conj().T).real, kf)
    eof = learn_fourier_eof(x, nf1, nf2, kf, lx, ly).eof
    return Prop2Report(
        b3=b3,
        b3_optimal=b3_opt,
        eof=eof,
        projector_distance=projector_distance(b3, eof),
        optimal_distance=projector_distance(b3_opt, eof),
        objective_b3=fourier_tucker_objective(x, f1, f2, b3),
        objective_optimal=fourier_tucker_objective(x, f1, f2, b3_opt),
        objective_eof=fourier_tucker_objective(x, f1, f2, eof),
    )
