"""Over-complete dictionary learning (K-SVD) with OMP sparse coding."""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "KsvdDictionary",
    "SparseCode",
    "omp",
    "omp_batch",
    "ksvd_learn",
    "ksvd_encode",
    "ksvd_decode",
]

UNIT_TOL = 1e-10
STOP_TOL = 1e-12


@dataclass
class KsvdDictionary:
    atoms: np.ndarray  # I x Z, unit-norm columns
    sparsity: int
    train_objective: list = field(default_factory=list)
    seed: int = None

    @property
    def n_atoms(self):
        return self.atoms.shape[1]


@dataclass
class SparseCode:
    """Column-wise sparse coefficients.

    ``indices[j]`` lists the atoms used by column ``j`` in selection order,
    padded with -1; ``values[j]`` holds the matching coefficients.
    """

    indices: np.ndarray  # J x T int
    values: np.ndarray  # J x T float
    n_atoms: int

    @property
    def n_columns(self):
        return self.indices.shape[0]

    def column(self, j):
        sel = self.indices[j] >= 0
        return self.indices[j][sel], self.values[j][sel]

    def nnz(self):
        return np.count_nonzero(self.indices >= 0, axis=1)

    def to_dense(self):
        v = np.zeros((self.n_atoms, self.n_columns))
        rows, slots = np.nonzero(self.indices >= 0)
        v[self.indices[rows, slots], rows] = self.values[rows, slots]
        return v

    @classmethod
    def from_dense(cls, v, t):
        v = np.asarray(v)
        z, j = v.shape
        idx = np.full((j, t), -1, dtype=np.int64)
        val = np.zeros((j, t))
        for col in range(j):
            nz = np.flatnonzero(v[:, col])
            if len(nz) > t:
                raise DomainError(f"column {col} has {len(nz)} > {t} nonzeros")
            idx[col, : len(nz)] = nz
            val[col, : len(nz)] = v[nz, col]
        return cls(idx, val, z)


def _check_dictionary(q):
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2:
        raise DomainError("dictionary must be a matrix")
    norms = np.linalg.norm(q, axis=0)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise DomainError("dictionary atoms must have unit Euclidean norm")
    return q


def omp_batch(x, q, t):
    """Orthogonal matching pursuit on every column of ``x``.

    Each step adds the atom with the largest ``|<atom, residual>|`` (lowest
    index on ties), then re-fits all selected coefficients by least squares.
    A column stops early once its residual drops to ``1e-12 * ||x_j||`` or
    becomes orthogonal to every atom.

    Returns ``(SparseCode, residual)``.
    """
    q = _check_dictionary(q)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != q.shape[0]:
        raise DomainError(f"signals {x.shape} do not match dictionary {q.shape}")
    i_dim, z = q.shape
    t = int(t)
    if not 1 <= t <= min(i_dim, z):
        raise DomainError(f"sparsity {t} must lie in [1, {min(i_dim, z)}]")
    j = x.shape[1]
    idx = np.full((j, t), -1, dtype=np.int64)
    val = np.zeros((j, t))
    resid = x.copy()
    xnorm = np.linalg.norm(x, axis=0)
    active = xnorm > 0
    qt = q.T
    for s in range(t):
        cols = np.flatnonzero(active)
        if cols.size == 0:
            break
        corr = np.abs(qt @ resid[:, cols])
        if s:
            corr[idx[cols, :s].T, np.arange(cols.size)[None, :]] = -1.0
        pick = np.argmax(corr, axis=0)
        best = corr[pick, np.arange(cols.size)]
        # residual already orthogonal to every atom
        ok = best > STOP_TOL * np.maximum(xnorm[cols], 1e-300)
        active[cols[~ok]] = False
        cols, pick = cols[ok], pick[ok]
        if cols.size == 0:
            break
        idx[cols, s] = pick
        sub = qt[idx[cols, : s + 1]]  # (n, s+1, I)
        qq, rr = np.linalg.qr(np.swapaxes(sub, 1, 2))  # (n, I, s+1), (n, s+1, s+1)
        rhs = np.einsum("nik,in->nk", qq, x[:, cols])
        coef = np.linalg.solve(rr, rhs[..., None])[..., 0]
        val[cols, : s + 1] = coef
        resid[:, cols] = x[:, cols] - np.einsum("nki,nk->in", sub, coef)
        rn = np.linalg.norm(resid[:, cols], axis=0)
        active[cols[rn <= STOP_TOL * xnorm[cols]]] = False
    return SparseCode(idx, val, z), resid


def omp(x, q, t):
    """OMP for a single vector; returns the dense length-Z code."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError("omp expects a vector; use omp_batch for matrices")
    code, _ = omp_batch(x[:, None], q, t)
    return code.to_dense()[:, 0]


def _initial_atoms(x, z, rng):
    i_dim, j = x.shape
    if j >= z:
        cols = rng.choice(j, size=z, replace=False)
        cols.sort()
        atoms = x[:, cols].copy()
    else:
        atoms = np.concatenate([x, rng.standard_normal((i_dim, z - j))], axis=1)
    norms = np.linalg.norm(atoms, axis=0)
    dead = norms < 1e-12
    if np.any(dead):
        atoms[:, dead] = rng.standard_normal((i_dim, int(dead.sum())))
        norms = np.linalg.norm(atoms, axis=0)
    return atoms / norms


def ksvd_learn(x, z, t, max_iter=50, seed=0, init=None, tol=1e-6):
    """Learn a ``I x z`` unit-norm dictionary for ``t``-sparse codes of ``x``.

    Alternates OMP coding with the atom-by-atom rank-1 update.  A column
    keeps its previous code whenever the fresh OMP code fits it worse, and
    the objective ``||X - QV||_F^2`` after each coding step is appended to
    ``train_objective``, which is therefore non-increasing.  Atoms that no
    column uses are replaced by the worst-represented training columns.

    Stops after ``max_iter`` updates or when the relative objective
    improvement falls below ``tol``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError("ksvd_learn expects an I x J matrix")
    i_dim, j = x.shape
    z, t = int(z), int(t)
    if t < 1 or t > i_dim:
        raise DomainError(f"sparsity {t} must lie in [1, {i_dim}]")
    if z < i_dim:
        raise DomainError(f"dictionary size z={z} must be >= I={i_dim}")
    if j < z:
        warnings.warn(f"only {j} training columns for {z} atoms", stacklevel=2)
    rng = np.random.default_rng(seed)
    if init is None:
        q = _initial_atoms(x, z, rng)
    else:
        q = _check_dictionary(init).copy()
        if q.shape != (i_dim, z):
            raise DomainError(f"initial dictionary {q.shape} != ({i_dim}, {z})")

    v = None
    resid = None
    history = []
    for it in range(max_iter + 1):
        code, new_resid = omp_batch(x, q, t)
        new_v = code.to_dense()
        if v is None:
            v, resid = new_v, new_resid
        else:
            better = np.sum(new_resid**2, axis=0) < np.sum(resid**2, axis=0)
            v[:, better] = new_v[:, better]
            resid[:, better] = new_resid[:, better]
        history.append(float(np.sum(resid**2)))
        if it == max_iter:
            break
        if len(history) > 1:
            prev, cur = history[-2], history[-1]
            if prev <= 0 or (prev - cur) <= tol * prev:
                break
        if history[-1] == 0.0:
            break
        q, v, resid = _update_atoms(x, q, v, resid)

    d = KsvdDictionary(atoms=q, sparsity=t, train_objective=history, seed=seed)
    return d, SparseCode.from_dense(v, t)


def _update_atoms(x, q, v, resid):
    unused = []
    for k in range(q.shape[1]):
        users = np.flatnonzero(v[k])
        if users.size == 0:
            unused.append(k)
            continue
        e = resid[:, users] + np.outer(q[:, k], v[k, users])
        u, s, vh = np.linalg.svd(e, full_matrices=False)
        atom = u[:, 0]
        coef = s[0] * vh[0]
        # keep the sign convention stable across runs
        if atom[np.argmax(np.abs(atom))] < 0:
            atom, coef = -atom, -coef
        q[:, k] = atom
        v[k, users] = coef
        resid[:, users] = e - np.outer(atom, coef)
    if unused:
        err = np.sum(resid**2, axis=0)
        order = np.argsort(-err, kind="stable")
        taken = 0
        for k in unused:
            while taken < order.size and np.linalg.norm(x[:, order[taken]]) < 1e-12:
                taken += 1
            if taken >= order.size:
                break
            col = x[:, order[taken]]
            q[:, k] = col / np.linalg.norm(col)
            taken += 1
    return q, v, resid


def ksvd_encode(x_star, d):
    code, _ = omp_batch(x_star, d.atoms, d.sparsity)
    return code


def ksvd_decode(code, d):
    if code.n_atoms != d.n_atoms:
        raise DomainError(f"code uses {code.n_atoms} atoms, dictionary has {d.n_atoms}")
    return d.atoms @ code.to_dense()
