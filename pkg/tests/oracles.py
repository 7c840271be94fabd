"""Independent reference implementations used only by the tests.

Nothing here calls LAPACK SVD/eigen routines or the package under test.
"""
import itertools

import numpy as np


def unfold_loops(x, p):
    """Mode-p unfolding straight from the index formula (1-based modes).

    Element (i_1, ..., i_P) goes to row i_p, column
    1 + sum_{k != p} (i_k - 1) prod_{m < k, m != p} I_m.
    """
    shape = x.shape
    rows = shape[p - 1]
    cols = int(np.prod(shape)) // rows
    out = np.zeros((rows, cols), dtype=x.dtype)
    for idx in itertools.product(*[range(s) for s in shape]):
        q = 0
        stride = 1
        for k in range(len(shape)):
            if k == p - 1:
                continue
            q += idx[k] * stride
            stride *= shape[k]
        out[idx[p - 1], q] = x[idx]
    return out


def mode_product_loops(x, a, p):
    """(X x_p A)[..., j, ...] = sum_i X[..., i, ...] A[j, i], by explicit loops."""
    shape = list(x.shape)
    shape[p - 1] = a.shape[0]
    out = np.zeros(shape, dtype=np.result_type(x, a))
    for idx in itertools.product(*[range(s) for s in shape]):
        total = 0.0
        for i in range(x.shape[p - 1]):
            src = list(idx)
            src[p - 1] = i
            total += x[tuple(src)] * a[idx[p - 1], i]
        out[idx] = total
    return out


def kron_loops(a, b):
    m, n = a.shape
    r, s = b.shape
    out = np.zeros((m * r, n * s), dtype=np.result_type(a, b))
    for i in range(m):
        for j in range(n):
            for k in range(r):
                for l in range(s):
                    out[i * r + k, j * s + l] = a[i, j] * b[k, l]
    return out


def jacobi_eigh(a, sweeps=100, tol=1e-15):
    """Cyclic Jacobi eigen-decomposition of a real symmetric matrix.

    Returns eigenvalues (descending) and eigenvectors as columns.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(np.linalg.norm(a), 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t**2 + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    w = np.diag(a)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def eof_oracle(x, k):
    """Leading k eigenvectors of X X^T via Jacobi; subspace only."""
    w, v = jacobi_eigh(x @ x.T)
    return w[:k], v[:, :k]


def projector(b):
    return b @ b.conj().T


def omp_bruteforce(x, q, t):
    """Best t-sparse least-squares fit by exhaustive support enumeration."""
    best = (np.inf, None, None)
    for support in itertools.combinations(range(q.shape[1]), t):
        sub = q[:, support]
        coef = np.linalg.solve(sub.T @ sub, sub.T @ x)
        r = float(np.sum((x - sub @ coef) ** 2))
        if r < best[0] - 1e-14:
            best = (r, support, coef)
    return best


def rank1_oracle(x, n_refine=100):
    """Max of <X, a o b o c>^2 over unit vectors by lattice search plus power refinement.

    Every normalized nonzero point of the {-2..2}^M lattice seeds the mode-1
    vector; all seeds are refined together by alternating rank-1 power
    iterations and the largest objective is returned.
    """
    m, n, i = x.shape
    a = np.array(list(itertools.product(range(-2, 3), repeat=m)), dtype=float)
    a = a[np.any(a != 0, axis=1)]
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    c = np.ones((len(a), i)) / np.sqrt(i)

    def unit(v):
        return v / np.maximum(np.linalg.norm(v, axis=1, keepdims=True), 1e-300)

    for _ in range(n_refine):
        b = unit(np.einsum("mni,pm,pi->pn", x, a, c))
        c = unit(np.einsum("mni,pm,pn->pi", x, a, b))
        a = unit(np.einsum("mni,pn,pi->pm", x, b, c))
    vals = np.einsum("mni,pm,pn,pi->p", x, a, b, c) ** 2
    return float(vals.max())
