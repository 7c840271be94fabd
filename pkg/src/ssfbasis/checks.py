"""Self-checks run by ``ssfbasis verify``.

Each check returns a :class:`CheckResult`; none of them raises on a failed
property, so a caller can report every outcome at once.
"""
from dataclasses import dataclass

import numpy as np

from .bench import coefficient_count
from .formats import tensor_from_bytes, tensor_to_bytes
from .synth import SsfGrid, build_dataset, generate_snapshot
from .tensor import fold, kronecker, multi_mode_product, unfold
from .tucker import verify_prop1, verify_prop2


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}"


def check_unfolding(n_cases=200, seed=0):
    rng = np.random.default_rng([seed, 101])
    worst_mp = worst_kr = 0.0
    exact = True
    for _ in range(n_cases):
        shape = tuple(int(v) for v in rng.integers(1, 6, size=3))
        x = rng.standard_normal(shape)
        for p in (1, 2, 3):
            exact &= np.array_equal(fold(unfold(x, p), p, shape), x)
        mats = [rng.standard_normal((int(rng.integers(1, 5)), s)) for s in shape]
        y = multi_mode_product(x, mats)
        # X x_1 A x_2 B x_3 C has mode-3 unfolding C X_(3) (B kron A)^T
        rhs = mats[2] @ unfold(x, 3) @ kronecker(mats[1], mats[0]).T
        worst_kr = max(worst_kr, np.linalg.norm(unfold(y, 3) - rhs) / max(np.linalg.norm(rhs), 1e-300))
        a = mats[1]
        lhs = unfold(multi_mode_product(x, [None, a, None]), 2)
        worst_mp = max(worst_mp, np.linalg.norm(lhs - a @ unfold(x, 2)) / max(np.linalg.norm(lhs), 1e-300))
    ok = exact and worst_mp <= 1e-12 and worst_kr <= 1e-12
    return CheckResult("unfolding", ok, f"round-trip exact={exact} mode-product={worst_mp:.1e} kronecker={worst_kr:.1e}")


def check_prop1(n_cases=50, seed=0, shape=(5, 6, 7), tol=1e-8):
    rng = np.random.default_rng([seed, 102])
    worst = 0.0
    for _ in range(n_cases):
        x = rng.standard_normal(shape)
        for k in (1, 2, 3):
            worst = max(worst, verify_prop1(x, k).projector_distance)
    return CheckResult("identity-factor optimum equals EOF", worst <= tol, f"max projector distance {worst:.2e}")


def check_prop2(n_cases=50, seed=0, tol=1e-8):
    rng = np.random.default_rng([seed, 103])
    worst = 0.0
    worst_gap = -np.inf
    for c in range(n_cases):
        m, n, i = (int(v) for v in rng.integers(3, 7, size=3))
        x = rng.standard_normal((m, n, i))
        kf = int(rng.integers(1, i + 1))
        # complete grid-periodic factors: equal-norm orthogonal columns
        rep = verify_prop2(x, m, n, kf)
        worst = max(worst, rep.projector_distance)
        # general factors: truncated, non-periodic
        nf1, nf2 = int(rng.integers(1, m + 1)), int(rng.integers(1, n + 1))
        gen = verify_prop2(x, nf1, nf2, kf, lx=m + 0.5 + c % 3, ly=n + 1.25)
        worst_gap = max(worst_gap, (gen.objective_optimal - gen.objective_eof) / np.sum(x**2))
    ok = worst <= tol and worst_gap <= 1e-10
    return CheckResult(
        "Fourier-constrained optimum vs Fourier + EOF",
        ok,
        f"periodic distance {worst:.2e}; general relative objective gap {worst_gap:.2e}",
    )


TABLE = [
    ("hooi", {"rank": [8, 8, 10]}, 640),
    ("eof", {"k": 2}, 800),
    ("eof", {"k": 3}, 1200),
    ("ksvd", {"t": 2}, 800),
    ("ksvd", {"t": 3}, 1200),
    ("fourier_eof", {"nf1": 8, "nf2": 8, "kf": 10}, 640),
]


def check_coefficients(grid=(20, 20, 300)):
    bad = [(m, p, coefficient_count(m, p, grid), want) for m, p, want in TABLE if coefficient_count(m, p, grid) != want]
    return CheckResult("coefficient accounting", not bad, "all match" if not bad else f"mismatches {bad}")


def check_dt01(seed=0):
    rng = np.random.default_rng([seed, 104])
    cases = [rng.standard_normal((3, 4, 5)), np.array([0.0, -0.0, np.inf, -np.inf, 5e-324])]
    ok = all(
        np.array_equal(tensor_from_bytes(tensor_to_bytes(c)).view(np.uint64), np.asarray(c, "<f8").view(np.uint64))
        and tensor_from_bytes(tensor_to_bytes(c)).shape == c.shape
        for c in cases
    )
    return CheckResult("DT01 round trip", ok, "bit-exact" if ok else "mismatch")


def check_generator(seed=0, params=None):
    a = generate_snapshot(SsfGrid(), 5, params, seed).field
    b = generate_snapshot(SsfGrid(), 5, params, seed).field
    ds = build_dataset(seed=seed, params=params)
    x3 = np.concatenate([unfold(ds.perturbation(d), 3) for d in range(1, 31)], axis=1)
    s = np.linalg.svd(x3, compute_uv=False) ** 2
    energy = float(s[:10].sum() / s.sum())
    ok = np.array_equal(a, b) and energy > 0.95
    return CheckResult("synthetic generator", ok, f"deterministic={np.array_equal(a, b)} top-10 energy {energy:.4f}")


def run_all(seed=0):
    return [
        check_unfolding(seed=seed),
        check_prop1(seed=seed),
        check_prop2(seed=seed),
        check_coefficients(),
        check_dt01(seed=seed),
        check_generator(seed=seed),
    ]
