import numpy as np
import pytest

from ssfbasis.errors import DomainError
from ssfbasis.synth import (
    MULTISEASON_GRID,
    SsfGrid,
    SynthParams,
    build_dataset,
    build_multiseason_dataset,
    generate_snapshot,
    munk_profile,
    training_mean,
)
from ssfbasis.tensor import unfold

SMALL = SsfGrid(m=6, n=5, i=40, dz=50.0)


def test_munk_profile_values():
    assert munk_profile(1300.0) == 1500.0
    # independent evaluation of the closed form at the surface
    eta = 2 * (0 - 1300) / 1300
    assert munk_profile(0.0) == pytest.approx(1500 * (1 + 0.00737 * (eta - 1 + np.exp(-eta))), rel=1e-15)
    # eta = -2 at the surface: 1500 * (1 + 0.00737 * (e^2 - 3))
    assert munk_profile(0.0) == pytest.approx(1548.521, abs=1e-3)
    z = np.linspace(1400, 5000, 50)
    assert np.all(np.diff(munk_profile(z)) > 0)
    with pytest.raises(DomainError):
        munk_profile(-1.0)


def test_grid_defaults_and_validation():
    g = SsfGrid()
    assert g.shape == (20, 20, 300) and g.dx == 8 and g.dz == 10
    assert g.depths()[-1] == 2990
    assert MULTISEASON_GRID.shape == (13, 13, 37)
    with pytest.raises(DomainError):
        SsfGrid(m=0)


def test_param_limits():
    with pytest.raises(DomainError):
        SynthParams(noise_sigma=0.1)
    with pytest.raises(DomainError):
        SynthParams(n_modes=6)
    with pytest.raises(DomainError):
        SynthParams(eddy_amplitude=9.0)


def test_quiet_field_is_depth_only():
    f = generate_snapshot(SMALL, 3, SynthParams.quiet(), seed=1).field
    assert np.all(f == f[:1, :1, :])
    np.testing.assert_array_equal(f[0, 0], munk_profile(SMALL.depths()))


def test_snapshot_deterministic_and_seed_dependent():
    a = generate_snapshot(SMALL, 7, seed=4).field
    b = generate_snapshot(SMALL, 7, seed=4).field
    c = generate_snapshot(SMALL, 7, seed=5).field
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_snapshot_independent_of_generation_order():
    late = generate_snapshot(SMALL, 900, seed=2).field
    generate_snapshot(SMALL, 3, seed=2)
    assert np.array_equal(late, generate_snapshot(SMALL, 900, seed=2).field)


def test_fields_finite_and_physical(default_dataset):
    for s in default_dataset.snapshots:
        assert np.all(np.isfinite(s.field))
        assert 1400 <= s.field.min() and s.field.max() <= 1600


def test_dataset_split(default_dataset):
    ds = default_dataset
    assert ds.train_days == (1,)
    assert ds.test_days == tuple(range(2, 31))
    assert len(ds.snapshots) == 30
    with pytest.raises(DomainError):
        build_dataset(SMALL, days=1)
    with pytest.raises(DomainError):
        build_dataset(SMALL, days=5, train_days=(6,))


def test_training_mean_centres_each_depth():
    ds = build_dataset(SMALL, days=6, seed=3, train_days=(1, 2, 3))
    stack = np.concatenate([unfold(f, 3) for f in ds.train_fields()], axis=1)
    assert np.abs(stack.sum(axis=1)).max() <= 1e-9
    # field mode centres every grid point
    ds2 = build_dataset(SMALL, days=6, seed=3, train_days=(1, 2, 3), mean_mode="field")
    assert np.abs(np.sum(ds2.train_fields(), axis=0)).max() <= 1e-9
    with pytest.raises(DomainError):
        training_mean(ds.train_fields(), mode="median")


def test_low_rank_energy_gate(default_dataset):
    x3 = np.concatenate([unfold(default_dataset.perturbation(d), 3) for d in range(1, 31)], axis=1)
    s = np.linalg.svd(x3, compute_uv=False) ** 2
    assert s[:10].sum() / s.sum() > 0.95


def test_variance_larger_in_shallow_water(default_dataset):
    z = default_dataset.grid.depths()
    p = np.stack([default_dataset.perturbation(d) for d in range(1, 31)])
    var = p.reshape(30, -1, len(z)).var(axis=(0, 1))
    assert var[z < 1000].min() > var[z > 2500].max()


def test_correlation_decays_with_lag():
    seeds = range(10)
    curves = []
    for seed in seeds:
        ds = build_dataset(seed=seed)
        x1 = ds.perturbation(1).ravel()
        curves.append([np.corrcoef(x1, ds.perturbation(k).ravel())[0, 1] for k in range(2, 31)])
    mean = np.mean(curves, axis=0)
    assert np.all(np.diff(mean) <= 0)


def test_multiseason_blocks():
    ds = build_multiseason_dataset(seed=1)
    assert ds.grid.shape == (13, 13, 37)
    assert len(ds.blocks) == 4
    assert len(ds.train_days) == 12 and len(ds.test_days) == 28
    for tr, te in ds.blocks.values():
        assert len(tr) == 3 and len(te) == 7 and te[0] == tr[-1] + 1
    with pytest.raises(DomainError):
        build_multiseason_dataset(block_starts=(1, 5))
