"""Deterministic synthetic 3D sound-speed fields.

A field is the Munk profile plus three kinds of perturbation:

* a Gaussian mesoscale eddy whose centre orbits slowly around the domain,
* a few separable smooth modes ``a_k(x) b_k(y) c_k(z)`` whose amplitudes
  follow AR(1) day-to-day dynamics on top of a seasonal cycle, plus a
  thermocline anomaly whose depth migrates with the season,
* white noise.

All randomness comes from numpy's PCG64 generator seeded through
``SeedSequence([seed, stream, ...])``; a snapshot depends only on
``(seed, day, params, grid)``.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .classical import demean_matrix
from .errors import DomainError
from .tensor import fold, unfold

__all__ = [
    "SsfGrid",
    "SynthParams",
    "SsfSnapshot",
    "SsfDataset",
    "munk_profile",
    "generate_snapshot",
    "build_dataset",
    "build_multiseason_dataset",
    "MULTISEASON_GRID",
]

SPEED_BOUNDS = (1400.0, 1600.0)


@dataclass(frozen=True)
class SsfGrid:
    m: int = 20
    n: int = 20
    i: int = 300
    dx: float = 8.0  # km
    dy: float = 8.0  # km
    dz: float = 10.0  # m

    def __post_init__(self):
        for name in ("m", "n", "i", "dx", "dy", "dz"):
            if not getattr(self, name) > 0:
                raise DomainError(f"grid field {name} must be positive")

    @property
    def shape(self):
        return (self.m, self.n, self.i)

    def depths(self):
        return np.arange(self.i) * self.dz

    def x_km(self):
        return np.arange(self.m) * self.dx

    def y_km(self):
        return np.arange(self.n) * self.dy


# 13 x 13 x 37 over 152 km x 152 km x 2 km
MULTISEASON_GRID = SsfGrid(m=13, n=13, i=37, dx=152 / 12, dy=152 / 12, dz=2000 / 36)


@dataclass(frozen=True)
class SynthParams:
    eddy_amplitude: float = -6.0  # m/s at the eddy core
    eddy_radius_km: float = 45.0
    eddy_depth_m: float = 150.0
    eddy_vscale_m: float = 300.0
    eddy_orbit_km: float = 40.0
    eddy_period_days: float = 120.0
    n_modes: int = 5
    mode_amplitude: float = 2.0  # m/s scale of the separable modes
    mode_decay_m: float = 700.0
    ar_coeff: float = 0.9
    ar_scale: float = 0.35  # AR(1) fluctuation relative to the mode amplitude
    seasonal_scale: float = 0.8
    thermocline_amplitude: float = 2.5
    thermocline_depth_m: tuple = (60.0, 260.0)
    thermocline_width_m: float = 50.0
    noise_sigma: float = 0.02

    def __post_init__(self):
        if self.n_modes < 0 or self.n_modes > 5:
            raise DomainError("n_modes must lie in [0, 5]")
        if not 0 <= self.noise_sigma <= 0.05:
            raise DomainError("noise_sigma must lie in [0, 0.05] m/s")
        if not 0 <= self.ar_coeff < 1:
            raise DomainError("ar_coeff must lie in [0, 1)")
        if abs(self.eddy_amplitude) > 8:
            raise DomainError("eddy amplitude is limited to 8 m/s")

    @classmethod
    def quiet(cls):
        """Depth-only fields: no eddy, no modes, no noise."""
        return cls(
            eddy_amplitude=0.0,
            n_modes=0,
            thermocline_amplitude=0.0,
            noise_sigma=0.0,
        )


@dataclass
class SsfSnapshot:
    grid: SsfGrid
    day: int
    field: np.ndarray


@dataclass
class SsfDataset:
    snapshots: list
    mean_field: np.ndarray
    train_days: tuple
    test_days: tuple
    blocks: dict = field(default_factory=dict)  # block label -> (train_days, test_days)

    def __post_init__(self):
        if set(self.train_days) & set(self.test_days):
            raise DomainError("train and test days overlap")

    @property
    def grid(self):
        return self.snapshots[0].grid

    def snapshot(self, day):
        for s in self.snapshots:
            if s.day == day:
                return s
        raise KeyError(day)

    def perturbation(self, day):
        """Snapshot minus the training mean field."""
        return self.snapshot(day).field - self.mean_field

    def train_fields(self):
        return [self.perturbation(d) for d in self.train_days]

    def test_fields(self):
        return [self.perturbation(d) for d in self.test_days]


def munk_profile(z, z_axis=1300.0, eps=0.00737, c0=1500.0):
    """Canonical Munk sound-speed profile (m/s) at depth ``z`` (m)."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(z < 0):
        raise DomainError("depth must be non-negative")
    eta = 2.0 * (z - z_axis) / z_axis
    return c0 * (1.0 + eps * (eta - 1.0 + np.exp(-eta)))


@lru_cache(maxsize=32)
def _mode_shapes(grid, params, seed):
    """Fixed spatial patterns of the separable modes (seed-dependent phases)."""
    rng = np.random.default_rng([seed, 0])
    xs = grid.x_km() / max(grid.x_km()[-1], 1e-9)
    ys = grid.y_km() / max(grid.y_km()[-1], 1e-9)
    z = grid.depths()
    shapes = []
    for k in range(params.n_modes):
        kx, ky = 0.5 * (k % 3), 0.5 * ((k + 1) % 3)
        px, py = rng.uniform(0, 2 * np.pi, size=2)
        a = np.cos(np.pi * kx * xs + px)
        b = np.cos(np.pi * ky * ys + py)
        # vertical structure: k-th oscillation under a surface-intensified envelope
        c = np.cos(np.pi * (k + 0.5) * z / 1500.0 + rng.uniform(0, np.pi / 4))
        c = c * np.exp(-z / params.mode_decay_m)
        phase = rng.uniform(0, 365)
        shapes.append((a, b, c, phase))
    return shapes


@lru_cache(maxsize=32)
def _ar_path(seed, n_modes, ar_coeff, n_days):
    rng = np.random.default_rng([seed, 1])
    eps = rng.standard_normal((n_days + 1, max(n_modes, 1)))
    out = np.empty_like(eps)
    out[0] = eps[0]
    g = np.sqrt(1 - ar_coeff**2)
    for d in range(1, n_days + 1):
        out[d] = ar_coeff * out[d - 1] + g * eps[d]
    out.setflags(write=False)
    return out


def _ar_value(seed, params, day):
    # paths are prefix-stable, so request a fixed horizon and index into it
    horizon = max(512, 1 << int(np.ceil(np.log2(day + 1))))
    return _ar_path(seed, params.n_modes, params.ar_coeff, horizon)[day]


def _seasonal(day, phase):
    return np.cos(2 * np.pi * (day - phase) / 365.0)


def generate_snapshot(grid, day, params=None, seed=0):
    """One sound-speed field for ``day`` (an integer day-of-record >= 1)."""
    params = SynthParams() if params is None else params
    day = int(day)
    if day < 0:
        raise DomainError("day must be non-negative")
    z = grid.depths()
    x = grid.x_km()[:, None, None]
    y = grid.y_km()[None, :, None]
    zz = z[None, None, :]
    field = np.broadcast_to(munk_profile(z)[None, None, :], grid.shape).copy()

    if params.eddy_amplitude:
        rng = np.random.default_rng([seed, 3])
        theta0 = rng.uniform(0, 2 * np.pi)
        cx0 = 0.5 * grid.x_km()[-1]
        cy0 = 0.5 * grid.y_km()[-1]
        ang = theta0 + 2 * np.pi * day / params.eddy_period_days
        cx = cx0 + params.eddy_orbit_km * np.cos(ang)
        cy = cy0 + params.eddy_orbit_km * np.sin(ang)
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        horiz = np.exp(-r2 / (2 * params.eddy_radius_km**2))
        vert = np.exp(-((zz - params.eddy_depth_m) ** 2) / (2 * params.eddy_vscale_m**2))
        vert = vert * np.exp(-zz / 2000.0)
        field += params.eddy_amplitude * horiz * vert

    if params.n_modes:
        ar = _ar_value(seed, params, day)
        for k, (a, b, c, phase) in enumerate(_mode_shapes(grid, params, seed)):
            amp = params.mode_amplitude * (
                1.0 + params.seasonal_scale * _seasonal(day, phase) + params.ar_scale * ar[k]
            )
            field += amp * a[:, None, None] * b[None, :, None] * c[None, None, :]

    if params.thermocline_amplitude:
        lo, hi = params.thermocline_depth_m
        depth = lo + (hi - lo) * 0.5 * (1 - _seasonal(day, 30.0))
        vert = np.exp(-((zz - depth) ** 2) / (2 * params.thermocline_width_m**2))
        rng = np.random.default_rng([seed, 4])
        kx, ky = rng.uniform(0.3, 0.8, size=2)
        tilt = 1.0 + 0.3 * np.cos(np.pi * kx * x / grid.x_km()[-1]) * np.cos(
            np.pi * ky * y / grid.y_km()[-1]
        )
        field += params.thermocline_amplitude * tilt * vert

    if params.noise_sigma:
        rng = np.random.default_rng([seed, 2, day])
        field += params.noise_sigma * rng.standard_normal(grid.shape)

    if not np.all(np.isfinite(field)):
        raise DomainError("generator produced non-finite values")
    lo, hi = SPEED_BOUNDS
    if field.min() < lo or field.max() > hi:
        raise DomainError("generated speeds left the physical range [1400, 1600] m/s")
    return SsfSnapshot(grid=grid, day=day, field=field)


def training_mean(fields, mode="profile"):
    """Mean field of the training snapshots.

    ``mode="profile"`` averages over snapshots and horizontal positions,
    which is the EOF column mean of the mode-3 unfolding broadcast back to
    the grid; ``mode="field"`` averages over snapshots only.
    """
    fields = [np.asarray(f) for f in fields]
    if mode == "field":
        return np.mean(fields, axis=0)
    if mode != "profile":
        raise DomainError(f"unknown mean mode {mode!r}")
    shape = fields[0].shape
    stacked = np.concatenate([unfold(f, 3) for f in fields], axis=1)
    _, m = demean_matrix(stacked)
    cols = shape[0] * shape[1]
    return fold(np.repeat(m[:, None], cols, axis=1), 3, shape)


def build_dataset(grid=None, days=30, params=None, seed=0, train_days=(1,), mean_mode="profile"):
    """Days ``1..days``; the listed training days feed the mean, the rest are test days."""
    grid = SsfGrid() if grid is None else grid
    if days < 2:
        raise DomainError("a dataset needs at least two days")
    train_days = tuple(int(d) for d in train_days)
    if not train_days or any(not 1 <= d <= days for d in train_days):
        raise DomainError(f"training days {train_days} outside 1..{days}")
    snaps = [generate_snapshot(grid, d, params, seed) for d in range(1, days + 1)]
    test_days = tuple(d for d in range(1, days + 1) if d not in train_days)
    mean = training_mean([snaps[d - 1].field for d in train_days], mean_mode)
    return SsfDataset(snaps, mean, train_days, test_days)


def build_multiseason_dataset(
    grid=MULTISEASON_GRID,
    params=None,
    seed=0,
    block_starts=(32, 122, 214, 306),
    n_train=3,
    n_test=7,
    mean_mode="profile",
):
    """Widely spaced blocks of consecutive days, one block per season.

    Each block trains on its first ``n_train`` days and tests on the next
    ``n_test`` days.  The mean field is taken over all training days.
    """
    blocks = {}
    days = []
    for b, start in enumerate(block_starts):
        tr = tuple(range(start, start + n_train))
        te = tuple(range(start + n_train, start + n_train + n_test))
        blocks[b] = (tr, te)
        days.extend(tr + te)
    if len(set(days)) != len(days):
        raise DomainError("season blocks overlap")
    snaps = [generate_snapshot(grid, d, params, seed) for d in days]
    train = tuple(d for tr, _ in blocks.values() for d in tr)
    test = tuple(d for _, te in blocks.values() for d in te)
    by_day = {s.day: s.field for s in snaps}
    mean = training_mean([by_day[d] for d in train], mean_mode)
    return SsfDataset(snaps, mean, train, test, blocks)


def with_params(params, **changes):
    return replace(params, **changes)
