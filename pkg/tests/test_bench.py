import csv
import io
import json
import math

import numpy as np
import pytest

from ssfbasis.bench import (
    CSV_COLUMNS,
    Method,
    SweepResult,
    coefficient_count,
    run_budget_sweep,
    run_compare,
    run_multiseason,
    run_timing,
    rmse,
    rmse_normalized,
)
from ssfbasis.config import parse_config
from ssfbasis.errors import DomainError
from ssfbasis.synth import SsfGrid, build_dataset

SMALL = SsfGrid(m=6, n=5, i=12, dz=200.0)


def test_rmse_examples():
    x = np.zeros((2, 2, 4))
    assert rmse(x, x) == 0.0
    assert rmse(x + 1.0, x) == 1.0
    assert rmse_normalized(x + 1.0, x) == 1.0
    with pytest.raises(DomainError):
        rmse(np.zeros((2, 2, 4)), np.zeros((2, 2, 3)))


def test_rmse_elementwise_oracle(rng):
    x = rng.standard_normal((3, 4, 5))
    y = rng.standard_normal((3, 4, 5))
    total = 0.0
    for v in (x - y).ravel():
        total += v * v
    assert rmse(x, y) == pytest.approx(math.sqrt(total) / 5, rel=1e-13)
    assert rmse_normalized(x, y) == pytest.approx(math.sqrt(total / 60), rel=1e-13)


@pytest.mark.parametrize(
    "method, params, want",
    [
        ("hooi", {"rank": [8, 8, 10]}, 640),
        ("eof", {"k": 2}, 800),
        ("eof", {"k": 3}, 1200),
        ("ksvd", {"t": 2}, 800),
        ("ksvd", {"t": 3}, 1200),
        ("fourier_eof", {"nf1": 8, "nf2": 8, "kf": 10}, 640),
    ],
)
def test_coefficient_count_table(method, params, want):
    assert coefficient_count(method, params, (20, 20, 300)) == want


def test_complete_representations_are_exact():
    ds = build_dataset(SMALL, days=2, seed=1)
    x = ds.perturbation(1)
    m, n, i = x.shape
    full = [
        Method("hooi", {"rank": [m, n, i]}),
        Method("eof", {"k": i}),
        Method("ksvd", {"t": i, "z": i, "max_iter": 2}),
        Method("fourier_eof", {"nf1": m, "nf2": n, "kf": i}),
    ]
    for meth in full:
        meth.train([x])
        assert rmse(x, meth.reconstruct(x)) <= 1e-6, meth.type


def small_config(**extra):
    raw = {
        "methods": {
            "hooi": {"rank": [3, 3, 4]},
            "eof": {"k": 2},
            "ksvd": {"t": 2, "z": 12, "max_iter": 3},
            "fourier_eof": {"nf1": 3, "nf2": 3, "kf": 4},
        },
        "grid": {"m": 6, "n": 5, "i": 12, "dz": 200.0},
        "days": 6,
    }
    raw.update(extra)
    return parse_config(raw)


def test_compare_rows_and_csv(tmp_path):
    cfg = small_config()
    rep = run_compare(cfg)
    assert len(rep.rows) == 4 * 6
    text = rep.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert {r[0] for r in rows[1:]} == {"hooi", "eof", "ksvd", "fourier_eof"}
    assert all(r[6] == r[7] == r[8] == "" for r in rows[1:])
    counts = {r.method: r.coeff_count for r in rep.rows}
    assert counts == {"hooi": 36, "eof": 60, "ksvd": 60, "fourier_eof": 36}
    path = rep.write(tmp_path, "run", cfg)
    side = json.loads((tmp_path / "run.json").read_text())
    assert side["config_sha256"] == rep.config_hash and side["seeds"] == [0]
    assert path.read_text() == text


def test_compare_is_byte_identical_on_rerun(tmp_path):
    cfg = small_config(seeds=[2, 3])
    a = run_compare(cfg).write(tmp_path / "a", "r", cfg).read_bytes()
    b = run_compare(cfg).write(tmp_path / "b", "r", cfg).read_bytes()
    assert a == b


def test_timing_columns_when_requested():
    rep = run_compare(small_config())
    rows = list(csv.reader(io.StringIO(rep.to_csv(include_timing=True))))[1:]
    assert all(float(r[6]) > 0 and float(r[7]) > 0 for r in rows)


def test_failed_method_does_not_abort_others():
    cfg = small_config()
    cfg.methods[0].params["rank"] = [7, 3, 4]  # larger than the 6-point grid
    rep = run_compare(cfg)
    failed = [r for r in rep.rows if r.failed]
    assert failed and all(r.method == "hooi" for r in failed)
    assert "train" in failed[0].error
    assert "failed" in rep.to_csv()
    assert len(rep.select("eof")) == 6


def test_minimal_budget_infinity_marker():
    res = SweepResult(points=[{"method": "eof", "hyper": 1, "budget": 10, "rmse": 0.5, "seed": 0}])
    assert res.minimal_budget("eof", 0.1) == math.inf
    assert res.minimal_budget("eof", 0.6) == 10
    assert res.minimal_budget("hooi", 0.6) == math.inf


@pytest.fixture(scope="module")
def nested_sweep(default_dataset):
    cfg = parse_config(
        {
            "methods": ["hooi"],
            "sweep": {
                "hooi": [[l, l, l] for l in (2, 4, 6, 8, 10, 12)],
                "eof": [1, 2, 3, 4, 6, 8],
                "fourier_eof": [[f, f, f] for f in (4, 8, 12, 16, 20)],
                "ksvd": [],
            },
        }
    )
    return run_budget_sweep(cfg, seeds=[0], datasets={0: default_dataset})


@pytest.mark.parametrize("method", ["eof", "fourier_eof"])
def test_nested_curves_non_increasing(nested_sweep, method):
    errs = [e for _, e in nested_sweep.curve(method)]
    assert len(errs) >= 5
    assert np.all(np.diff(errs) <= 1e-12)


@pytest.mark.xfail(strict=True, reason="HOOI bases of different ranks are not nested; test error can tick up")
def test_hooi_test_curve_non_increasing(nested_sweep):
    errs = [e for _, e in nested_sweep.curve("hooi")]
    assert np.all(np.diff(errs) <= 1e-12)


def test_hooi_training_fit_grows_with_nested_rank(default_dataset):
    x = default_dataset.perturbation(1)
    fits = []
    for l in (2, 4, 6, 8, 10, 12):
        m = Method("hooi", {"rank": [l, l, l]})
        m.train([x])
        fits.append(m.basis.fit_trace[-1])
    assert np.all(np.diff(fits) >= 0)


@pytest.fixture(scope="module")
def default_compare(default_dataset):
    cfg = parse_config(
        {"methods": {"hooi": {}, "eof": {}, "eof_k3": {"type": "eof", "k": 3}, "ksvd": {}, "fourier_eof": {}}}
    )
    return run_compare(cfg, seeds=[0], datasets={0: default_dataset})


@pytest.mark.parametrize("method", ["hooi", "eof", "eof_k3", "ksvd"])
def test_training_error_below_test_error(default_compare, method):
    assert default_compare.mean_rmse(method, "train") <= default_compare.mean_rmse(method, "test")


@pytest.mark.xfail(strict=True, reason="fixed Fourier columns are not fitted to the training day")
def test_fourier_training_error_below_test_error(default_compare):
    assert default_compare.mean_rmse("fourier_eof", "train") <= default_compare.mean_rmse("fourier_eof", "test")


def test_report_counts_match_formulas(default_compare):
    want = {"hooi": 640, "eof": 800, "eof_k3": 1200, "ksvd": 800, "fourier_eof": 640}
    for r in default_compare.rows:
        assert r.coeff_count == want[r.method]


def multiseason_config(**ms):
    base = {"block_starts": [32, 122, 214, 306], "n_train": 3, "n_test": 7, "rank": [6, 6, 8]}
    base.update(ms)
    return parse_config({"methods": ["hooi"], "multiseason": base})


def test_multiseason_single_block_degenerates_to_hooi():
    cfg = multiseason_config(block_starts=[40], n_train=1, n_test=4)
    res = run_multiseason(cfg, seeds=[0])[0]
    assert abs(res.joint[0] - res.matrix[(0, 0)]) <= 1e-6
    rows = res.report.rows
    joint = [r.rmse_eq27 for r in rows if r.method == "mhooi"]
    single = [r.rmse_eq27 for r in rows if r.method == "hooi_block0"]
    np.testing.assert_allclose(joint, single, atol=1e-6)


def test_multiseason_within_block_advantage():
    res = run_multiseason(multiseason_config(), seeds=[0])[0]
    for b in res.joint:
        own = res.matrix[(b, b)]
        assert own == min(res.matrix[(b, c)] for c in res.joint)


def test_timing_sanity():
    cfg = small_config(timing_repeats=5)
    res = run_timing(cfg)
    for label, phases in res.samples.items():
        for phase, xs in phases.items():
            xs = np.asarray(xs)
            assert len(xs) == 5 and np.all(xs > 0), (label, phase)
            med = np.median(xs)
            # every repeat within a factor of 5 of the median
            assert np.all(xs <= 5 * med) and np.all(xs >= med / 5), (label, phase, xs)
