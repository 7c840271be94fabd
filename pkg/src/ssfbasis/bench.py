"""Equal-budget comparison of the four basis families on synthetic fields."""
import csv
import io
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classical, ksvd, tucker
from .config import METHOD_DEFAULTS, MethodSpec, config_hash
from .errors import DomainError, SsfBasisError
from .formats import read_tensor
from .synth import SsfDataset, SsfGrid, SsfSnapshot, build_dataset, build_multiseason_dataset, training_mean
from .tensor import fold, frobenius_norm, unfold

log = logging.getLogger(__name__)

__all__ = [
    "CSV_COLUMNS",
    "rmse",
    "rmse_normalized",
    "coefficient_count",
    "Method",
    "make_method",
    "ReportRow",
    "ExperimentReport",
    "SweepResult",
    "load_dataset",
    "run_compare",
    "run_budget_sweep",
    "run_multiseason",
    "run_timing",
]

CSV_COLUMNS = (
    "method",
    "day",
    "split",
    "rmse_eq27",
    "rmse_normalized",
    "coeff_count",
    "train_s",
    "encode_s",
    "decode_s",
    "seed",
)


def _pair(x, x_hat):
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape or x.ndim != 3:
        raise DomainError(f"rmse needs two equal M x N x I tensors, got {x.shape} and {x_hat.shape}")
    return x, x_hat


def rmse(x, x_hat):
    """Per-slice reconstruction error ``||X - X_hat||_F / I`` (I = depth count)."""
    x, x_hat = _pair(x, x_hat)
    return frobenius_norm(x - x_hat) / x.shape[2]


def rmse_normalized(x, x_hat):
    """Root mean square over all grid points, ``||X - X_hat||_F / sqrt(MNI)``."""
    x, x_hat = _pair(x, x_hat)
    return frobenius_norm(x - x_hat) / math.sqrt(x.size)


def coefficient_count(method, params, grid):
    """Stored coefficients per field for a method's hyper-parameters."""
    m, n = grid[0], grid[1]
    if method in ("hooi", "mhooi"):
        l1, l2, l3 = params["rank"]
        return int(l1 * l2 * l3)
    if method == "eof":
        return int(params["k"] * m * n)
    if method == "ksvd":
        return int(params["t"] * m * n)
    if method == "fourier_eof":
        return int(params["nf1"] * params["nf2"] * params["kf"])
    raise DomainError(f"unknown method {method!r}")


def _columns(fields):
    return np.concatenate([unfold(f, 3) for f in fields], axis=1)


class Method:
    """Uniform train / encode / decode wrapper around one basis family."""

    def __init__(self, mtype, params, seed=0):
        self.type = mtype
        self.params = {**METHOD_DEFAULTS[mtype], **params}
        self.seed = seed
        self.basis = None

    def coefficient_count(self, grid):
        return coefficient_count(self.type, self.params, grid)

    def train(self, fields):
        p = self.params
        if not fields:
            raise DomainError("no training fields")
        if self.type in ("hooi", "mhooi"):
            kw = dict(
                tol=p["tol"],
                max_iter=p["max_iter"],
                strict_paper=p["strict_paper"],
                n_starts=p["n_starts"],
                seed=self.seed,
            )
            if len(fields) == 1:
                _, self.basis = tucker.hooi(fields[0], p["rank"], **kw)
            else:
                _, self.basis = tucker.mhooi(fields, p["rank"], **kw)
        elif self.type == "eof":
            self.basis = classical.learn_eof(_columns(fields), p["k"])
        elif self.type == "ksvd":
            self.basis, _ = ksvd.ksvd_learn(
                _columns(fields), p["z"], p["t"], max_iter=p["max_iter"], seed=self.seed, tol=p["tol"]
            )
        elif self.type == "fourier_eof":
            b = classical.learn_fourier_eof(fields[0], p["nf1"], p["nf2"], p["kf"], p["lx"], p["ly"])
            if len(fields) > 1:
                b.eof = classical.learn_eof(_columns(fields), p["kf"]).factors
            self.basis = b
        self._shape = np.shape(fields[0])
        return self.basis

    def encode(self, x):
        if self.type in ("hooi", "mhooi"):
            return tucker.tucker_encode(x, self.basis)
        if self.type == "eof":
            return classical.eof_encode(unfold(x, 3), self.basis)
        if self.type == "ksvd":
            return ksvd.ksvd_encode(unfold(x, 3), self.basis)
        return classical.fourier_eof_encode(x, self.basis)

    def decode(self, coeffs):
        if self.type in ("hooi", "mhooi"):
            return tucker.tucker_decode(coeffs, self.basis)
        if self.type == "eof":
            return fold(classical.eof_decode(coeffs, self.basis), 3, self._shape)
        if self.type == "ksvd":
            return fold(ksvd.ksvd_decode(coeffs, self.basis), 3, self._shape)
        return classical.fourier_eof_decode(coeffs, self.basis)

    def reconstruct(self, x):
        return self.decode(self.encode(x))


def make_method(spec, seed=0):
    if isinstance(spec, MethodSpec):
        return Method(spec.type, spec.params, seed)
    return Method(spec, {}, seed)


@dataclass
class ReportRow:
    method: str
    day: object
    split: str
    rmse_eq27: float
    rmse_normalized: float
    coeff_count: int
    train_s: float = None
    encode_s: float = None
    decode_s: float = None
    seed: int = 0
    error: str = None

    @property
    def failed(self):
        return self.error is not None


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    config_hash: str = ""
    kind: str = "compare"

    def sorted_rows(self):
        def key(r):
            day = r.day if isinstance(r.day, int) else -1
            return (r.seed, r.method, day, str(r.day), r.split)

        return sorted(self.rows, key=key)

    def select(self, method=None, split=None, seed=None):
        return [
            r
            for r in self.rows
            if (method is None or r.method == method)
            and (split is None or r.split == split)
            and (seed is None or r.seed == seed)
            and not r.failed
        ]

    def mean_rmse(self, method, split="test", metric="rmse_normalized", seed=None):
        vals = [getattr(r, metric) for r in self.select(method, split, seed)]
        return float(np.mean(vals)) if vals else math.nan

    def methods(self):
        seen = []
        for r in self.rows:
            if r.method not in seen:
                seen.append(r.method)
        return seen

    def to_csv(self, include_timing=False):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.sorted_rows():
            timing = (r.train_s, r.encode_s, r.decode_s) if include_timing else (None, None, None)
            if r.failed:
                err = ("failed", "failed")
            else:
                err = (_fmt(r.rmse_eq27), _fmt(r.rmse_normalized))
            w.writerow([r.method, r.day, r.split, *err, r.coeff_count, *map(_fmt, timing), r.seed])
        return buf.getvalue()

    def write(self, out_dir, stem, config=None, include_timing=False):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{stem}.csv"
        csv_path.write_bytes(self.to_csv(include_timing).encode())
        side = {
            "kind": self.kind,
            "config_sha256": self.config_hash,
            "config": config.raw if config is not None else None,
            "seeds": sorted({r.seed for r in self.rows}),
            "failures": [
                {"method": r.method, "day": r.day, "seed": r.seed, "error": r.error}
                for r in self.sorted_rows()
                if r.failed
            ],
        }
        (out / f"{stem}.json").write_text(json.dumps(side, sort_keys=True, indent=2) + "\n")
        return csv_path


def load_dataset(cfg, seed):
    """Synthetic dataset for ``seed``, or the DT01 files listed in the config."""
    if not cfg.tensor_files:
        return build_dataset(cfg.grid, cfg.days, cfg.generator, seed, cfg.train_days, cfg.mean_mode)
    fields = [read_tensor(p) for p in cfg.tensor_files]
    shape = fields[0].shape
    if any(f.shape != shape or f.ndim != 3 for f in fields):
        raise DomainError("tensor_files must all hold equally shaped 3-way tensors")
    grid = SsfGrid(m=shape[0], n=shape[1], i=shape[2], dx=cfg.grid.dx, dy=cfg.grid.dy, dz=cfg.grid.dz)
    snaps = [SsfSnapshot(grid, d, f) for d, f in enumerate(fields, start=1)]
    train = tuple(cfg.train_days)
    test = tuple(d for d in range(1, len(fields) + 1) if d not in train)
    mean = training_mean([fields[d - 1] for d in train], cfg.mean_mode)
    return SsfDataset(snaps, mean, train, test)


def _evaluate(label, method, ds, seed, rows, split_days=None):
    """Train on ds.train_days, reconstruct every snapshot, append rows."""
    grid = ds.grid.shape
    count = method.coefficient_count(grid)
    t0 = time.perf_counter()
    try:
        method.train(ds.train_fields())
    except SsfBasisError as exc:
        log.error("%s training failed (seed %s): %s", label, seed, exc)
        for d in ds.train_days + ds.test_days:
            rows.append(ReportRow(label, d, _split(ds, d), math.nan, math.nan, count, seed=seed,
                                  error=f"train: {exc}"))
        return
    train_s = time.perf_counter() - t0
    days = split_days if split_days is not None else ds.train_days + ds.test_days
    for d in days:
        x = ds.perturbation(d)
        try:
            t0 = time.perf_counter()
            c = method.encode(x)
            t1 = time.perf_counter()
            x_hat = method.decode(c)
            t2 = time.perf_counter()
        except SsfBasisError as exc:
            log.error("%s failed on day %s (seed %s): %s", label, d, seed, exc)
            rows.append(ReportRow(label, d, _split(ds, d), math.nan, math.nan, count, seed=seed,
                                  error=f"day {d}: {exc}"))
            continue
        rows.append(
            ReportRow(label, d, _split(ds, d), rmse(x, x_hat), rmse_normalized(x, x_hat), count,
                      train_s, t1 - t0, t2 - t1, seed)
        )


def _split(ds, day):
    return "train" if day in ds.train_days else "test"


def run_compare(cfg, seeds=None, datasets=None):
    """Learn every configured method on the training split and score all days.

    ``datasets`` optionally maps seed -> prebuilt dataset.
    """
    report = ExperimentReport(config_hash=config_hash(cfg), kind="compare")
    for seed in seeds if seeds is not None else cfg.seeds:
        ds = datasets[seed] if datasets and seed in datasets else load_dataset(cfg, seed)
        for spec in cfg.methods:
            _evaluate(spec.label, make_method(spec, seed), ds, seed, report.rows)
    return report


@dataclass
class SweepResult:
    """Mean test error per (method, hyper-parameter) point."""

    points: list = field(default_factory=list)  # dicts: method, hyper, budget, rmse, seed
    report: ExperimentReport = None

    def curve(self, method, seed=None):
        """Lower envelope: best error at each budget, sorted by budget."""
        best = {}
        for p in self.points:
            if p["method"] != method or (seed is not None and p["seed"] != seed):
                continue
            b = p["budget"]
            best[b] = min(best.get(b, math.inf), p["rmse"])
        return sorted(best.items())

    def minimal_budget(self, method, threshold, seed=None):
        """Smallest swept budget whose error is below ``threshold``; ``math.inf`` if none."""
        hits = [b for b, e in self.curve(method, seed) if e < threshold]
        return min(hits) if hits else math.inf


def _hyper_label(mtype, hyper):
    if isinstance(hyper, (list, tuple)):
        return f"{mtype}[{'x'.join(str(h) for h in hyper)}]"
    return f"{mtype}[{hyper}]"


def _sweep_params(mtype, hyper, sweep):
    if mtype == "hooi":
        return {"rank": list(hyper)}
    if mtype == "eof":
        return {"k": int(hyper)}
    if mtype == "ksvd":
        return {"t": int(hyper), "z": int(sweep.get("ksvd_z", 320)), "max_iter": int(sweep.get("ksvd_max_iter", 15))}
    if mtype == "fourier_eof":
        nf1, nf2, kf = hyper
        return {"nf1": nf1, "nf2": nf2, "kf": kf}
    raise DomainError(f"cannot sweep method {mtype!r}")


def run_budget_sweep(cfg, seeds=None, methods=("hooi", "eof", "ksvd", "fourier_eof"), datasets=None):
    """Mean test error against coefficient budget for each method's sweep grid."""
    sweep = cfg.sweep
    metric = sweep.get("metric", "rmse_normalized")
    result = SweepResult(report=ExperimentReport(config_hash=config_hash(cfg), kind="sweep"))
    for seed in seeds if seeds is not None else cfg.seeds:
        ds = datasets[seed] if datasets and seed in datasets else load_dataset(cfg, seed)
        for mtype in methods:
            for hyper in sweep.get(mtype, []):
                params = _sweep_params(mtype, hyper, sweep)
                try:
                    coefficient_count(mtype, {**METHOD_DEFAULTS[mtype], **params}, ds.grid.shape)
                    method = Method(mtype, params, seed)
                    if mtype == "hooi":
                        tucker.MultilinearRank.of(params["rank"]).check(ds.grid.shape)
                except SsfBasisError as exc:
                    log.warning("skipping %s: %s", _hyper_label(mtype, hyper), exc)
                    continue
                label = _hyper_label(mtype, hyper)
                rows = []
                _evaluate(label, method, ds, seed, rows, split_days=ds.test_days)
                ok = [r for r in rows if not r.failed]
                if not ok:
                    continue
                err = float(np.mean([getattr(r, metric) for r in ok]))
                result.points.append(
                    {"method": mtype, "hyper": hyper, "budget": ok[0].coeff_count, "rmse": err, "seed": seed}
                )
                result.report.rows.append(
                    ReportRow(label, "mean", "test",
                              float(np.mean([r.rmse_eq27 for r in ok])),
                              float(np.mean([r.rmse_normalized for r in ok])),
                              ok[0].coeff_count, ok[0].train_s,
                              float(np.mean([r.encode_s for r in ok])),
                              float(np.mean([r.decode_s for r in ok])), seed)
                )
    return result


@dataclass
class MultiseasonResult:
    report: ExperimentReport
    # (train block, test block) -> mean error for single-snapshot HOOI
    matrix: dict = field(default_factory=dict)
    # test block -> mean error for M-HOOI
    joint: dict = field(default_factory=dict)

    def single_block_mean(self, train_block):
        vals = [v for (tb, _), v in self.matrix.items() if tb == train_block]
        return float(np.mean(vals))

    def joint_mean(self):
        return float(np.mean(list(self.joint.values())))


def run_multiseason(cfg, seeds=None, metric="rmse_normalized", datasets=None):
    """Single-snapshot HOOI per block against M-HOOI on every block's training days.

    HOOI is trained on the first day of each block in turn; M-HOOI on all
    training days.  Both share the multilinear rank and are scored on every
    block's test week.
    """
    ms = cfg.multiseason
    grid = SsfGrid(**ms["grid"]) if isinstance(ms["grid"], dict) else ms["grid"]
    rank = list(ms["rank"])
    hp = cfg.method("hooi").params if any(m.label == "hooi" for m in cfg.methods) else {}
    base = {k: v for k, v in hp.items() if k != "rank"}
    results = []
    report = ExperimentReport(config_hash=config_hash(cfg), kind="multiseason")
    for seed in seeds if seeds is not None else cfg.seeds:
        if datasets and seed in datasets:
            ds = datasets[seed]
        else:
            ds = build_multiseason_dataset(
                grid, cfg.generator, seed, tuple(ms["block_starts"]), ms["n_train"], ms["n_test"], cfg.mean_mode
            )
        res = MultiseasonResult(report=report)
        blocks = ds.blocks
        joint = Method("mhooi", {**base, "rank": rank}, seed)
        joint.train(ds.train_fields())
        for b, (_, te) in blocks.items():
            errs = []
            for d in te:
                x = ds.perturbation(d)
                x_hat = joint.reconstruct(x)
                errs.append(rmse_normalized(x, x_hat) if metric == "rmse_normalized" else rmse(x, x_hat))
                report.rows.append(ReportRow("mhooi", d, "test", rmse(x, x_hat), rmse_normalized(x, x_hat),
                                             joint.coefficient_count(grid.shape), seed=seed))
            res.joint[b] = float(np.mean(errs))
        for tb, (tr, _) in blocks.items():
            single = Method("hooi", {**base, "rank": rank}, seed)
            single.train([ds.perturbation(tr[0])])
            label = f"hooi_block{tb}"
            for b, (_, te) in blocks.items():
                errs = []
                for d in te:
                    x = ds.perturbation(d)
                    x_hat = single.reconstruct(x)
                    errs.append(rmse_normalized(x, x_hat) if metric == "rmse_normalized" else rmse(x, x_hat))
                    report.rows.append(ReportRow(label, d, "test", rmse(x, x_hat), rmse_normalized(x, x_hat),
                                                 single.coefficient_count(grid.shape), seed=seed))
                res.matrix[(tb, b)] = float(np.mean(errs))
        results.append(res)
    return results


@dataclass
class TimingResult:
    # method label -> {"train": [...], "encode": [...], "decode": [...]} seconds per repeat
    samples: dict = field(default_factory=dict)
    report: ExperimentReport = None

    def median(self, label, phase):
        return statistics.median(self.samples[label][phase])


def run_timing(cfg, seed=None, repeats=None, n_test=5, dataset=None):
    """Median wall time per phase; one warm-up run per method is discarded."""
    seed = cfg.seeds[0] if seed is None else seed
    repeats = cfg.timing_repeats if repeats is None else repeats
    ds = dataset if dataset is not None else load_dataset(cfg, seed)
    train = ds.train_fields()
    tests = ds.test_fields()[:n_test]
    result = TimingResult(report=ExperimentReport(config_hash=config_hash(cfg), kind="timing"))
    grid = ds.grid.shape
    for spec in cfg.methods:
        samples = {"train": [], "encode": [], "decode": []}
        for rep in range(repeats + 1):
            method = make_method(spec, seed)
            t0 = time.perf_counter()
            method.train(train)
            tr = time.perf_counter() - t0
            enc = dec = 0.0
            for x in tests:
                t0 = time.perf_counter()
                c = method.encode(x)
                t1 = time.perf_counter()
                method.decode(c)
                t2 = time.perf_counter()
                enc += t1 - t0
                dec += t2 - t1
            if rep == 0:
                continue
            samples["train"].append(tr)
            samples["encode"].append(enc / len(tests))
            samples["decode"].append(dec / len(tests))
        result.samples[spec.label] = samples
        result.report.rows.append(
            ReportRow(spec.label, "median", "timing", math.nan, math.nan, method.coefficient_count(grid),
                      statistics.median(samples["train"]), statistics.median(samples["encode"]),
                      statistics.median(samples["decode"]), seed)
        )
    return result
