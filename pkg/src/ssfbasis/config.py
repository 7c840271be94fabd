"""JSON experiment configuration.

A config is a JSON object; only ``methods`` is required.  Methods are given
either as a list of method types (defaults filled in) or as an object
mapping a label to its hyper-parameters, where ``type`` selects the method
and defaults to the label::

    {"methods": {"hooi": {"rank": [8, 8, 10]},
                 "eof_k3": {"type": "eof", "k": 3}}}
"""
import hashlib
import json
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError, DomainError
from .synth import MULTISEASON_GRID, SsfGrid, SynthParams

__all__ = [
    "METHOD_DEFAULTS",
    "MethodSpec",
    "ExperimentConfig",
    "parse_config",
    "read_config",
    "config_hash",
]

METHOD_DEFAULTS = {
    "hooi": {"rank": [8, 8, 10], "tol": 1e-8, "max_iter": 100, "n_starts": 1, "strict_paper": False},
    "mhooi": {"rank": [8, 8, 10], "tol": 1e-8, "max_iter": 100, "n_starts": 1, "strict_paper": False},
    "eof": {"k": 2},
    "ksvd": {"t": 2, "z": 320, "max_iter": 30, "tol": 1e-6},
    "fourier_eof": {"nf1": 8, "nf2": 8, "kf": 10, "lx": None, "ly": None},
}

_POSITIVE_INT = {"k", "t", "z", "nf1", "nf2", "kf", "max_iter", "n_starts"}


@dataclass
class MethodSpec:
    label: str
    type: str
    params: dict

    def __post_init__(self):
        if self.type not in METHOD_DEFAULTS:
            raise ConfigError(f"unknown method type {self.type!r}", key=f"methods.{self.label}")


@dataclass
class ExperimentConfig:
    methods: list
    name: str = "experiment"
    seed: int = 0
    seeds: list = field(default_factory=lambda: [0])
    grid: SsfGrid = field(default_factory=SsfGrid)
    generator: SynthParams = field(default_factory=SynthParams)
    days: int = 30
    train_days: list = field(default_factory=lambda: [1])
    mean_mode: str = "profile"
    tensor_files: list = None
    multiseason: dict = field(
        default_factory=lambda: {
            "grid": asdict(MULTISEASON_GRID),
            "block_starts": [32, 122, 214, 306],
            "n_train": 3,
            "n_test": 7,
            "rank": [6, 6, 8],
        }
    )
    sweep: dict = field(
        default_factory=lambda: {
            "hooi": [[l, l, l3] for l in (2, 4, 6, 8, 10) for l3 in (2, 4, 6, 8, 10, 12)],
            "eof": [1, 2, 3, 4, 5, 6, 8],
            "ksvd": [1, 2, 3, 4, 6],
            "fourier_eof": [[f, f, k] for f in (4, 8, 12, 16, 20) for k in (4, 8, 12)],
            "ksvd_z": 320,
            "ksvd_max_iter": 15,
            "threshold": 0.1,
            "metric": "rmse_normalized",
        }
    )
    timing_repeats: int = 5
    report_timing: bool = False
    output_dir: str = "out"
    raw: dict = field(default_factory=dict, repr=False)

    def method(self, label):
        for m in self.methods:
            if m.label == label:
                return m
        raise KeyError(label)


_TOP_KEYS = {f.name for f in fields(ExperimentConfig)} - {"raw"}


def _validate_params(label, mtype, params):
    out = dict(METHOD_DEFAULTS[mtype])
    for key, val in params.items():
        if key == "type":
            continue
        if key not in out:
            warnings.warn(f"unknown key methods.{label}.{key} ignored", stacklevel=3)
            continue
        out[key] = val
    where = f"methods.{label}"
    for key in _POSITIVE_INT & out.keys():
        v = out[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"{where}.{key} must be a positive integer, got {v!r}", key=f"{where}.{key}")
    if "rank" in out:
        r = out["rank"]
        if (
            not isinstance(r, (list, tuple))
            or len(r) != 3
            or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in r)
        ):
            raise ConfigError(f"{where}.rank must be three positive integers, got {r!r}", key=f"{where}.rank")
        out["rank"] = [int(v) for v in r]
    for key in ("lx", "ly"):
        if key in out and out[key] is not None and not out[key] > 0:
            raise ConfigError(f"{where}.{key} must be positive", key=f"{where}.{key}")
    if "tol" in out and not out["tol"] > 0:
        raise ConfigError(f"{where}.tol must be positive", key=f"{where}.tol")
    return out


def _parse_methods(raw):
    if isinstance(raw, list):
        items = [(name, {}) for name in raw]
    elif isinstance(raw, dict):
        items = list(raw.items())
    else:
        raise ConfigError("methods must be a list or an object", key="methods")
    if not items:
        raise ConfigError("methods must not be empty", key="methods")
    specs = []
    for label, params in items:
        if not isinstance(params, dict):
            raise ConfigError(f"methods.{label} must be an object", key=f"methods.{label}")
        mtype = params.get("type", label)
        if mtype not in METHOD_DEFAULTS:
            raise ConfigError(f"unknown method type {mtype!r}", key=f"methods.{label}")
        specs.append(MethodSpec(label, mtype, _validate_params(label, mtype, params)))
    return specs


def _build(cls, raw, key):
    if not isinstance(raw, dict):
        raise ConfigError(f"{key} must be an object", key=key)
    known = {f.name for f in fields(cls)}
    for k in raw:
        if k not in known:
            warnings.warn(f"unknown key {key}.{k} ignored", stacklevel=3)
    kwargs = {k: (tuple(v) if isinstance(v, list) else v) for k, v in raw.items() if k in known}
    try:
        return cls(**kwargs)
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"invalid {key}: {exc}", key=key) from exc


def parse_config(raw):
    """Validate a decoded JSON object and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "methods" not in raw:
        raise ConfigError("missing required key 'methods'", key="methods")
    for k in raw:
        if k not in _TOP_KEYS:
            warnings.warn(f"unknown config key {k!r} ignored", stacklevel=2)
    cfg = ExperimentConfig(methods=_parse_methods(raw["methods"]), raw=raw)
    for key in ("name", "output_dir", "mean_mode"):
        if key in raw:
            setattr(cfg, key, str(raw[key]))
    for key in ("seed", "days", "timing_repeats"):
        if key in raw:
            v = raw[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"{key} must be a non-negative integer", key=key)
            setattr(cfg, key, v)
    cfg.seeds = [cfg.seed]
    if "seeds" in raw:
        seeds = raw["seeds"]
        if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) and s >= 0 for s in seeds):
            raise ConfigError("seeds must be a non-empty list of non-negative integers", key="seeds")
        cfg.seeds = list(seeds)
    if "train_days" in raw:
        td = raw["train_days"]
        if not isinstance(td, list) or not td or not all(isinstance(d, int) and d >= 1 for d in td):
            raise ConfigError("train_days must be a non-empty list of positive days", key="train_days")
        cfg.train_days = td
    if cfg.days < 2:
        raise ConfigError("days must be at least 2", key="days")
    if cfg.mean_mode not in ("profile", "field"):
        raise ConfigError("mean_mode must be 'profile' or 'field'", key="mean_mode")
    if "report_timing" in raw:
        cfg.report_timing = bool(raw["report_timing"])
    if "grid" in raw:
        cfg.grid = _build(SsfGrid, raw["grid"], "grid")
    if "generator" in raw:
        cfg.generator = _build(SynthParams, raw["generator"], "generator")
    if "tensor_files" in raw:
        tf = raw["tensor_files"]
        if not isinstance(tf, list) or not all(isinstance(p, str) for p in tf):
            raise ConfigError("tensor_files must be a list of paths", key="tensor_files")
        cfg.tensor_files = tf
    for key in ("multiseason", "sweep"):
        if key in raw:
            if not isinstance(raw[key], dict):
                raise ConfigError(f"{key} must be an object", key=key)
            merged = dict(getattr(cfg, key))
            for k, v in raw[key].items():
                if k not in merged:
                    warnings.warn(f"unknown key {key}.{k} ignored", stacklevel=2)
                merged[k] = v
            setattr(cfg, key, merged)
    if "rank" in cfg.multiseason:
        _validate_params("multiseason", "hooi", {"rank": cfg.multiseason["rank"]})
    return cfg


def read_config(path):
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)


def config_hash(cfg):
    blob = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
