"""Command line entry point: ``ssfbasis <command> [options]``."""
import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bench, checks
from .classical import EofBasis, FourierEofBasis, eof_decode, eof_encode, fourier_eof_decode, fourier_eof_encode
from .config import parse_config, read_config
from .errors import ConfigError, ParseError, SsfBasisError
from .formats import read_basis, read_tensor, write_basis, write_tensor
from .ksvd import KsvdDictionary, SparseCode, ksvd_decode, ksvd_encode
from .tensor import fold, unfold
from .tucker import TuckerBasis, tucker_decode, tucker_encode

log = logging.getLogger("ssfbasis")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_GATE = 0, 2, 3, 4


def _load_config(args):
    if args.config:
        cfg = read_config(args.config)
    else:
        cfg = parse_config({"methods": ["hooi", "eof", "ksvd", "fourier_eof"]})
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.seeds = [args.seed]
    if getattr(args, "strict_paper", False):
        for spec in cfg.methods:
            if spec.type in ("hooi", "mhooi"):
                spec.params["strict_paper"] = True
        cfg.raw = {**cfg.raw, "strict_paper": True}
    if getattr(args, "method", None):
        wanted = set(args.method.split(","))
        unknown = wanted - {m.label for m in cfg.methods}
        if unknown:
            raise ConfigError(f"method(s) {sorted(unknown)} not in config", key="methods")
        cfg.methods = [m for m in cfg.methods if m.label in wanted]
    return cfg


def _out(args, cfg):
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args):
    cfg = _load_config(args)
    out = _out(args, cfg)
    ds = bench.load_dataset(cfg, cfg.seeds[0])
    for snap in ds.snapshots:
        write_tensor(out / f"day_{snap.day:03d}.dt01", snap.field)
    write_tensor(out / "mean.dt01", ds.mean_field)
    print(f"wrote {len(ds.snapshots)} snapshots and mean.dt01 to {out}")


def cmd_train(args):
    cfg = _load_config(args)
    if len(cfg.methods) != 1:
        raise ConfigError("train needs exactly one method; pass --method", key="methods")
    spec = cfg.methods[0]
    out = _out(args, cfg)
    seed = cfg.seeds[0]
    ds = bench.load_dataset(cfg, seed)
    method = bench.make_method(spec, seed)
    basis = method.train(ds.train_fields())
    write_basis(out / f"{spec.label}.ssfb", basis)
    write_tensor(out / f"{spec.label}.mean.dt01", ds.mean_field)
    print(f"wrote {out / (spec.label + '.ssfb')} ({method.coefficient_count(ds.grid.shape)} coefficients per field)")


def _encode(basis, x):
    if isinstance(basis, TuckerBasis):
        return tucker_encode(x, basis)
    m, n, _ = x.shape
    if isinstance(basis, EofBasis):
        return eof_encode(unfold(x, 3), basis).reshape(-1, m, n, order="F")
    if isinstance(basis, KsvdDictionary):
        code = ksvd_encode(unfold(x, 3), basis)
        return code.to_dense().reshape(-1, m, n, order="F")
    w = fourier_eof_encode(x, basis)
    return np.stack([w.real, w.imag])


def _decode(basis, c):
    if isinstance(basis, TuckerBasis):
        return tucker_decode(c, basis)
    if isinstance(basis, FourierEofBasis):
        return fourier_eof_decode(c[0] + 1j * c[1], basis)
    k, m, n = c.shape
    flat = c.reshape(k, m * n, order="F")
    if isinstance(basis, EofBasis):
        cols = eof_decode(flat, basis)
    else:
        cols = ksvd_decode(SparseCode.from_dense(flat, basis.sparsity), basis)
    return fold(cols, 3, (m, n, cols.shape[0]))


def cmd_encode(args):
    basis = read_basis(args.basis)
    x = read_tensor(args.input)
    if args.mean:
        x = x - read_tensor(args.mean)
    out = Path(args.out or "coeffs.dt01")
    write_tensor(out, _encode(basis, x))
    print(f"wrote {out}")


def cmd_decode(args):
    basis = read_basis(args.basis)
    x = _decode(basis, read_tensor(args.input))
    if args.mean:
        x = x + read_tensor(args.mean)
    out = Path(args.out or "field.dt01")
    write_tensor(out, x)
    print(f"wrote {out}")


def cmd_compare(args):
    cfg = _load_config(args)
    report = bench.run_compare(cfg)
    path = report.write(_out(args, cfg), f"{cfg.name}_compare", cfg, cfg.report_timing)
    for seed in cfg.seeds:
        for label in report.methods():
            print(
                f"seed {seed} {label:>12}: train {report.mean_rmse(label, 'train', seed=seed):.4f}"
                f"  test {report.mean_rmse(label, 'test', seed=seed):.4f}"
            )
    print(f"wrote {path}")
    return EXIT_NUMERIC if any(r.failed for r in report.rows) else EXIT_OK


def cmd_sweep(args):
    cfg = _load_config(args)
    res = bench.run_budget_sweep(cfg)
    path = res.report.write(_out(args, cfg), f"{cfg.name}_sweep", cfg, cfg.report_timing)
    th = cfg.sweep["threshold"]
    for seed in cfg.seeds:
        mb = {m: res.minimal_budget(m, th, seed) for m in ("hooi", "eof", "ksvd", "fourier_eof")}
        print(f"seed {seed} minimal budget below {th}: " + ", ".join(f"{k}={v}" for k, v in mb.items()))
    print(f"wrote {path}")


def cmd_multiseason(args):
    cfg = _load_config(args)
    results = bench.run_multiseason(cfg)
    path = results[0].report.write(_out(args, cfg), f"{cfg.name}_multiseason", cfg)
    for seed, res in zip(cfg.seeds, results):
        single = np.mean([res.single_block_mean(b) for b in res.joint])
        print(f"seed {seed}: M-HOOI {res.joint_mean():.4f}  single-block HOOI {single:.4f}")
    print(f"wrote {path}")


def cmd_timing(args):
    cfg = _load_config(args)
    res = bench.run_timing(cfg)
    path = res.report.write(_out(args, cfg), f"{cfg.name}_timing", cfg, include_timing=True)
    for label in res.samples:
        print(
            f"{label:>12}: train {res.median(label, 'train'):.4g}s  encode {res.median(label, 'encode'):.4g}s"
            f"  decode {res.median(label, 'decode'):.4g}s"
        )
    print(f"wrote {path}")


def cmd_verify(args):
    results = checks.run_all(seed=args.seed or 0)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_GATE


def build_parser():
    p = argparse.ArgumentParser(prog="ssfbasis", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, method=True):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, help="override the config seed(s)")
        sp.add_argument("--out", help="output directory")
        if method:
            sp.add_argument("--method", help="comma-separated method labels to keep")
        sp.add_argument("--strict-paper", action="store_true", help="mode-3 update uses the previous sweep's B2")

    common(sub.add_parser("gen", help="write synthetic snapshots as DT01"), method=False)
    common(sub.add_parser("train", help="learn one basis and write it"))
    for name, doc in (("encode", "field -> coefficients"), ("decode", "coefficients -> field")):
        sp = sub.add_parser(name, help=doc)
        sp.add_argument("--basis", required=True)
        sp.add_argument("--input", required=True)
        sp.add_argument("--mean", help="DT01 mean field to subtract (encode) or add back (decode)")
        sp.add_argument("--out")
    common(sub.add_parser("compare", help="equal-budget comparison"))
    common(sub.add_parser("sweep", help="error against coefficient budget"))
    common(sub.add_parser("multiseason", help="single-block HOOI against M-HOOI"))
    common(sub.add_parser("timing", help="median wall time per phase"))
    vp = sub.add_parser("verify", help="run the built-in property checks")
    vp.add_argument("--seed", type=int)
    return p


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "multiseason": cmd_multiseason,
    "timing": cmd_timing,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    warnings.simplefilter("default")
    try:
        code = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"bad input file: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SsfBasisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
