"""One shared Tucker basis for four seasons against per-season bases.

Each single-block HOOI basis is learned from one day of its season; the
M-HOOI basis sees the training days of every season at once.
"""
from pathlib import Path

from ssfbasis.bench import run_multiseason
from ssfbasis.config import read_config

cfg = read_config(Path(__file__).resolve().parents[1] / "configs" / "multiseason.json")
res = run_multiseason(cfg, seeds=[0])[0]
blocks = sorted({b for b, _ in res.matrix})
print("rows: training season, columns: test season (normalized RMSE)")
for tr in blocks:
    print(f"{tr:6d} " + " ".join(f"{res.matrix[(tr, te)]:.3f}" for te in blocks))
print("M-HOOI " + " ".join(f"{res.joint[b]:.3f}" for b in blocks))
best = min(res.single_block_mean(b) for b in blocks)
print(f"best single-block mean {best:.3f}, M-HOOI mean {res.joint_mean():.3f}")
