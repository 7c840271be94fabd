"""Equal-budget comparison of all five methods on the default setting.

Runs the same pipeline as ``ssfbasis compare`` for a couple of seeds and
prints one line per method.  Takes under a minute.
"""
from pathlib import Path

from ssfbasis.bench import run_compare
from ssfbasis.config import read_config

cfg = read_config(Path(__file__).resolve().parents[1] / "configs" / "case_I.json")
report = run_compare(cfg, seeds=[0, 1])
for method in report.methods():
    train = report.mean_rmse(method, "train", "rmse_normalized")
    test = report.mean_rmse(method, "test", "rmse_normalized")
    print(f"{method:12s} train {train:.4f}  test {test:.4f}")
