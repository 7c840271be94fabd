"""Learn a Tucker basis and an EOF basis from one day, test on the rest.

Run with ``python3 demos/tucker_vs_eof.py``.  Prints the per-method
coefficient count and the mean normalized RMSE over the test days.
"""
import numpy as np

from ssfbasis import build_dataset, hooi, learn_eof, tucker_decode, tucker_encode, unfold, fold
from ssfbasis.classical import eof_decode, eof_encode


def rmse(a, b):
    return np.linalg.norm(a - b) / np.sqrt(a.size)


ds = build_dataset(seed=0)
train = ds.perturbation(1)
m, n, i = train.shape
print(f"grid {m} x {n} x {i}, training on day 1, testing on {len(ds.test_days)} days")

# Tucker: three factor matrices, one small core per snapshot
_, basis = hooi(train, (8, 8, 10))
print(f"HOOI rank (8, 8, 10): {8 * 8 * 10} coefficients per field, "
      f"{len(basis.fit_trace)} fit-trace entries")

# EOF: vertical modes only, one coefficient per mode per water column
eof = learn_eof(unfold(train, 3), 2)
print(f"EOF K=2: {2 * m * n} coefficients per field")

errs = {"hooi": [], "eof": []}
for x in ds.test_fields():
    errs["hooi"].append(rmse(x, tucker_decode(tucker_encode(x, basis), basis)))
    x3 = eof_decode(eof_encode(unfold(x, 3), eof), eof)
    errs["eof"].append(rmse(x, fold(x3, 3, x.shape)))

for k, v in errs.items():
    print(f"{k:5s} mean test RMSE {np.mean(v):.4f} m/s")
