"""Generate the synthetic JOBS II style dataset shipped in crates/core/data.

The real microdata is not redistributable. This script builds a
deterministic stand-in whose cell counts, standardized means, standard
deviations and control-arm skewness match the published summary table.
Values are quantile-based, so no random numbers are involved.
"""
import sys

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

RAW_LOC, RAW_SCALE = 2.1, 0.62
CELLS = [  # (z, d, n, standardized mean, sd)
    (1, 1, 153, -0.1615, 1.0325),
    (1, 0, 125, 0.05, 0.95872),
    (0, 0, 132, 0.139845, 0.984),
]
CONTROL_K3 = 0.17
CONTROL_TAIL = 1.5


def quantiles(n):
    return norm.ppf((np.arange(n) + 0.5) / n)


def k3(y):
    n = len(y)
    d = y - y.mean()
    return n * (d**3).sum() / ((n - 1) * (n - 2))


def standardize(x, mean, sd):
    return mean + sd * (x - x.mean()) / x.std(ddof=1)


def sinh_arcsinh(z, eps, delta):
    return np.sinh((np.arcsinh(z) + eps) / delta)


def control(n, mean, sd):
    z = quantiles(n)
    f = lambda e: k3(standardize(sinh_arcsinh(z, e, CONTROL_TAIL), mean, sd)) - CONTROL_K3
    eps = brentq(f, 0.0, 3.0)
    return standardize(sinh_arcsinh(z, eps, CONTROL_TAIL), mean, sd)


def main(out):
    rows = []
    for z, d, n, mean, sd in CELLS:
        y = control(n, mean, sd) if z == 0 else standardize(quantiles(n), mean, sd)
        rows += [(z, d, RAW_LOC + RAW_SCALE * v) for v in y]
    with open(out, "w") as f:
        f.write("# synthetic data calibrated to published JOBS II cell summaries; not the study microdata\n")
        f.write("z,d,y\n")
        for z, d, y in rows:
            f.write(f"{z},{d},{y:.6f}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/jobs2_synthetic.csv")
