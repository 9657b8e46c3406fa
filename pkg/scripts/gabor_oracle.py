"""Assembled Gabor disk operator against the Hermite quadrature oracle.

Prints the top eigenvalue errors and the trace error for a sequence of
grid steps, which shows how the error tracks the node-count area error.

    python3 scripts/gabor_oracle.py --radius 2 --cells 32 64 96 128
"""
import argparse
import math

import numpy as np

from nyquist_lab.gabor import build_gabor_operator, hermite_oracle
from nyquist_lab.setgeom import Grid, SetSpec
from nyquist_lab.spectral import eigendecompose


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--extent", type=float, default=6.0)
    p.add_argument("--cells", type=int, nargs="+", default=[32, 64, 96, 128])
    p.add_argument("--top", type=int, default=10)
    a = p.parse_args()
    disk = SetSpec.disk(a.radius)
    oracle = np.array([hermite_oracle(k, disk) for k in range(a.top)])
    area = math.pi * a.radius**2
    print("oracle:", " ".join(f"{x:.6f}" for x in oracle))
    print(f"{'h':>9} {'nodes':>6} {'trace rel err':>13} {'max top err':>11}  per-k errors")
    for n in a.cells:
        h = 2 * a.extent / n
        op = build_gabor_operator(disk, Grid.uniform(a.extent, h, 2))
        lam = eigendecompose(op).eigenvalues[: a.top]
        err = np.abs(lam - oracle)
        print(
            f"{h:9.5f} {len(op.set_indices):6d} {(op.numeric_trace - area) / area:13.2e} "
            f"{err.max():11.2e}  " + " ".join(f"{x:.1e}" for x in err)
        )


if __name__ == "__main__":
    main()
