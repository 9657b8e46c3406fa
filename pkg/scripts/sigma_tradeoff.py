"""Family size as a function of sigma^2 at fixed epsilon.

A smaller sigma^2 raises gamma (so each block gains a larger share (n+1)/n)
but also raises the eigenvalue threshold 1 - sigma, leaving fewer source
eigenvectors.  This script tabulates the trade-off on a DPSS matrix.

    python3 scripts/sigma_tradeoff.py --N 256 --epsilon 0.2
"""
import argparse

import numpy as np

from nyquist_lab.family import construct_family, select_parameters
from nyquist_lab.spectral import eigendecompose
from nyquist_lab.timeband import build_dpss


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, default=256)
    p.add_argument("--W", type=float, default=0.25)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--points", type=int, default=12)
    a = p.parse_args()
    op = build_dpss(a.N, a.W)
    spec = eigendecompose(op)
    ref = 2 * a.N * a.W
    print(f"{'sigma2':>9} {'gamma':>7} {'n':>3} {'#F':>4} {'size':>5} {'size/2NW':>9}")
    for frac in np.geomspace(0.005, 0.95, a.points):
        params = select_parameters(a.epsilon, a.epsilon * frac)
        fam = construct_family(spec, op, params)
        print(
            f"{params.sigma2:9.5f} {params.gamma:7.4f} {params.n:3d} {fam.source_count:4d} "
            f"{fam.size:5d} {fam.size / ref:9.4f}"
        )


if __name__ == "__main__":
    main()
