"""Eigenvalue counts, plunge widths and family sizes for DPSS matrices.

    python3 scripts/dpss_sweep.py --W 0.25 --sizes 64 128 256 512 --out results/dpss
"""
import argparse
from pathlib import Path

from nyquist_lab.counts import run_sweep
from nyquist_lab.timeband import DpssSetup


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--W", type=float, default=0.25)
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--sigma2", type=float, default=0.02)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--out", type=Path, default=Path("results/dpss"))
    a = p.parse_args()
    res = run_sweep(DpssSetup(a.W), a.sizes, 0.5, a.delta, a.epsilon, a.sigma2)
    a.out.mkdir(parents=True, exist_ok=True)
    res.to_csv(a.out / "sweep.csv")
    res.to_json(a.out / "sweep.json")
    print(f"{'N':>5} {'count':>6} {'plunge':>6} {'family':>6} {'size/2NW':>9} {'certificate':>11}")
    for e in res.entries:
        print(
            f"{e.scale:5.0f} {e.count_above:6d} {e.plunge:6d} {e.family_size:6d} "
            f"{e.family_size / (2 * e.scale * a.W):9.4f} {e.certificate:11.2f}"
        )
    print(f"plunge ~ {res.fitted_intercept:.3f} + {res.fitted_log_coefficient:.3f} log N "
          f"(relative residual {res.fit_relative_residual:.3f})")
    print("checks:", res.checks)


if __name__ == "__main__":
    main()
