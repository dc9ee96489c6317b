"""Energy after a switched-off forcing burst with constant C, under refinement."""
import argparse

import numpy as np

from ucmbl.grid import Grid
from ucmbl.verification import burst_energy_decay


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grids", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--t-off", type=float, default=0.1)
    ap.add_argument("-T", type=float, default=0.5)
    args = ap.parse_args()

    prev = None
    for n in args.grids:
        d = burst_energy_decay(Grid(n, n + 1), t_off=args.t_off, T=args.T)
        e = d.E0[d.after]
        ratio = "" if prev is None else f"  ratio {d.decay_rate / prev:.3f}"
        print(f"n = {n:4d}: E0(t_off) = {e[0]:.6e}, E0(T) = {e[-1]:.6e}, "
              f"non-increasing {d.non_increasing}, decay per unit time {d.decay_rate:.3e}{ratio}")
        print(f"          largest single-step change after t_off {np.max(np.diff(e)):.2e}")
        prev = d.decay_rate


if __name__ == "__main__":
    main()
