"""det F and Eulerian residuals of the eps-sine scenario under refinement."""
import argparse

import numpy as np

from ucmbl.diagnostics import eulerian_residual
from ucmbl.hyperbolic import prepare
from ucmbl.reconstruction import reconstruct_series
from ucmbl.scenario import eps_sine


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grids", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("-T", type=float, default=0.5)
    args = ap.parse_args()

    print(f"{'n':>5} {'max|detF-1|':>12} {'momentum':>11} {'divergence':>11} {'wall rows share':>16}")
    for n in args.grids:
        sc = eps_sine(eps=args.eps, n=n, T=args.T)
        pr = prepare(sc)
        last = pr.nsteps
        res = pr.integrate(keep=(last - 2, last - 1, last))
        recons = reconstruct_series(res, [last - 2, last - 1, last])
        r = eulerian_residual(recons, sc.pressure(), sc.grid, res.dt)
        m = r["momentum_field"]
        share = np.sum(m[:, :2] ** 2) / np.sum(m**2)
        det = np.max(np.abs(recons[-1].detF - 1))
        print(f"{n:>5} {det:>12.3e} {r['momentum']:>11.3e} {r['divergence']:>11.3e} {share:>16.2f}")


if __name__ == "__main__":
    main()
