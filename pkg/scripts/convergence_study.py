"""Grid-convergence tables for the manufactured cases."""
import argparse

from ucmbl.verification import convergence_study, linear_case, potential_case, sine_layer_case

CASES = {"potential": potential_case, "sine_layer": sine_layer_case, "linear": linear_case}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--case", choices=sorted(CASES), default="potential")
    ap.add_argument("--grids", type=int, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--cfl", type=float, default=0.5)
    ap.add_argument("-T", type=float, default=0.5)
    args = ap.parse_args()

    rec = convergence_study(CASES[args.case](), args.grids, cfl=args.cfl, T=args.T)
    print(f"{'n':>6} {'h2':>10} {'L2 error':>12} {'order':>7}")
    orders = [None] + rec.pairwise_orders()
    for row, p in zip(rec.rows(), orders):
        mark = "  (pre-asymptotic)" if row["pre_asymptotic"] else ""
        print(f"{row['n']:>6} {row['h']:>10.4g} {row['error']:>12.4e} {'' if p is None else f'{p:7.3f}'}{mark}")
    fit = "skipped (round-off)" if rec.order is None else f"{rec.order:.3f}"
    print(f"fitted order {fit}; {rec.seconds:.1f} s")


if __name__ == "__main__":
    main()
