"""sigma-perturbation family on the eps-sine scenario at several resolutions.

Prints the pairwise differences, the gap between sigma = 0 and the smallest
sigma, and how far V_sigma is from depending linearly on sigma (the ratio of
consecutive differences is 1/2 exactly in the linear case).
"""
import argparse

from ucmbl.scenario import eps_sine
from ucmbl.verification import sigma_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grids", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    ap.add_argument("-T", type=float, default=0.5)
    args = ap.parse_args()

    for n in args.grids:
        st = sigma_study(eps_sine(n=n, T=args.T), args.sigmas)
        ratios = [b / a for a, b in zip(st.diffs, st.diffs[1:])]
        print(f"n = {n}: dt = {st.dt:.4g}")
        for (a, b), d in zip(zip(st.sigmas, st.sigmas[1:]), st.diffs):
            print(f"  |V({a:g}) - V({b:g})| = {d:.9e}")
        print(f"  |V(0) - V({st.sigmas[-1]:g})| = {st.zero_diff:.9e}")
        print(f"  consecutive ratios {', '.join(f'{r:.6f}' for r in ratios)}; "
              f"gap / last difference = {st.zero_diff / st.diffs[-1]:.6f}")
        print(f"  monotone {st.monotone}, limit-consistent {st.limit_consistent}")


if __name__ == "__main__":
    main()
