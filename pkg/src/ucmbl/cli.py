"""Command-line entry points: ``run``, ``convergence``, ``sigma`` and ``verify``.

Exit status: 0 success, 1 verification failures, 2 invalid configuration,
3 runtime error.
"""
import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import scenario as presets
from .config import RunConfig, read_config
from .diagnostics import Monitor, RecoveryCoefficients
from .errors import InsufficientSnapshots, ParseError, UCMError, ValidationError
from .hyperbolic import assemble_coefficients, prepare
from .psd import is_psd, psd_sqrt
from .reconstruction import (
    deformation_gradient,
    recover_stress,
    recover_velocities,
    recover_x,
    recover_y,
)
from .verification import (
    convergence_study,
    linear_case,
    potential_case,
    sigma_study,
    sine_layer_case,
    zero_case,
)

SNAPSHOT_HEADER = "xi1,xi2,U,V,W,xbar,x,y,u,v,S11,S12,S22"
DIAGNOSTIC_FIELDS = ["step", "t", "E0", "Et", "E1", "E2rec", "wall_flux", "detF_err", "gronwall_ok", "normal_res"]
CASES = {"potential": potential_case, "sine_layer": sine_layer_case, "linear": linear_case, "zero": zero_case}

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3

# tolerances of the verify command
WALL_FLUX_TOL = 1e-12
SQRT_TOL = 1e-12
DETF_COEF = 1.0     # |det F - 1| <= DETF_COEF * h2^2: the reconstruction is second order


def _fmt(x):
    return "%.17g" % x


# --- run --------------------------------------------------------------------

def _stored_steps(nsteps, stride):
    if stride and stride > 0:
        steps = list(range(0, nsteps + 1, stride))
        if steps[-1] != nsteps:
            steps.append(nsteps)
        return steps
    return [0, nsteps] if nsteps > 0 else [0]


def _stencil(n, nsteps):
    """Three consecutive steps around n and the slot of n among them."""
    if nsteps < 2:
        return None, None
    if n == 0:
        return (0, 1, 2), 0
    if n == nsteps:
        return (n - 2, n - 1, n), 2
    return (n - 1, n, n + 1), 1


class _MapProbe:
    """Reconstructs x and y at selected steps while the solver runs."""

    def __init__(self, prepared, wanted):
        self.p = prepared
        self.wanted = set(wanted)
        self.maps = {}
        self.detF = {}

    def __call__(self, rec):
        if rec.n not in self.wanted:
            return
        grid = self.p.scenario.grid
        Y, _ = self.p.problem.Y(rec.n)
        x = recover_x(rec.xbar, Y, self.p.farfield.X[rec.n], grid)
        y = recover_y(x, grid)
        self.maps[rec.n] = (x, y)
        F = deformation_gradient(x, y, grid)
        det = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
        self.detF[rec.n] = float(np.max(np.abs(det - 1.0)))


def simulate(scenario, stride=None):
    """Run a scenario with diagnostics and map reconstruction at stored steps.

    Returns (result, report, probe, stored) where ``stored`` lists the steps
    that get a snapshot file. Their neighbours are reconstructed too so the
    velocities can be differenced in time.
    """
    prepared = prepare(scenario)
    stride = scenario.numerics.snapshot_stride if stride is None else stride
    stored = _stored_steps(prepared.nsteps, stride)
    wanted = set()
    for n in stored:
        steps, _ = _stencil(n, prepared.nsteps)
        wanted.update(steps or (n,))
    probe = _MapProbe(prepared, wanted)
    monitor = Monitor(prepared.coeffs, prepared.dt, detF=lambda n: probe.detF.get(n))
    result = prepared.integrate(hooks=(probe, monitor), keep=wanted)
    report = monitor.finish()
    return result, report, probe, stored


def write_snapshot(path, result, probe, n):
    grid = result.grid
    state = result.snapshots[n]
    x, y = probe.maps[n]
    steps, slot = _stencil(n, result.nsteps)
    if steps is not None and all(k in probe.maps for k in steps):
        try:
            u, v = recover_velocities([probe.maps[k][0] for k in steps], [probe.maps[k][1] for k in steps], result.dt)
            u, v = u[slot], v[slot]
        except InsufficientSnapshots:
            u = v = np.full(grid.shape, np.nan)
    else:
        u = v = np.full(grid.shape, np.nan)
    F = deformation_gradient(x, y, grid)
    S = recover_stress(F, result.problem.C)
    x1, x2 = grid.mesh
    cols = [x1, x2, state.V[0], state.V[1], state.V[2], state.xbar, x, y, u, v,
            np.broadcast_to(S.a11, grid.shape), np.broadcast_to(S.a12, grid.shape), np.broadcast_to(S.a22, grid.shape)]
    # xi2-outer ordering: transpose (n1, n2) -> (n2, n1) before flattening
    table = np.column_stack([np.asarray(c, float).T.ravel() for c in cols])
    np.savetxt(path, table, delimiter=",", header=SNAPSHOT_HEADER, comments="", fmt="%.17g")


def write_diagnostics(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSTIC_FIELDS)
        for row in report.rows():
            w.writerow([row["step"], *(_fmt(row[k]) for k in DIAGNOSTIC_FIELDS[1:8]),
                        int(row["gronwall_ok"]), _fmt(row["normal_res"])])


def cmd_run(cfg: RunConfig, out: Path, stride=None):
    result, report, probe, stored = simulate(cfg.scenario, stride)
    out.mkdir(parents=True, exist_ok=True)
    for n in stored:
        if n in result.snapshots:
            write_snapshot(out / f"snap_{n:06d}.csv", result, probe, n)
    write_diagnostics(out / "diagnostics.csv", report)
    if result.error is not None:
        raise result.error
    ok = bool(np.all(report.gronwall_ok))
    print(f"run {cfg.scenario.name}: {result.nsteps} steps to t = {result.final.t:.6g}, "
          f"{len(stored)} snapshots, gronwall {'ok' if ok else 'VIOLATED'}")
    return EXIT_OK


# --- studies ----------------------------------------------------------------

def cmd_convergence(cfg: RunConfig, out: Path):
    spec = cfg.convergence
    rec = convergence_study(CASES[spec.case](), list(spec.grids), cfl=spec.cfl, T=spec.T)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "h", "error", "pre_asymptotic"])
        for row in rec.rows():
            w.writerow([row["n"], _fmt(row["h"]), _fmt(row["error"]), int(row["pre_asymptotic"])])
    order = "n/a (round-off)" if rec.order is None else f"{rec.order:.3f}"
    print(f"convergence {rec.case}: grids {rec.sizes}, order {order}, {rec.seconds:.1f} s")
    return EXIT_OK


def cmd_sigma(cfg: RunConfig, out: Path):
    st = sigma_study(cfg.scenario, cfg.sigmas)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sigma.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sigma_a", "sigma_b", "difference"])
        for a, b, d in zip(st.sigmas, st.sigmas[1:], st.diffs):
            w.writerow([_fmt(a), _fmt(b), _fmt(d)])
        w.writerow([_fmt(st.sigmas[-1]), _fmt(0.0), _fmt(st.zero_diff)])
    print(f"sigma study: differences {['%.4g' % d for d in st.diffs]}, sigma->0 gap {st.zero_diff:.4g}; "
          f"monotone {st.monotone}, limit-consistent {st.limit_consistent}")
    return EXIT_OK


# --- verify -----------------------------------------------------------------

def verify_scenario(scenario):
    """Invariant checks on one scenario; returns a list of (name, ok, detail)."""
    checks = []
    grid = scenario.grid
    C = scenario.C_field()
    A = psd_sqrt(C)
    err = float(np.max(np.abs(A @ A - C.as_matrix())))
    checks.append(("sqrt(C)^2 = C", err <= SQRT_TOL, f"max error {err:.3g}"))
    checks.append(("sqrt(C) is PSD", bool(np.all(is_psd(A))), ""))
    coeffs = assemble_coefficients(C, grid, c22_min=scenario.numerics.C0)
    rc = RecoveryCoefficients(coeffs)
    det_err = float(np.max(np.abs(rc.det - coeffs.lam**2)))
    checks.append(("recovery determinant = lambda^2", det_err <= 1e-12, f"max error {det_err:.3g}"))

    result, report, probe, _ = simulate(scenario.with_numerics(snapshot_stride=0))
    checks.append(("integration reached T", result.error is None, f"t = {result.final.t:.6g}"))
    wf = float(np.max(np.abs(report.wall_flux)))
    checks.append(("wall flux vanishes", wf <= WALL_FLUX_TOL, f"max {wf:.3g}"))
    wall_u = max(float(np.max(np.abs(s.V[0][:, 0]))) for s in result.snapshots.values())
    checks.append(("U = 0 on the wall", wall_u == 0.0, f"max {wall_u:.3g}"))
    for key in ("E0", "Et", "E1"):
        flags = report.flags.get(key)
        ok = flags is not None and bool(np.all(flags))
        checks.append((f"Gronwall bound {key}", ok, ""))
    detf = max(probe.detF.values()) if probe.detF else float("nan")
    tol = DETF_COEF * grid.h2**2
    checks.append(("det F = 1 to second order", detf <= tol, f"max |det F - 1| {detf:.3g}, tolerance {tol:.3g}"))
    wall_x = max(float(np.max(np.abs(x[:, 0] - grid.xi1))) for x, _ in probe.maps.values())
    checks.append(("x = xi1 on the wall", wall_x <= 1e-13, f"max {wall_x:.3g}"))
    return checks


def cmd_verify(target, out: Path):
    scenarios = presets.suite() if target is None else [target.scenario]
    lines = []
    failed = 0
    for sc in scenarios:
        for name, ok, detail in verify_scenario(sc):
            failed += not ok
            lines.append(f"{'PASS' if ok else 'FAIL'}  {sc.name}: {name}" + (f" ({detail})" if detail else ""))
    lines.append(f"{len(lines) - failed}/{len(lines)} checks passed")
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if failed == 0 else EXIT_FAILED


# --- entry point ------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ucmbl", description="Lagrangian boundary-layer solver for the UCM fluid.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "integrate a scenario, writing snapshots and diagnostics.csv"),
        ("convergence", "manufactured-solution convergence study"),
        ("sigma", "sigma-perturbation limit study"),
        ("verify", "invariant checks; pass 'suite' instead of a file for the built-in scenarios"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", help="scenario config file")
        s.add_argument("--out", default="out", help="output directory (default: out)")
        s.add_argument("--snapshots", type=int, default=None, metavar="STRIDE",
                       help="store every STRIDE-th step (0: first and last only)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "verify" and args.config == "suite":
            cfg = None
        else:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                print(f"cannot read config: {exc}", file=sys.stderr)
                return EXIT_INVALID
            cfg = read_config(text)
        if args.snapshots is not None and args.snapshots < 0:
            raise ValidationError(f"--snapshots must be >= 0, got {args.snapshots}")
        if args.command == "run":
            return cmd_run(cfg, out, args.snapshots)
        if args.command == "convergence":
            return cmd_convergence(cfg, out)
        if args.command == "sigma":
            return cmd_sigma(cfg, out)
        return cmd_verify(cfg, out)
    except (ParseError, ValidationError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except UCMError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # anything else is still a runtime failure, not a crash
        print(f"unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
