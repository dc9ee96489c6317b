"""Acceptance criteria 1-12 at their pinned tolerances.

Each test records one PASS/FAIL line (see the "acceptance criteria" section
of the pytest terminal summary) before asserting.
"""
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import random_psd, record_criterion
from ucmbl.cli import main, simulate
from ucmbl.diagnostics import Monitor, RecoveryCoefficients, eulerian_residual
from ucmbl.grid import Grid, l2_norm
from ucmbl.hyperbolic import assemble_coefficients, cfl_dt, prepare, run, uniform_steps
from ucmbl.profiles import ProfileSpec
from ucmbl.psd import is_psd, psd_sqrt
from ucmbl.reconstruction import reconstruct, reconstruct_series
from ucmbl.scenario import eps_sine, rest, suite
from ucmbl.verification import burst_energy_decay, convergence_study, potential_case, run_case, sigma_study

REFINE = (64, 128, 256)


def max_detF_error(res, n):
    return float(np.max(np.abs(reconstruct(res, n).detF - 1.0)))


# 1 -------------------------------------------------------------------------

def test_criterion_01_rest_state_fixed_point():
    worst_v, worst_det = 0.0, 0.0
    for C, c11 in ((ProfileSpec("identity"), 1.0), (ProfileSpec("constant", {"c11": 2.0, "c12": 0.5, "c22": 1.0}), 2.0)):
        sc = replace(rest(n=64, T=1.0, C=C), C11_inf=ProfileSpec("constant", {"value": c11}))
        res = run(sc.with_numerics(snapshot_stride=25))
        worst_v = max(worst_v, max(float(np.max(np.abs(s.V))) for s in res.snapshots.values()))
        worst_det = max(worst_det, max(max_detF_error(res, n) for n in res.times()))
    ok = worst_v <= 1e-12 and worst_det <= 1e-12
    record_criterion(1, ok, f"rest to t = 1 at 64^2: max|V| = {worst_v:.3g}, max|det F - 1| = {worst_det:.3g} (<= 1e-12)")
    assert ok


# 2 -------------------------------------------------------------------------

def eig_sqrt(C):
    w, Q = np.linalg.eigh(C.as_matrix())
    return (Q * np.sqrt(np.clip(w, 0, None))[..., None, :]) @ np.swapaxes(Q, -1, -2)


def test_criterion_02_psd_sqrt_suite():
    C = random_psd(np.random.default_rng(2), 10_000)
    A = psd_sqrt(C)
    square = float(np.max(np.abs(A @ A - C.as_matrix())))
    psd = bool(np.all(is_psd(A)))
    oracle = float(np.max(np.abs(A.as_matrix() - eig_sqrt(C))))
    ok = square <= 1e-12 and psd and oracle <= 1e-12
    record_criterion(2, ok, f"1e4 tensors: |A^2 - C| = {square:.3g}, PSD {psd}, |A - eig oracle| = {oracle:.3g} (<= 1e-12)")
    assert ok


# 3 -------------------------------------------------------------------------

def test_criterion_03_mms_convergence():
    start = time.perf_counter()
    rec = convergence_study(potential_case(), list(REFINE), cfl=0.5, T=0.5)
    seconds = time.perf_counter() - start
    ok = rec.order is not None and 1.7 <= rec.order <= 2.3 and seconds <= 60
    errs = ", ".join(f"{e:.3g}" for e in rec.errors)
    record_criterion(3, ok, f"potential case errors [{errs}], order {rec.order:.3f} in [1.7, 2.3], {seconds:.1f} s (<= 60)")
    assert ok


# 4, 5 ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def suite_reports():
    out = {}
    for sc in suite(n=64, T=0.5):
        result, report, _, _ = simulate(sc, stride=0)
        assert result.error is None
        out[sc.name] = report
    return out


def test_criterion_04_wall_flux(suite_reports):
    worst = max(float(np.max(np.abs(r.wall_flux))) for r in suite_reports.values())
    steps = sum(len(r.step) for r in suite_reports.values())
    ok = worst <= 1e-12
    record_criterion(4, ok, f"max |wall flux| = {worst:.3g} over {steps} accepted steps of {len(suite_reports)} scenarios (<= 1e-12)")
    assert ok


def test_criterion_05_gronwall(suite_reports):
    failing = [f"{name}:{k}" for name, r in suite_reports.items() for k in ("E0", "Et", "E1") if not np.all(r.flags[k])]
    ratios = []
    for r in suite_reports.values():
        for k in ("E0", "Et", "E1"):
            e = np.asarray(getattr(r, k))
            live = (e > 0) & (np.asarray(r.t) > 0)     # at t = 0 the bound equals the value
            if np.any(live):
                ratios.append(float(np.min(r.bounds[k][live] / e[live])))
    margin = min(ratios)
    ok = not failing
    record_criterion(5, ok, f"E0, Et, E1 bounds (K = spectral norm + 1, 5% slack) on the suite, t in [0, 0.5]; "
                            f"smallest bound/value ratio for t > 0: {margin:.3g}; failing {failing or 'none'}")
    assert ok


# 6 -------------------------------------------------------------------------

def test_criterion_06_constant_coefficient_energy():
    runs = {n: burst_energy_decay(Grid(n, n + 1)) for n in REFINE}
    mono = all(d.non_increasing for d in runs.values())
    rates = [runs[n].decay_rate for n in REFINE]
    ratios = [b / a for a, b in zip(rates, rates[1:])]
    ok = mono and rates[1] <= 1e-2 and all(r <= 0.5 for r in ratios)
    record_criterion(6, ok, f"E0 non-increasing after switch-off: {mono}; decay per unit time "
                            f"{', '.join(f'{r:.3g}' for r in rates)} at {REFINE}; 128^2 <= 1e-2, "
                            f"refinement ratios {', '.join(f'{r:.3g}' for r in ratios)} (<= 0.5)")
    assert ok


# 7 -------------------------------------------------------------------------

def recovery_residual(n):
    case, grid = potential_case(), Grid(n, n + 1)
    coeffs = assemble_coefficients(case.C_field(grid), grid)
    dt, _ = uniform_steps(0.5, cfl_dt(coeffs, grid, 0.5))
    mon = Monitor(coeffs, dt)
    run_case(case, grid, cfl=0.5, T=0.5, hooks=(mon,), keep=lambda k: False)
    rep = mon.finish()
    det_err = float(np.max(np.abs(RecoveryCoefficients(coeffs).det - coeffs.lam**2)))
    return float(np.nanmax(rep.normal_res)), det_err


def test_criterion_07_normal_derivative_recovery():
    res = [recovery_residual(n) for n in REFINE]
    resid = [r[0] for r in res]
    det = max(r[1] for r in res)
    ratios = [b / a for a, b in zip(resid, resid[1:])]
    ok = all(0.35 <= r <= 0.65 for r in ratios) and det <= 1e-12
    record_criterion(7, ok, f"max recovery residual {', '.join(f'{r:.3g}' for r in resid)} at {REFINE}; "
                            f"ratios {', '.join(f'{r:.3f}' for r in ratios)} in [0.35, 0.65]; "
                            f"|det - lambda^2| = {det:.3g} (<= 1e-12)")
    assert ok


# 8, 9 ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def eps_sine_runs():
    out = {}
    for n in REFINE:
        sc = eps_sine(eps=0.01, n=n, T=0.5)
        pr = prepare(sc)
        last = pr.nsteps
        res = pr.integrate(keep=(last - 2, last - 1, last))
        out[n] = (sc, res, reconstruct_series(res, [last - 2, last - 1, last]))
    return out


def test_criterion_08_incompressibility(eps_sine_runs):
    errs = [float(np.max(np.abs(eps_sine_runs[n][2][-1].detF - 1.0))) for n in REFINE]
    orders = [float(np.log2(a / b)) for a, b in zip(errs, errs[1:])]
    ok = errs[1] <= 1e-3 and orders[-1] >= 1.7
    record_criterion(8, ok, f"eps-sine t = 0.5 max|det F - 1| {', '.join(f'{e:.3g}' for e in errs)} at {REFINE}; "
                            f"128^2 <= 1e-3, observed orders {', '.join(f'{o:.2f}' for o in orders)} (last >= 1.7)")
    assert ok


def test_criterion_09_eulerian_residual(eps_sine_runs):
    mom, div = [], []
    for n in REFINE:
        sc, res, recons = eps_sine_runs[n]
        r = eulerian_residual(recons, sc.pressure(), sc.grid, res.dt)
        mom.append(r["momentum"])
        div.append(r["divergence"])
    ok = all(b < a for a, b in zip(mom, mom[1:])) and all(b < a for a, b in zip(div, div[1:]))
    record_criterion(9, ok, f"momentum {', '.join(f'{m:.3g}' for m in mom)}, divergence "
                            f"{', '.join(f'{d:.3g}' for d in div)} at {REFINE} (strictly decreasing)")
    assert ok


# 10 ------------------------------------------------------------------------

def test_criterion_10_sigma_limit():
    st = sigma_study(eps_sine(eps=0.01, n=64, T=0.5), [0.2, 0.1, 0.05, 0.025])
    ok = st.monotone and st.limit_consistent
    record_criterion(10, ok, f"pairwise differences {', '.join(f'{d:.6g}' for d in st.diffs)} "
                             f"(decreasing: {st.monotone}); |V_0 - V_0.025| = {st.zero_diff:.6g} "
                             f"< last pairwise: {st.limit_consistent}")
    assert ok


# 11 ------------------------------------------------------------------------

def test_criterion_11_truncation_insensitivity():
    base = eps_sine(eps=0.01, T=0.5)
    short = replace(base, grid=Grid(64, 65, 8.0))
    tall = replace(base, grid=Grid(64, 129, 16.0))
    dt = min(prepare(s).dt for s in (short, tall))
    a, b = run(short, dt=dt).final.V, run(tall, dt=dt).final.V
    g = Grid(64, 33, 4.0)          # xi2 <= 4 with the same spacing
    diff = l2_norm(a[:, :, :33] - b[:, :, :33], g) / l2_norm(b[:, :, :33], g)
    ok = diff <= 0.01
    record_criterion(11, ok, f"relative L2 change on xi2 <= 4 from L = 8 to 16: {diff:.3g} (<= 1e-2)")
    assert ok


# 12 ------------------------------------------------------------------------

def test_criterion_12_determinism(tmp_path):
    from ucmbl.config import serialize_config

    cfg = tmp_path / "eps_sine.cfg"
    cfg.write_text(serialize_config(eps_sine(eps=0.01, n=64, T=0.5)))
    for name in ("first", "second"):
        assert main(["run", str(cfg), "--out", str(tmp_path / name), "--snapshots", "10"]) == 0
    files = sorted(p.name for p in (tmp_path / "first").glob("snap_*.csv"))
    same = all((tmp_path / "first" / f).read_bytes() == (tmp_path / "second" / f).read_bytes() for f in files)
    same = same and files == sorted(p.name for p in (tmp_path / "second").glob("snap_*.csv"))
    ok = same and len(files) > 2
    record_criterion(12, ok, f"{len(files)} snapshot files bit-identical across two runs: {same}")
    assert ok
