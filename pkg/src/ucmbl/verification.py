"""Manufactured solutions, grid-convergence studies and the sigma-limit study.

A manufactured case supplies V*(xi1, xi2, t) with its exact partial
derivatives. The source that makes V* an exact solution of the forced system
is built from the *grid* coefficient fields, so the measured error is the
scheme's alone.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .grid import Grid, l2_norm
from .hyperbolic import (
    HyperbolicSolver,
    apply_sigma_perturbation,
    assemble_coefficients,
    cfl_dt,
    run,
    uniform_steps,
)
from .psd import SymTensor2

TWO_PI = 2.0 * np.pi
PRE_ASYMPTOTIC_N = 16       # grids coarser than this are reported but not fitted
ROUNDOFF = 1e-11            # max error below which no order is fitted


@dataclass(frozen=True)
class ManufacturedCase:
    """Closed-form V* and its derivatives plus the coefficient field.

    ``fields(xi1, xi2, t)`` returns (V, V_t, V_xi1, V_xi2), each stacked on a
    leading axis of length 3. ``C(xi1, xi2)`` returns the SymTensor2 field.
    """

    name: str
    fields: Callable
    C: Callable

    def exact(self, grid: Grid, t):
        x1, x2 = grid.mesh
        return self.fields(x1, x2, t)[0]

    def C_field(self, grid: Grid) -> SymTensor2:
        return self.C(*grid.mesh)

    def check(self, grid: Grid, t=0.37, tol=1e-12):
        """The case invariants: V*(0) = 0, U* = 0 on the wall, periodic in xi1."""
        x1, x2 = grid.mesh
        start = self.fields(x1, x2, 0.0)[0]
        wall = self.fields(x1, x2, t)[0][0, :, 0]
        shifted = self.fields(x1 + 1.0, x2, t)[0]
        now = self.fields(x1, x2, t)[0]
        return {
            "zero_start": float(np.max(np.abs(start))) <= tol,
            "wall": float(np.max(np.abs(wall))) <= tol,
            "periodic": float(np.max(np.abs(shifted - now))) <= 1e-9,
        }


def _identity(x1, x2):
    one = np.ones(np.broadcast(x1, x2).shape)
    return SymTensor2(one, 0.0 * one, one)


def zero_case() -> ManufacturedCase:
    def fields(x1, x2, t):
        z = np.zeros((3,) + np.broadcast(x1, x2).shape)
        return z, z, z, z

    return ManufacturedCase("zero", fields, _identity)


def sine_layer_case(k=1) -> ManufacturedCase:
    """V* = (t sin(2 pi k xi1) s(xi2), 0, 0) with s = xi2 exp(-xi2^2), C = I."""
    w = TWO_PI * k

    def fields(x1, x2, t):
        sn, cs = np.sin(w * x1), np.cos(w * x1)
        e = np.exp(-x2 * x2)
        s, ds = x2 * e, (1.0 - 2.0 * x2 * x2) * e
        z = np.zeros_like(sn * s)
        V = np.stack([t * sn * s, z, z])
        Vt = np.stack([sn * s, z, z])
        V1 = np.stack([t * w * cs * s, z, z])
        V2 = np.stack([t * sn * ds, z, z])
        return V, Vt, V1, V2

    return ManufacturedCase(f"sine_layer_k{k}", fields, _identity)


def linear_case(slopes=(1.0, 0.5, -0.25)) -> ManufacturedCase:
    """V* = t xi2 (c1, c2, c3), C = I: reproduced exactly by the scheme."""
    c = np.asarray(slopes, float)[:, None, None]

    def fields(x1, x2, t):
        x2 = np.broadcast_to(x2, np.broadcast(x1, x2).shape)
        V = t * c * x2
        Vt = c * x2
        V1 = np.zeros_like(V)
        V2 = t * c * np.ones_like(x2)
        return V, Vt, V1, V2

    return ManufacturedCase("linear", fields, _identity)


def potential_case(omega=2.0, amp=0.2) -> ManufacturedCase:
    """V* from a potential, V* = (tau' phi, tau A grad phi), with a varying A.

    xbar* = tau(t) phi(xi) with tau = 1 - cos(omega t) and
    phi = (1 + sin(2 pi xi1) / 2) xi2 exp(-xi2^2 / 2). The square root A is
    prescribed in closed form and C = A^2, so V* also satisfies the
    constraint (V, W) = A grad xbar and the normal-derivative recovery
    identities hold for it.
    """

    def a_parts(x1, x2):
        sn, cs = np.sin(TWO_PI * x1), np.cos(TWO_PI * x1)
        e = np.exp(-x2 * x2)
        de = -2.0 * x2 * e
        # (value, d/dxi1, d/dxi2) for each entry of A
        a11 = (1.5 + amp * sn * e, amp * TWO_PI * cs * e, amp * sn * de)
        a12 = (amp * cs * e, -amp * TWO_PI * sn * e, amp * cs * de)
        a22 = (1.0 + 0.5 * amp * sn * e, 0.5 * amp * TWO_PI * cs * e, 0.5 * amp * sn * de)
        return a11, a12, a22

    def C(x1, x2):
        (a11, _, _), (a12, _, _), (a22, _, _) = a_parts(x1, x2)
        return SymTensor2(a11 * a11 + a12 * a12, a12 * (a11 + a22), a12 * a12 + a22 * a22)

    def fields(x1, x2, t):
        tau, tau_t, tau_tt = 1.0 - np.cos(omega * t), omega * np.sin(omega * t), omega**2 * np.cos(omega * t)
        sn, cs = np.sin(TWO_PI * x1), np.cos(TWO_PI * x1)
        m, m1, m11 = 1.0 + 0.5 * sn, 0.5 * TWO_PI * cs, -0.5 * TWO_PI**2 * sn
        q = np.exp(-0.5 * x2 * x2)
        p, p2, p22 = x2 * q, (1.0 - x2 * x2) * q, (x2**3 - 3.0 * x2) * q
        phi, f1, f2 = m * p, m1 * p, m * p2
        f11, f12, f22 = m11 * p, m1 * p2, m * p22
        a11, a12, a22 = a_parts(x1, x2)
        gv = a11[0] * f1 + a12[0] * f2
        gw = a12[0] * f1 + a22[0] * f2
        gv1 = a11[1] * f1 + a11[0] * f11 + a12[1] * f2 + a12[0] * f12
        gv2 = a11[2] * f1 + a11[0] * f12 + a12[2] * f2 + a12[0] * f22
        gw1 = a12[1] * f1 + a12[0] * f11 + a22[1] * f2 + a22[0] * f12
        gw2 = a12[2] * f1 + a12[0] * f12 + a22[2] * f2 + a22[0] * f22
        V = np.stack([tau_t * phi, tau * gv, tau * gw])
        Vt = np.stack([tau_tt * phi, tau_t * gv, tau_t * gw])
        V1 = np.stack([tau_t * f1, tau * gv1, tau * gw1])
        V2 = np.stack([tau_t * f2, tau * gv2, tau * gw2])
        return V, Vt, V1, V2

    return ManufacturedCase("potential", fields, C)


def mms_source(case: ManufacturedCase, coeffs) -> Callable:
    """Source t -> V*_t - A1 V*_xi1 - A2 V*_xi2 - B V* on the grid of ``coeffs``."""
    x1, x2 = coeffs.grid.mesh
    A1, A2, B = coeffs.A1, coeffs.A2, coeffs.B

    def source(t):
        V, Vt, V1, V2 = case.fields(x1, x2, t)
        flux = np.einsum("ijab,bij->aij", A1, V1) + np.einsum("ijab,bij->aij", A2, V2)
        return Vt - flux - np.einsum("ijab,bij->aij", B, V)

    return source


@dataclass
class CaseRun:
    """Everything a manufactured run produces, for follow-up diagnostics."""

    case: ManufacturedCase
    grid: Grid
    coeffs: object
    solver: HyperbolicSolver
    dt: float
    nsteps: int
    final: object
    kept: dict
    error: float


def run_case(case: ManufacturedCase, grid: Grid, cfl=0.5, T=0.5, sigma=0.0, hooks=(), keep=None,
             dissipation=1.0 / 32.0) -> CaseRun:
    """Integrate a manufactured case to T; ``error`` is the discrete L2 error at T."""
    coeffs = assemble_coefficients(case.C_field(grid), grid)
    if sigma:
        coeffs = apply_sigma_perturbation(coeffs, sigma)
    dt, nsteps = uniform_steps(T, cfl_dt(coeffs, grid, cfl))
    source = mms_source(case, coeffs)
    x1, x2 = grid.mesh

    @lru_cache(maxsize=4)
    def forcing_at(n):
        return source(n * dt)

    def top_data(n):
        return case.fields(x1[:, -1:], x2[:, -1:], n * dt)[0][:, :, 0]

    solver = HyperbolicSolver(coeffs, dt, lambda n, xbar: forcing_at(n), dissipation, top_data=top_data)
    final, kept, exc = solver.integrate(nsteps, hooks, keep)
    if exc is not None:
        raise exc
    err = l2_norm(final.V - case.exact(grid, final.t), grid)
    return CaseRun(case, grid, coeffs, solver, dt, nsteps, final, kept, err)


@dataclass
class ConvergenceRecord:
    case: str
    sizes: list
    h: list
    errors: list
    order: Optional[float] = None
    pre_asymptotic: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def roundoff(self):
        return max(self.errors) < ROUNDOFF

    def pairwise_orders(self):
        e, h = np.asarray(self.errors), np.asarray(self.h)
        return list(np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:]))

    def rows(self):
        for n, h, e in zip(self.sizes, self.h, self.errors):
            yield {"n": n, "h": h, "error": e, "pre_asymptotic": n in self.pre_asymptotic}


def fit_order(h, errors):
    """Least-squares slope of log(error) against log(h)."""
    slope, _ = np.polyfit(np.log(np.asarray(h, float)), np.log(np.asarray(errors, float)), 1)
    return float(slope)


def convergence_study(case: ManufacturedCase, grids, cfl=0.5, T=0.5) -> ConvergenceRecord:
    """Final-time L2 errors on a 2x refinement sequence and the fitted order.

    ``grids`` are Grid objects or integers n (giving n x (n + 1) grids, whose
    xi2 spacing halves exactly). Grids with n < 16 are flagged pre-asymptotic
    and left out of the fit; no order is fitted when every error is at
    round-off level.
    """
    import time

    grids = [g if isinstance(g, Grid) else Grid(int(g), int(g) + 1) for g in grids]
    if len(grids) < 3:
        raise ValueError(f"a convergence study needs >= 3 grids, got {len(grids)}")
    start = time.perf_counter()
    errors = [float(run_case(case, g, cfl=cfl, T=T).error) for g in grids]
    rec = ConvergenceRecord(
        case.name,
        [g.n1 for g in grids],
        [g.h2 for g in grids],
        errors,
        pre_asymptotic=[g.n1 for g in grids if g.n1 < PRE_ASYMPTOTIC_N],
        seconds=time.perf_counter() - start,
    )
    if not rec.roundoff:
        use = [i for i, g in enumerate(grids) if g.n1 >= PRE_ASYMPTOTIC_N]
        if len(use) >= 2:
            rec.order = fit_order([rec.h[i] for i in use], [errors[i] for i in use])
    return rec


@dataclass
class SigmaStudy:
    sigmas: list
    dt: float
    diffs: list                 # ||V_s[i] - V_s[i+1]|| at the final time
    zero_diff: float            # ||V_0 - V_s[-1]||

    @property
    def monotone(self):
        return all(b < a for a, b in zip(self.diffs, self.diffs[1:]))

    @property
    def limit_consistent(self):
        return self.zero_diff < self.diffs[-1]


def sigma_study(scenario, sigmas, T=None) -> SigmaStudy:
    """Run the sigma-perturbed family and sigma = 0 with one common time step.

    The step is the CFL step of the largest sigma (fastest normal speeds),
    so every run shares the same time discretisation and the differences
    isolate the effect of sigma.
    """
    sigmas = [float(s) for s in sigmas]
    if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
        raise ValueError("sigmas must be strictly decreasing")
    T = scenario.T if T is None else T
    grid = scenario.grid
    base = assemble_coefficients(scenario.C_field(), grid, c22_min=scenario.numerics.C0)
    dt_max = min(cfl_dt(apply_sigma_perturbation(base, s), grid, scenario.numerics.cfl) for s in sigmas + [0.0])
    dt, _ = uniform_steps(T, dt_max)
    finals = []
    for s in sigmas + [0.0]:
        res = run(scenario.with_numerics(sigma=s), dt=dt, T=T)
        if res.error is not None:
            raise res.error
        finals.append(res.final.V)
    diffs = [l2_norm(a - b, grid) for a, b in zip(finals[:-2], finals[1:-1])]
    return SigmaStudy(sigmas, dt, diffs, l2_norm(finals[-1] - finals[-2], grid))


@dataclass
class EnergyDecay:
    """E0 history of a constant-coefficient run whose forcing stops at t_off."""

    t: np.ndarray
    E0: np.ndarray
    t_off: float

    @property
    def after(self):
        return self.t >= self.t_off - 1e-12

    @property
    def non_increasing(self):
        e = self.E0[self.after]
        return bool(np.all(np.diff(e) <= 1e-14 * e[0]))

    @property
    def decay_rate(self):
        """Relative decrease of E0 per unit time after the forcing stops."""
        e, t = self.E0[self.after], self.t[self.after]
        return float((e[0] - e[-1]) / (e[0] * (t[-1] - t[0])))


def burst_energy_decay(grid: Grid, C=(1.0, 0.3, 1.0), t_off=0.1, T=0.5, cfl=0.5, amp=1.0) -> EnergyDecay:
    """Constant C, forcing b(t) sin(2 pi xi1) xi2^2 exp(-(xi2 - 1)^2) for t < t_off.

    b = amp sin^2(pi t / t_off) switches on and off smoothly; afterwards the
    continuous system conserves |V|^2 exactly (the wall flux vanishes and the
    pulse stays clear of the top boundary), so any decrease is numerical.
    """
    from .diagnostics import energy_l2

    x1, x2 = grid.mesh
    one = np.ones(grid.shape)
    coeffs = assemble_coefficients(SymTensor2(C[0] * one, C[1] * one, C[2] * one), grid)
    dt, nsteps = uniform_steps(T, cfl_dt(coeffs, grid, cfl))
    shape = np.sin(TWO_PI * x1) * x2**2 * np.exp(-((x2 - 1.0) ** 2))

    def forcing(n, xbar):
        t = n * dt
        return amp * np.sin(np.pi * t / t_off) ** 2 * shape if t < t_off else np.zeros(grid.shape)

    solver = HyperbolicSolver(coeffs, dt, forcing)
    E = []
    final, _, exc = solver.integrate(nsteps, hooks=(lambda rec: E.append(energy_l2(rec.V, grid)),), keep=lambda n: False)
    if exc is not None:
        raise exc
    return EnergyDecay(np.arange(nsteps + 1) * dt, np.asarray(E), t_off)
