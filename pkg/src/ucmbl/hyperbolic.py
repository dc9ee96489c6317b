"""First-order symmetric hyperbolic system for the lifted boundary-layer problem.

State V = (U, V, W) = (xbar_t, A grad xbar) with A = sqrt(C) evolves by

    V_t = A1 V_xi1 + A2 V_xi2 + B V + (Phi, 0, 0),   V(0) = 0,   U = 0 on xi2 = 0,

and xbar = int_0^t U ds is carried alongside because Phi depends on it.

Discretisation
--------------
* xi1: centered periodic differences.
* xi2: centered in the interior. On the wall and top rows the normal flux is
  applied in locally characteristic variables w = R^T V (R frozen at the
  node) with a one-sided first-order difference, which is the upwind one for
  the outgoing family.
* Wall: U is overwritten with 0 after every stage. This fixes the incoming
  family by reflection off U = 0; V and W keep their PDE update.
* Top: the incoming family (eigenvalue +lam) is set to zero, the rest is
  left to the one-sided update.
* Fourth-difference dissipation of strength ``dissipation`` (scaled by the
  maximal wave speed per direction). In xi2 it is the trapezoid-weighted form
  D^T D, which is negative semidefinite in the discrete L2 norm. It removes
  the weak instability of Heun + centered differences and is O(h^3).
* Time: Heun (two-stage RK2); Phi frozen per stage, optional Picard sweeps.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteState, SigmaTooLarge
from .grid import Grid, d_xi1, d_xi2
from .psd import SymTensor2, diagonalize_normal_flux, flux_matrices, psd_sqrt


@dataclass
class CoefficientFields:
    A: SymTensor2
    b2: np.ndarray      # B[0, 1] = d1 a11 + d2 a12
    b3: np.ndarray      # B[0, 2] = d1 a12 + d2 a22
    lam: np.ndarray
    eig: np.ndarray     # (n1, n2, 3): -lam, 0, +lam
    R: np.ndarray       # (n1, n2, 3, 3) orthogonal, columns = eigenvectors
    grid: Grid
    sigma: float = 0.0

    @property
    def A1(self):
        return flux_matrices(self.A)[0]

    @property
    def A2(self):
        a2 = flux_matrices(self.A)[1]
        if self.sigma:
            a2 = a2 + self.sigma * np.eye(3)
        return a2

    @property
    def B(self):
        b = np.zeros(self.lam.shape + (3, 3))
        b[..., 0, 1] = self.b2
        b[..., 0, 2] = self.b3
        return b

    @property
    def rho1(self):
        return np.hypot(self.A.a11, self.A.a12)

    @property
    def rho2(self):
        return self.lam + self.sigma

    @property
    def c0(self):
        return float(np.min(self.A.a22))


def assemble_coefficients(C: SymTensor2, grid: Grid, c22_min: float = 0.0) -> CoefficientFields:
    A = psd_sqrt(C, c22_min=c22_min)
    A = SymTensor2(*(np.broadcast_to(np.asarray(c, float), grid.shape).copy() for c in (A.a11, A.a12, A.a22)))
    h1, h2 = grid.h1, grid.h2
    b2 = d_xi1(A.a11, h1) + d_xi2(A.a12, h2)
    b3 = d_xi1(A.a12, h1) + d_xi2(A.a22, h2)
    eig, R = diagonalize_normal_flux(A)
    return CoefficientFields(A, b2, b3, np.hypot(A.a12, A.a22), eig, R, grid)


def apply_sigma_perturbation(coeffs: CoefficientFields, sigma: float) -> CoefficientFields:
    """Shift the normal-flux eigenvalues to (-lam + s, s, lam + s): A2 -> A2 + s I."""
    if sigma == 0:
        return replace(coeffs, sigma=0.0)
    lam_min = float(np.min(coeffs.lam))
    if not 0 < sigma < lam_min:
        raise SigmaTooLarge(f"sigma = {sigma:g} must lie in (0, min lambda = {lam_min:.4g})")
    return replace(coeffs, sigma=float(sigma))


def cfl_dt(coeffs: CoefficientFields, grid: Grid, cfl: float) -> float:
    speed = coeffs.rho1 / grid.h1 + coeffs.rho2 / grid.h2
    return float(cfl / np.max(speed))


@dataclass
class SolverState:
    V: np.ndarray           # (3, n1, n2)
    xbar: np.ndarray        # (n1, n2)
    n: int = 0
    dt: float = 0.0

    @property
    def t(self):
        return self.n * self.dt

    def copy(self):
        return SolverState(self.V.copy(), self.xbar.copy(), self.n, self.dt)


@dataclass
class StepRecord:
    """Read-only view of an accepted state handed to diagnostics hooks."""

    n: int
    t: float
    V: np.ndarray
    xbar: np.ndarray
    forcing: np.ndarray     # (3, n1, n2) forcing at (t_n, xbar_n)
    Vt: np.ndarray          # projected right-hand side at the state


def _fourth_difference_xi2(f):
    """W^{-1} D^T D f with D the interior second difference and W the trapezoid weights."""
    d = f[..., 2:] - 2.0 * f[..., 1:-1] + f[..., :-2]      # (.., n2 - 2)
    out = np.zeros_like(f)
    out[..., :-2] += d
    out[..., 1:-1] -= 2.0 * d
    out[..., 2:] += d
    out[..., 0] *= 2.0
    out[..., -1] *= 2.0
    return out


def _fourth_difference_xi1(f):
    return (
        np.roll(f, -2, axis=-2) - 4.0 * np.roll(f, -1, axis=-2) + 6.0 * f
        - 4.0 * np.roll(f, 1, axis=-2) + np.roll(f, 2, axis=-2)
    )


class HyperbolicSolver:
    """Explicit two-stage integrator for the lifted system on one grid.

    ``forcing(n, xbar)`` returns Phi (shape (n1, n2)) or a full 3-vector
    source (shape (3, n1, n2)) at t_n = n dt. ``top_data(n)`` optionally
    returns the state the incoming top characteristic should match (used by
    manufactured solutions); by default that characteristic is zero.
    """

    def __init__(
        self,
        coeffs: CoefficientFields,
        dt: float,
        forcing: Callable,
        dissipation: float = 1.0 / 32.0,
        picard_iters: int = 0,
        picard_tol: float = 1e-10,
        top_data: Optional[Callable] = None,
    ):
        self.c = coeffs
        self.grid = coeffs.grid
        self.dt = float(dt)
        self._forcing = forcing
        self.picard_iters = picard_iters
        self.picard_tol = picard_tol
        self.top_data = top_data
        g = self.grid
        self.nu1 = dissipation * float(np.max(coeffs.rho1)) / g.h1
        self.nu2 = dissipation * float(np.max(coeffs.lam)) / g.h2
        # boundary-row rotations and eigenvalues, including the sigma shift
        self._rows = {}
        for j in (0, g.n2 - 1):
            self._rows[j] = (coeffs.R[:, j], coeffs.eig[:, j] + coeffs.sigma)
        self.r_plus_top = coeffs.R[:, -1, :, 2]            # (n1, 3)

    def forcing(self, n, xbar):
        f = np.asarray(self._forcing(n, xbar), dtype=float)
        if f.ndim == 2:
            out = np.zeros((3,) + f.shape)
            out[0] = f
            return out
        return f

    def normal_flux(self, V):
        """A2 V_xi2 with characteristic one-sided closures on the two end rows."""
        c = self.c
        a12, a22 = c.A.a12, c.A.a22
        h2 = self.grid.h2
        D = np.empty_like(V)
        D[..., 1:-1] = (V[..., 2:] - V[..., :-2]) / (2.0 * h2)
        D[..., 0] = 0.0
        D[..., -1] = 0.0
        U2, V2, W2 = D
        out = np.stack([a12 * V2 + a22 * W2, a12 * U2, a22 * U2])
        if c.sigma:
            out += c.sigma * D
        for j, nb in ((0, 1), (self.grid.n2 - 1, self.grid.n2 - 2)):
            R, lam = self._rows[j]
            # w = R^T V at the row and its neighbour, with R frozen at the row
            w0 = np.einsum("iab,ai->bi", R, V[:, :, j])
            w1 = np.einsum("iab,ai->bi", R, V[:, :, nb])
            dw = (w1 - w0) / h2 if nb > j else (w0 - w1) / h2
            out[:, :, j] = np.einsum("iab,ib,bi->ai", R, lam, dw)
        return out

    def spatial(self, V):
        c = self.c
        h1 = self.grid.h1
        a11, a12 = c.A.a11, c.A.a12
        U1, V1, W1 = d_xi1(V, h1)
        out = np.stack([a11 * V1 + a12 * W1, a11 * U1, a12 * U1])
        out += self.normal_flux(V)
        out[0] += c.b2 * V[1] + c.b3 * V[2]
        out -= self.nu1 * _fourth_difference_xi1(V)
        out -= self.nu2 * _fourth_difference_xi2(V)
        return out

    def project(self, V, n=None):
        """Impose U = 0 on the wall and the incoming top characteristic, in place."""
        V[0, :, 0] = 0.0
        r = self.r_plus_top
        top = V[:, :, -1]
        wp = np.einsum("ia,ai->i", r, top)
        if self.top_data is not None and n is not None:
            wp = wp - np.einsum("ia,ai->i", r, self.top_data(n))
        top -= (r * wp[:, None]).T
        return V

    def project_rate(self, Vt):
        Vt = Vt.copy()
        Vt[0, :, 0] = 0.0
        r = self.r_plus_top
        wp = np.einsum("ia,ai->i", r, Vt[:, :, -1])
        Vt[:, :, -1] -= (r * wp[:, None]).T
        return Vt

    def initial_state(self) -> SolverState:
        g = self.grid
        return SolverState(np.zeros((3,) + g.shape), np.zeros(g.shape), 0, self.dt)

    def record(self, state: SolverState) -> StepRecord:
        F = self.forcing(state.n, state.xbar)
        rhs = self.spatial(state.V) + F
        return StepRecord(state.n, state.t, state.V, state.xbar, F, self.project_rate(rhs)), rhs

    def step(self, state: SolverState, k1=None) -> SolverState:
        dt, n = self.dt, state.n
        V0, xb0 = state.V, state.xbar
        if k1 is None:
            k1 = self.spatial(V0) + self.forcing(n, xb0)
        Vs = self.project(V0 + dt * k1, n + 1)
        xbs = xb0 + dt * V0[0]
        k2s = self.spatial(Vs)
        V1 = self.project(V0 + 0.5 * dt * (k1 + k2s + self.forcing(n + 1, xbs)), n + 1)
        xb1 = xb0 + 0.5 * dt * (V0[0] + Vs[0])
        for _ in range(self.picard_iters):
            # trapezoid in xbar, Phi re-evaluated at the corrected end state
            xb_new = xb0 + 0.5 * dt * (V0[0] + V1[0])
            V1 = self.project(V0 + 0.5 * dt * (k1 + k2s + self.forcing(n + 1, xb_new)), n + 1)
            change = float(np.max(np.abs(xb_new - xb1)))
            xb1 = xb_new
            if change < self.picard_tol:
                break
        if not (np.all(np.isfinite(V1)) and np.all(np.isfinite(xb1))):
            raise NonFiniteState(f"non-finite state at step {n + 1} (t = {(n + 1) * dt:.6g})", n + 1, (n + 1) * dt)
        return SolverState(V1, xb1, n + 1, dt)

    def integrate(self, nsteps, hooks=(), keep=None, state=None):
        """Advance ``nsteps`` steps, calling ``hooks`` on every accepted state.

        ``keep(n)`` decides which states are copied into the returned dict.
        Returns (final_state, kept, error) where error is a NonFiniteState or None.
        """
        state = state or self.initial_state()
        kept = {}
        error = None
        while True:
            rec, rhs = self.record(state)
            for hook in hooks:
                hook(rec)
            if keep is None or keep(state.n):
                kept[state.n] = state.copy()
            if state.n >= nsteps:
                break
            try:
                state = self.step(state, k1=rhs)
            except NonFiniteState as exc:
                error = exc
                break
        return state, kept, error


@dataclass
class RunResult:
    scenario: object
    grid: Grid
    coeffs: CoefficientFields
    dt: float
    nsteps: int
    farfield: object
    problem: object
    solver: HyperbolicSolver
    final: SolverState
    snapshots: dict = field(default_factory=dict)
    error: Optional[NonFiniteState] = None

    @property
    def t_reached(self):
        return self.final.t

    def times(self):
        return sorted(self.snapshots)


def uniform_steps(T, dt_max):
    """Largest uniform dt <= dt_max landing exactly on T."""
    nsteps = max(1, int(np.ceil(T / dt_max - 1e-12)))
    return T / nsteps, nsteps


@dataclass
class PreparedRun:
    """Everything needed to integrate a scenario, before any step is taken."""

    scenario: object
    coeffs: CoefficientFields
    dt: float
    nsteps: int
    farfield: object
    problem: object
    solver: HyperbolicSolver

    def default_keep(self):
        stride, nsteps = self.scenario.numerics.snapshot_stride, self.nsteps
        if stride:
            return lambda n: n % stride == 0 or n == nsteps
        return lambda n: n in (0, nsteps)

    def integrate(self, hooks=(), keep=None) -> "RunResult":
        if keep is None:
            keep = self.default_keep()
        elif not callable(keep):
            keep = set(keep).__contains__
        final, kept, error = self.solver.integrate(self.nsteps, hooks, keep)
        return RunResult(
            self.scenario, self.scenario.grid, self.coeffs, self.dt, self.nsteps,
            self.farfield, self.problem, self.solver, final, kept, error,
        )


def prepare(scenario, dt=None, T=None, validate=True) -> PreparedRun:
    """Coefficients, time step, far field and lifted forcing for a scenario.

    Without ``dt`` the largest uniform CFL-stable step that lands on T is used.
    """
    from .errors import CflViolation
    from .farfield import farfield_trajectory
    from .homogenization import LiftedProblem

    if validate:
        scenario.validate()
    grid = scenario.grid
    num = scenario.numerics
    T = scenario.T if T is None else T
    coeffs = assemble_coefficients(scenario.C_field(), grid, c22_min=num.C0 if validate else 0.0)
    if num.sigma:
        coeffs = apply_sigma_perturbation(coeffs, num.sigma)
    if dt is None:
        if not 0 < num.cfl <= 1:
            raise CflViolation(f"cfl = {num.cfl} outside (0, 1]")
        dt, nsteps = uniform_steps(T, cfl_dt(coeffs, grid, num.cfl))
    else:
        nsteps = int(round(T / dt))
    farfield = farfield_trajectory(scenario, dt, nsteps * dt)
    problem = LiftedProblem(scenario, farfield)
    solver = HyperbolicSolver(
        coeffs, dt, problem.forcing, num.dissipation, num.picard_iters, num.picard_tol
    )
    return PreparedRun(scenario, coeffs, dt, nsteps, farfield, problem, solver)


def run(scenario, hooks=(), keep=None, dt=None, T=None, validate=True) -> RunResult:
    """Integrate a scenario from rest to T.

    ``keep`` is a predicate on the step index or an iterable of step indices;
    by default the scenario's snapshot stride (0 = first and last only).
    """
    return prepare(scenario, dt, T, validate).integrate(hooks, keep)
