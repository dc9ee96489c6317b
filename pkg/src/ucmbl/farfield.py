"""Wall trace of the outer flow: a 1D semilinear wave equation for x_inf(xi1, t).

    x_tt = d/dxi1 (C11_inf dx/dxi1) - P(x, t),  x(xi1, 0) = xi1,  x_t(xi1, 0) = u_inf

The map is stored through its periodic deviation ``X = x_inf - xi1`` so the
seam needs no special handling. Time stepping is velocity Verlet (kick-drift-
kick), second order and time reversible; P is evaluated explicitly.
"""
from dataclasses import dataclass

import numpy as np

from .errors import CflViolation

FARFIELD_CFL = 0.5


@dataclass
class FarfieldState:
    X: np.ndarray      # x_inf - xi1, periodic
    xdot: np.ndarray   # d x_inf / dt
    t: float = 0.0

    def x_at(self, xi1):
        return xi1 + self.X


class FarfieldOperator:
    """Compact flux-form discretisation of d/dxi1 (C11_inf d x / dxi1)."""

    def __init__(self, xi1, c11_half, P):
        self.xi1 = np.asarray(xi1, dtype=float)
        self.h = 1.0 / self.xi1.size
        self.c_half = np.asarray(c11_half, dtype=float)  # C11_inf at xi1_i + h/2
        self.P = P

    @classmethod
    def from_scenario(cls, scenario, grid=None):
        g = grid or scenario.grid
        return cls(g.xi1, scenario.C11_inf_at(g.xi1 + 0.5 * g.h1), scenario.pressure())

    def max_speed(self):
        return float(np.sqrt(np.max(self.c_half))) if self.c_half.size else 0.0

    def stable_dt(self, cfl=FARFIELD_CFL):
        c = self.max_speed()
        return np.inf if c == 0 else cfl * self.h / c

    def elastic(self, X):
        h = self.h
        slope = 1.0 + (np.roll(X, -1) - X) / h  # dx/dxi1 at i + 1/2
        flux = self.c_half * slope
        return (flux - np.roll(flux, 1)) / h

    def acceleration(self, X, t):
        return self.elastic(X) - self.P(self.xi1 + X, t)

    def energy(self, state: FarfieldState):
        """Kinetic plus elastic energy; conserved by the continuous problem when P = 0."""
        h = self.h
        slope = 1.0 + (np.roll(state.X, -1) - state.X) / h
        return float(0.5 * h * np.sum(state.xdot**2) + 0.5 * h * np.sum(self.c_half * slope**2))


def farfield_initial(u_inf) -> FarfieldState:
    u_inf = np.asarray(u_inf, dtype=float)
    return FarfieldState(np.zeros_like(u_inf), u_inf.copy(), 0.0)


def farfield_step(state: FarfieldState, op: FarfieldOperator, dt: float, check=True, t_new=None) -> FarfieldState:
    if check and dt > op.stable_dt() * (1 + 1e-12):
        raise CflViolation(
            f"far-field step dt = {dt:.4g} exceeds {FARFIELD_CFL} h1 / max sqrt(C11_inf) = {op.stable_dt():.4g}"
        )
    vhalf = state.xdot + 0.5 * dt * op.acceleration(state.X, state.t)
    X = state.X + dt * vhalf
    t = state.t + dt if t_new is None else t_new
    xdot = vhalf + 0.5 * dt * op.acceleration(X, t)
    return FarfieldState(X, xdot, t)


@dataclass
class FarfieldTrajectory:
    """Far-field history at the solver steps t_n = n dt, with g = xi1 - x_inf."""

    dt: float
    X: np.ndarray     # (nsteps + 1, n1)
    xdot: np.ndarray
    xddot: np.ndarray
    op: FarfieldOperator

    @property
    def nsteps(self):
        return self.X.shape[0] - 1

    def t(self, n):
        return n * self.dt

    def state(self, n) -> FarfieldState:
        return FarfieldState(self.X[n], self.xdot[n], self.t(n))

    def g(self, n):
        return -self.X[n]

    def g_t(self, n):
        return -self.xdot[n]

    def g_tt(self, n):
        return -self.xddot[n]


def farfield_trajectory(scenario, dt, T, grid=None) -> FarfieldTrajectory:
    """Integrate the far-field problem to ``T`` with ``round(T/dt)`` uniform steps."""
    g = grid or scenario.grid
    op = FarfieldOperator.from_scenario(scenario, g)
    nsteps = int(round(T / dt))
    state = farfield_initial(scenario.u_inf_line(g))
    X = np.empty((nsteps + 1, g.n1))
    V = np.empty_like(X)
    A = np.empty_like(X)
    for n in range(nsteps + 1):
        X[n], V[n] = state.X, state.xdot
        A[n] = op.acceleration(state.X, state.t)
        if n < nsteps:
            # t_n = n dt exactly, no drift from repeated addition
            state = farfield_step(state, op, dt, t_new=(n + 1) * dt)
    return FarfieldTrajectory(dt, X, V, A, op)
