"""Lifting that makes the wall and initial data of the x problem homogeneous.

With X = x - x_inf and Y = g chi + t [u0 - u_inf (1 - chi)], the unknown
xbar = X - Y satisfies

    xbar_tt = div(C grad xbar) + Phi(xbar),  xbar = xbar_t = 0 at t = 0,  xbar = 0 on the wall,
    Phi(xbar) = Psi(xbar + Y) + div(C grad Y) - Y_tt,
    Psi(X) = div(C grad x_inf) - d1(C11_inf d1 x_inf) - P(X + x_inf, t) + P(x_inf, t).
"""
from functools import lru_cache

import numpy as np

from .errors import CompatibilityViolation
from .grid import Grid, d_xi1, d_xi2
from .psd import SymTensor2


def cutoff_chi(s):
    """1 on [0, 1], 0 on [2, inf), cosine ramp in between (C^1, piecewise C^2)."""
    s = np.asarray(s, dtype=float)
    ramp = 0.5 * (1.0 + np.cos(np.pi * (s - 1.0)))
    return np.where(s <= 1.0, 1.0, np.where(s >= 2.0, 0.0, ramp))


def div_C_grad(C: SymTensor2, g1, g2, grid: Grid):
    """div(C (g1, g2)) with the grid difference operators."""
    f1 = C.a11 * g1 + C.a12 * g2
    f2 = C.a12 * g1 + C.a22 * g2
    return d_xi1(f1, grid.h1) + d_xi2(f2, grid.h2)


def build_Y(g, g_tt, u0, u_inf, t, grid: Grid, wall_tol=1e-10):
    """Lifting Y and its second time derivative (the bracket is linear in t)."""
    wall = float(np.max(np.abs(u0[:, 0])))
    if wall > wall_tol:
        raise CompatibilityViolation(f"u0 nonzero at wall (max {wall:.3g}); the lifting needs u0(xi1, 0) = 0")
    chi = cutoff_chi(grid.xi2)[None, :]
    g = np.asarray(g)[:, None]
    u_inf = np.asarray(u_inf)[:, None]
    Y = g * chi + t * (u0 - u_inf * (1.0 - chi))
    Ytt = np.asarray(g_tt)[:, None] * chi
    return Y, Ytt


def build_Psi(xbar, Y, X_inf, C: SymTensor2, c11_inf, P, t, grid: Grid):
    """Far-field mismatch Psi evaluated at X = xbar + Y.

    ``X_inf`` is the periodic deviation x_inf - xi1 on the xi1 nodes; x_inf has
    no xi2 dependence, so its gradient is (1 + d1 X_inf, 0).
    """
    xi1 = grid.xi1
    slope = 1.0 + d_xi1(np.asarray(X_inf), grid.h1)                 # (n1,)
    slope2 = np.broadcast_to(slope[:, None], grid.shape)
    bulk = div_C_grad(C, slope2, 0.0, grid)
    outer = d_xi1(np.asarray(c11_inf) * slope, grid.h1)[:, None]
    x_inf = (xi1 + X_inf)[:, None]
    X = xbar + Y
    return bulk - outer - P(X + x_inf, t) + P(np.broadcast_to(x_inf, grid.shape), t)


def build_Phi(xbar, Y, Ytt, X_inf, C: SymTensor2, c11_inf, P, t, grid: Grid):
    psi = build_Psi(xbar, Y, X_inf, C, c11_inf, P, t, grid)
    return psi + div_C_grad(C, d_xi1(Y, grid.h1), d_xi2(Y, grid.h2), grid) - Ytt


class LiftedProblem:
    """Homogenised data for a scenario on a grid, indexed by solver step.

    ``forcing(n, xbar)`` returns Phi at t_n = n dt. Everything that does not
    depend on xbar is cached per step, so the pressure terms are the only
    per-call work.
    """

    def __init__(self, scenario, farfield, grid=None):
        self.grid = grid or scenario.grid
        self.farfield = farfield
        self.dt = farfield.dt
        g = self.grid
        self.C = scenario.C_field(g)
        self.c11_inf = scenario.C11_inf_line(g)
        self.u0 = scenario.u0_field(g)
        self.u_inf = scenario.u_inf_line(g)
        self.P = scenario.pressure()
        self.chi = cutoff_chi(g.xi2)
        self.P_is_zero = scenario.P.name == "zero"
        self._cached = lru_cache(maxsize=8)(self._static)

    def t(self, n):
        return n * self.dt

    def Y(self, n):
        ff = self.farfield
        return build_Y(ff.g(n), ff.g_tt(n), self.u0, self.u_inf, self.t(n), self.grid)

    def Y_t(self, n):
        """Exact time derivative of the lifting (diagnostic use)."""
        chi = self.chi[None, :]
        return self.farfield.g_t(n)[:, None] * chi + self.u0 - self.u_inf[:, None] * (1.0 - chi)

    def _static(self, n):
        g = self.grid
        Y, Ytt = self.Y(n)
        zero = np.zeros(g.shape)
        # Psi at X = 0 without the P terms (they cancel there)
        X_inf = self.farfield.X[n]
        base = build_Phi(zero, Y, Ytt, X_inf, self.C, self.c11_inf, _no_pressure, self.t(n), g)
        return Y, base

    def forcing(self, n, xbar):
        Y, base = self._cached(n)
        if self.P_is_zero:
            return base
        x_inf = (self.grid.xi1 + self.farfield.X[n])[:, None]
        t = self.t(n)
        return base - self.P(xbar + Y + x_inf, t) + self.P(np.broadcast_to(x_inf, self.grid.shape), t)


def _no_pressure(x, t):
    return np.zeros(np.shape(x))
