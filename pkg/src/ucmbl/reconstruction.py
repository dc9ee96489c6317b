"""Physical fields from the lifted solution.

x = xi1 + (xbar + Y + X_inf), y from the Jacobian identity
x_xi1 y_xi2 - x_xi2 y_xi1 = 1 with y = 0 on the wall, then F, S = F C F^T and
velocities by time differencing of stored maps.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMap, InsufficientSnapshots
from .grid import Grid, d_xi1, d_xi2
from .psd import SymTensor2

MIN_X1 = 0.1
MARCH_CFL = 0.5


@dataclass
class ReconstructionOutput:
    t: float
    x: np.ndarray
    y: np.ndarray
    F: np.ndarray            # (n1, n2, 2, 2)
    S: SymTensor2
    u: np.ndarray = None
    v: np.ndarray = None

    @property
    def detF(self):
        F = self.F
        return F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]


def recover_x(xbar, Y, X_inf, grid: Grid):
    """x = xi1 + xbar + Y + X_inf; exact xi1 on the wall since Y = -X_inf there."""
    return grid.mesh[0] + (xbar + Y + np.asarray(X_inf)[:, None])


def _upwind_xi1(y, speed, h1):
    """Second-order one-sided xi1 derivative, biased against ``speed``."""
    back = (3.0 * y - 4.0 * np.roll(y, 1) + np.roll(y, 2)) / (2.0 * h1)
    fwd = (-3.0 * y + 4.0 * np.roll(y, -1) - np.roll(y, -2)) / (2.0 * h1)
    return np.where(speed > 0, back, fwd)


def recover_y(x, grid: Grid):
    """March y_xi2 = (1 + x_xi2 y_xi1) / x_xi1 up from y = 0 on the wall.

    Each substep is a predictor (explicit Euler) followed by one corrector
    sweep (trapezoid) with the xi1 derivative upwinded by the sign of the
    transport speed -x_xi2 / x_xi1. The march is explicit in xi2, so a row
    interval is split into substeps that keep the Courant number
    |x_xi2 / x_xi1| dxi2 / h1 below MARCH_CFL; the coefficients are linear
    between rows.
    """
    xdev = x - grid.mesh[0]
    x1 = 1.0 + d_xi1(xdev, grid.h1)
    x2 = d_xi2(xdev, grid.h2)
    worst = float(np.min(np.abs(x1)))
    if worst < MIN_X1:
        raise DegenerateMap(f"min |x_xi1| = {worst:.3g} < {MIN_X1}; map is close to folding")
    h1, h2 = grid.h1, grid.h2
    speed = x2 / x1
    y = np.zeros(grid.shape)

    def rate(row, a1, a2):
        c = a2 / a1
        return 1.0 / a1 + c * _upwind_xi1(row, -c, h1)

    def coeffs_at(j, w):
        return (1 - w) * x1[:, j] + w * x1[:, j + 1], (1 - w) * x2[:, j] + w * x2[:, j + 1]

    for j in range(grid.n2 - 1):
        courant = float(np.max(np.abs(speed[:, j:j + 2]))) * h2 / h1
        m = max(1, int(np.ceil(courant / MARCH_CFL)))
        k = h2 / m
        row = y[:, j]
        for s in range(m):
            g0 = rate(row, *coeffs_at(j, s / m))
            pred = row + k * g0
            row = row + 0.5 * k * (g0 + rate(pred, *coeffs_at(j, (s + 1) / m)))
        y[:, j + 1] = row
    return y


def jacobian_residual(x, y, grid: Grid):
    xdev = x - grid.mesh[0]
    F = deformation_gradient(xdev, y, grid, deviation=True)
    return F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0] - 1.0


def deformation_gradient(x, y, grid: Grid, deviation=False):
    """F = [[x_xi1, x_xi2], [y_xi1, y_xi2]] by grid differences.

    ``x`` is the full map unless ``deviation`` is set, in which case it is the
    periodic part x - xi1.
    """
    xdev = x if deviation else x - grid.mesh[0]
    F = np.empty(grid.shape + (2, 2))
    F[..., 0, 0] = 1.0 + d_xi1(xdev, grid.h1)
    F[..., 0, 1] = d_xi2(xdev, grid.h2)
    F[..., 1, 0] = d_xi1(y, grid.h1)
    F[..., 1, 1] = d_xi2(y, grid.h2)
    return F


def recover_stress(F, C: SymTensor2) -> SymTensor2:
    """S = F C F^T, pointwise."""
    S = F @ C.as_matrix() @ np.swapaxes(F, -1, -2)
    return SymTensor2(S[..., 0, 0], 0.5 * (S[..., 0, 1] + S[..., 1, 0]), S[..., 1, 1])


def time_derivative(series, dt):
    """Second-order time derivative of equally spaced snapshots (axis 0)."""
    series = np.asarray(series)
    if series.shape[0] < 3:
        raise InsufficientSnapshots(f"need >= 3 snapshots, got {series.shape[0]}")
    out = np.empty_like(series)
    out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt)
    out[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (2.0 * dt)
    return out


def recover_velocities(xs, ys, dt):
    """u = x_t, v = y_t from consecutive snapshots spaced by ``dt``."""
    return time_derivative(xs, dt), time_derivative(ys, dt)


def reconstruct(result, n) -> ReconstructionOutput:
    """Maps, deformation gradient and stress at stored step ``n`` of a run."""
    grid = result.grid
    state = result.snapshots[n]
    Y, _ = result.problem.Y(n)
    x = recover_x(state.xbar, Y, result.farfield.X[n], grid)
    y = recover_y(x, grid)
    F = deformation_gradient(x, y, grid)
    S = recover_stress(F, result.problem.C)
    return ReconstructionOutput(state.t, x, y, F, S)


def reconstruct_series(result, steps):
    """Reconstruct consecutive stored steps and attach velocities.

    ``steps`` must be equally spaced; velocities use their spacing times dt.
    """
    steps = list(steps)
    if len(steps) < 3:
        raise InsufficientSnapshots(f"need >= 3 snapshots, got {len(steps)}")
    spacing = {b - a for a, b in zip(steps, steps[1:])}
    if len(spacing) != 1:
        raise ValueError("velocity recovery needs equally spaced snapshots")
    outs = [reconstruct(result, n) for n in steps]
    u, v = recover_velocities([o.x for o in outs], [o.y for o in outs], spacing.pop() * result.dt)
    for o, ui, vi in zip(outs, u, v):
        o.u, o.v = ui, vi
    return outs
