"""Half-strip grid, periodic in xi1 and truncated at xi2 = L.

Fields are plain numpy arrays of shape ``(n1, n2)`` indexed ``f[i, j]`` with
``i`` along xi1 and ``j`` along xi2. A state field stacks (U, V, W) on a
leading axis, shape ``(3, n1, n2)``. The periodic seam is not duplicated.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    n1: int
    n2: int
    L: float = 8.0

    def __post_init__(self):
        if self.n1 < 8 or self.n2 < 8:
            raise ValueError(f"grid needs n1, n2 >= 8, got {self.n1}x{self.n2}")
        if not self.L > 2.0:
            raise ValueError(f"truncation height L must exceed 2 (cutoff support), got {self.L}")

    @property
    def h1(self) -> float:
        return 1.0 / self.n1

    @property
    def h2(self) -> float:
        return self.L / (self.n2 - 1)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @cached_property
    def xi1(self) -> np.ndarray:
        return np.arange(self.n1) * self.h1

    @cached_property
    def xi2(self) -> np.ndarray:
        return np.arange(self.n2) * self.h2

    @cached_property
    def mesh(self):
        """(XI1, XI2), each of shape (n1, n2)."""
        return np.meshgrid(self.xi1, self.xi2, indexing="ij")

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights in xi2 (1/2 on the two boundary rows), shape (n2,)."""
        w = np.ones(self.n2)
        w[0] = w[-1] = 0.5
        return w

    def zeros(self, ncomp=None):
        return np.zeros(self.shape if ncomp is None else (ncomp,) + self.shape)

    def refine(self, factor=2):
        """Same domain with h1 and h2 divided by ``factor``."""
        return Grid(self.n1 * factor, (self.n2 - 1) * factor + 1, self.L)


def d_xi1(f: np.ndarray, h1: float) -> np.ndarray:
    """Centered periodic difference along xi1 (axis -2; axis 0 for a 1D line)."""
    f = np.asarray(f)
    ax = -2 if f.ndim >= 2 else 0
    return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * h1)


def d_xi2(f: np.ndarray, h2: float) -> np.ndarray:
    """Centered difference along xi2 (last axis), second-order one-sided on the end rows."""
    out = np.empty_like(f, dtype=float)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h2)
    out[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * h2)
    out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * h2)
    return out


def inner(f: np.ndarray, g: np.ndarray, grid: Grid) -> float:
    """Discrete L2 inner product over the last two axes (summed over any leading axes)."""
    return float(np.sum(f * g * grid.weights) * grid.h1 * grid.h2)


def l2_norm(f: np.ndarray, grid: Grid) -> float:
    return np.sqrt(inner(f, f, grid))


def wall_integral(f_row: np.ndarray, grid: Grid) -> float:
    """Periodic rectangle rule along a row of constant xi2."""
    return float(np.sum(f_row) * grid.h1)
