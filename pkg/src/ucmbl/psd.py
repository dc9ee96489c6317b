"""Closed-form algebra for 2x2 symmetric positive semidefinite tensors.

Every function accepts either scalar components or numpy arrays of equal
shape, so the same code serves a single tensor and a whole grid field.
"""
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateC22, NotPSD, ZeroLambda

PSD_TOL = 1e-12

Real = Union[float, np.ndarray]


@dataclass(frozen=True)
class SymTensor2:
    """Symmetric tensor [[a11, a12], [a12, a22]]; components may be arrays."""

    a11: Real
    a12: Real
    a22: Real

    @classmethod
    def identity(cls, shape=()):
        one = np.ones(shape) if shape else 1.0
        zero = np.zeros(shape) if shape else 0.0
        return cls(one, zero, one * 1.0)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[..., 0, 0], 0.5 * (m[..., 0, 1] + m[..., 1, 0]), m[..., 1, 1])

    def as_matrix(self):
        a11, a12, a22 = np.broadcast_arrays(*map(np.asarray, (self.a11, self.a12, self.a22)))
        return np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)

    def trace(self):
        return self.a11 + self.a22

    def __matmul__(self, other):
        # product of two symmetric tensors is not symmetric in general; return the full matrix
        return self.as_matrix() @ other.as_matrix()


def det2(m: SymTensor2) -> Real:
    return m.a11 * m.a22 - m.a12 * m.a12


def is_psd(m: SymTensor2, tol: float = PSD_TOL):
    """Elementwise PSD test with slack ``tol``."""
    return (
        (np.asarray(m.a11) >= -tol)
        & (np.asarray(m.a22) >= -tol)
        & (np.asarray(det2(m)) >= -tol)
    )


def check_psd(m: SymTensor2, tol: float = PSD_TOL, c22_min: float = 0.0) -> None:
    ok = is_psd(m, tol)
    if not np.all(ok):
        bad = int(np.size(ok) - np.count_nonzero(ok))
        raise NotPSD(f"{bad} tensor value(s) fail the PSD test (tol={tol:g})")
    lo = float(np.min(m.a22))
    if lo < c22_min:
        raise DegenerateC22(f"min C22 = {lo:.6g} is below C0 = {c22_min:.6g}")


def psd_sqrt(c: SymTensor2, c22_min: float = 0.0, tol: float = PSD_TOL) -> SymTensor2:
    """Principal square root A with A @ A = C.

    Uses A = (C + s I) / sqrt(tr C + 2 s), s = sqrt(det C); the zero tensor
    (vanishing denominator) maps to zero.
    """
    check_psd(c, tol, c22_min)
    s = np.sqrt(np.maximum(det2(c), 0.0))
    den = np.sqrt(np.maximum(c.trace() + 2.0 * s, 0.0))
    zero = den == 0.0
    inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, den))
    a = SymTensor2((c.a11 + s) * inv, c.a12 * inv, (c.a22 + s) * inv)
    if np.ndim(a.a11) == 0:
        return SymTensor2(float(a.a11), float(a.a12), float(a.a22))
    return a


def lambda_of(a: SymTensor2) -> Real:
    """Nonzero eigenvalue magnitude of the normal flux matrix, sqrt(a12^2 + a22^2)."""
    return np.hypot(a.a12, a.a22)


def flux_matrices(a: SymTensor2):
    """The 3x3 tangential and normal flux matrices built from the square root A."""
    a11, a12, a22 = np.broadcast_arrays(*map(np.asarray, (a.a11, a.a12, a.a22)))
    z = np.zeros_like(a11, dtype=float)
    a1 = np.stack(
        [np.stack([z, a11, a12], -1), np.stack([a11, z, z], -1), np.stack([a12, z, z], -1)], -2
    )
    a2 = np.stack(
        [np.stack([z, a12, a22], -1), np.stack([a12, z, z], -1), np.stack([a22, z, z], -1)], -2
    )
    return a1, a2


def diagonalize_normal_flux(a: SymTensor2, c0: float = 1e-12):
    """Eigen-decomposition of the normal flux matrix.

    Returns ``(eigenvalues, R)`` with eigenvalues (-lam, 0, lam) along the last
    axis and R orthogonal (eigenvectors as columns, ascending order), each
    column normalised so its first nonzero entry is positive.
    """
    lam = lambda_of(a)
    if np.min(lam) < c0:
        raise ZeroLambda(f"min lambda = {float(np.min(lam)):.3g} < {c0:g}")
    a12 = np.asarray(a.a12, dtype=float)
    a22 = np.asarray(a.a22, dtype=float)
    lam = np.asarray(lam, dtype=float)
    q = 1.0 / (np.sqrt(2.0) * lam)
    # eigenvalue -lam: (-lam, a12, a22) flipped to start positive
    neg = np.stack([lam * q, -a12 * q, -a22 * q], -1)
    # eigenvalue 0: (0, a22, -a12); first nonzero entry is a22 unless a22 == 0
    sgn = np.where(a22 > 0, 1.0, np.where(a22 < 0, -1.0, np.where(a12 < 0, 1.0, -1.0)))
    mid = np.stack([np.zeros_like(lam), sgn * a22 / lam, -sgn * a12 / lam], -1)
    pos = np.stack([lam * q, a12 * q, a22 * q], -1)
    r = np.stack([neg, mid, pos], -1)
    eig = np.stack([-lam, np.zeros_like(lam), lam], -1)
    return eig, r
