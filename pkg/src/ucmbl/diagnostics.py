"""A priori estimates and identities checked on computed solutions.

The monitor is a solver hook: it receives every accepted state and records
E0 = |V|^2, Et = |V_t|^2, E1 = |V_xi1|^2, the wall flux of A2 V . V, and the
normal derivatives V_xi2 rebuilt algebraically from (U_t, W_t, V, V_xi1) and
the running time integral of the source F(U_xi1, W_t). Gronwall bounds are
evaluated when the run is finished.
"""
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, d_xi1, d_xi2, inner, l2_norm, wall_integral
from .hyperbolic import CoefficientFields

GRONWALL_TOL = 0.05


def energy_l2(V, grid: Grid) -> float:
    """|U|^2 + |V|^2 + |W|^2 with the trapezoid quadrature."""
    return inner(V, V, grid)


def wall_flux(V, coeffs: CoefficientFields) -> float:
    """int_0^1 A2 V . V at xi2 = 0, i.e. 2 U (a12 V + a22 W) (+ sigma |V|^2)."""
    U, Vv, W = V[:, :, 0]
    a12, a22 = coeffs.A.a12[:, 0], coeffs.A.a22[:, 0]
    q = 2.0 * U * (a12 * Vv + a22 * W)
    if coeffs.sigma:
        q = q + coeffs.sigma * (U * U + Vv * Vv + W * W)
    return wall_integral(q, coeffs.grid)


def _spectral_max(M):
    return float(np.max(np.linalg.norm(M, ord=2, axis=(-2, -1))))


@dataclass
class EstimateConstants:
    K0: float    # max |B + B^T - d1 A1 - d2 A2|
    K1: float    # max |d1 A1 - d2 A2 + B + B^T|
    nB: float    # max |d1 (B + B^T)|
    nA: float    # max |d1 A2|

    @property
    def rate0(self):
        return self.K0 + 1.0

    @property
    def rate1(self):
        return self.K1 + 1.0 + 0.5 * self.nB + self.nA


def estimate_constants(coeffs: CoefficientFields) -> EstimateConstants:
    g = coeffs.grid
    A1, A2, B = coeffs.A1, coeffs.A2, coeffs.B
    d1A1 = d_xi1(np.moveaxis(A1, (-2, -1), (0, 1)), g.h1)
    d2A2 = d_xi2(np.moveaxis(A2, (-2, -1), (0, 1)), g.h2)
    d1A2 = d_xi1(np.moveaxis(A2, (-2, -1), (0, 1)), g.h1)
    BB = np.moveaxis(B + np.swapaxes(B, -1, -2), (-2, -1), (0, 1))
    d1BB = d_xi1(BB, g.h1)
    back = lambda m: np.moveaxis(m, (0, 1), (-2, -1))  # noqa: E731
    return EstimateConstants(
        K0=_spectral_max(back(BB - d1A1 - d2A2)),
        K1=_spectral_max(back(d1A1 - d2A2 + BB)),
        nB=_spectral_max(back(d1BB)),
        nA=_spectral_max(back(d1A2)),
    )


class RecoveryCoefficients:
    """Pointwise coefficients of the normal-derivative recovery identities."""

    def __init__(self, coeffs: CoefficientFields):
        g = coeffs.grid
        a11, a12, a22 = coeffs.A.a11, coeffs.A.a12, coeffs.A.a22
        d1 = lambda f: d_xi1(f, g.h1)  # noqa: E731
        d2 = lambda f: d_xi2(f, g.h2)  # noqa: E731
        self.a11, self.a12, self.a22 = a11, a12, a22
        self.b2, self.b3 = coeffs.b2, coeffs.b3
        self.k1 = a12 * d1(a11) + a22 * d2(a11) - a11 * d1(a12) - a12 * d2(a12)
        self.k2 = a12 * d1(a12) + a22 * d2(a12) - a11 * d1(a22) - a12 * d2(a22)
        self.det = a22 * a22 + a12 * a12
        self.grid = g

    def source(self, U1, W_t):
        """F(U_xi1, W_t), the time derivative of a22 V2 - a12 W2 + a12 V1 - a11 W1."""
        return self.k1 * U1 + self.k2 / self.a22 * (W_t - self.a12 * U1)


def normal_derivative_recovery(V, U_t, W_t, F_integral, phi, rc: RecoveryCoefficients):
    """Rebuild (U_xi2, V_xi2, W_xi2) without differencing in xi2.

    U_xi2 comes from the W equation, (V_xi2, W_xi2) from the 2x2 system
        a22 V2 - a12 W2 = int F - a12 V1 + a11 W1
        a12 V2 + a22 W2 = U_t - phi - a11 V1 - a12 W1 - b2 V - b3 W
    whose determinant a22^2 + a12^2 = lambda^2 is bounded below.
    Returns (rec, residual) with rec of shape (3, n1, n2) and residual the
    max-norm gap to the direct xi2 differences.
    """
    g = rc.grid
    U, Vv, W = V
    U1, V1, W1 = d_xi1(V, g.h1)
    a11, a12, a22 = rc.a11, rc.a12, rc.a22
    U2 = (W_t - a12 * U1) / a22
    r1 = F_integral - a12 * V1 + a11 * W1
    r2 = U_t - phi - a11 * V1 - a12 * W1 - rc.b2 * Vv - rc.b3 * W
    V2 = (a22 * r1 + a12 * r2) / rc.det
    W2 = (-a12 * r1 + a22 * r2) / rc.det
    rec = np.stack([U2, V2, W2])
    residual = float(np.max(np.abs(rec - d_xi2(V, g.h2))))
    return rec, residual


@dataclass
class DiagnosticsReport:
    grid: Grid
    dt: float
    constants: EstimateConstants
    step: list = field(default_factory=list)
    t: list = field(default_factory=list)
    E0: list = field(default_factory=list)
    Et: list = field(default_factory=list)
    E1: list = field(default_factory=list)
    E2rec: list = field(default_factory=list)
    wall_flux: list = field(default_factory=list)
    normal_res: list = field(default_factory=list)
    detF_err: dict = field(default_factory=dict)
    phi2: list = field(default_factory=list)      # |Phi|^2
    phit2: list = field(default_factory=list)     # |Phi_t|^2
    phi12: list = field(default_factory=list)     # |Phi_xi1|^2
    bounds: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def arrays(self, *names):
        return [np.asarray(getattr(self, n), dtype=float) for n in names]

    @property
    def gronwall_ok(self):
        keys = [k for k in ("E0", "Et", "E1") if k in self.flags]
        if not keys:
            return np.ones(len(self.step), dtype=bool)
        return np.logical_and.reduce([self.flags[k] for k in keys])

    def rows(self):
        ok = self.gronwall_ok
        for i, n in enumerate(self.step):
            yield {
                "step": n,
                "t": self.t[i],
                "E0": self.E0[i],
                "Et": self.Et[i],
                "E1": self.E1[i],
                "E2rec": self.E2rec[i],
                "wall_flux": self.wall_flux[i],
                "detF_err": self.detF_err.get(n, float("nan")),
                "gronwall_ok": bool(ok[i]),
                "normal_res": self.normal_res[i],
            }


def _cumtrapz(y, dt):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * dt * (y[1:] + y[:-1]))
    return out


def gronwall_check(report: DiagnosticsReport, tol=GRONWALL_TOL, constants=None):
    """Evaluate the exponential bounds for E0, Et and E1; flags are per step.

        E0(t) <= e^{(K0+1) t} (E0(0) + int |Phi|^2)
        Et(t) <= e^{(K0+1) t} (Et(0) + int |Phi_t|^2)
        E1(t) <= e^{r1 t} (E1(0) + int |Phi_1|^2 + nB/2 E0 + nA E2rec)

    with r1 = K1 + 1 + nB/2 + nA (Cauchy-Schwarz on the cross terms). A step
    passes when E <= (1 + tol) * bound.
    """
    c = constants or report.constants
    t, E0, Et, E1, E2, phi2, phit2, phi12 = report.arrays(
        "t", "E0", "Et", "E1", "E2rec", "phi2", "phit2", "phi12"
    )
    dt = report.dt
    e0 = np.exp(c.rate0 * t)
    e1 = np.exp(c.rate1 * t)
    bounds = {
        "E0": e0 * (E0[0] + _cumtrapz(phi2, dt)),
        "Et": e0 * (Et[0] + _cumtrapz(phit2, dt)),
        "E1": e1 * (E1[0] + _cumtrapz(phi12 + 0.5 * c.nB * E0 + c.nA * np.nan_to_num(E2), dt)),
    }
    flags = {k: {"E0": E0, "Et": Et, "E1": E1}[k] <= (1.0 + tol) * b + 1e-300 for k, b in bounds.items()}
    report.bounds, report.flags = bounds, flags
    return flags


def empirical_rate(E, bound_seed, t):
    """Smallest exponent k with E(t) <= e^{k t} * seed(t), over t > 0."""
    E, seed, t = map(np.asarray, (E, bound_seed, t))
    mask = (t > 0) & (E > 0) & (seed > 0)
    if not np.any(mask):
        return 0.0
    return float(max(0.0, np.max(np.log(E[mask] / seed[mask]) / t[mask])))


class Monitor:
    """Solver hook collecting a :class:`DiagnosticsReport`.

    Time derivatives for the recovery identities are second-order differences
    of consecutive states, so step n is processed once step n + 1 has arrived
    (the last step uses a backward stencil).
    """

    def __init__(self, coeffs: CoefficientFields, dt: float, recovery=True, detF=None):
        self.coeffs = coeffs
        self.grid = coeffs.grid
        self.dt = dt
        self.report = DiagnosticsReport(self.grid, dt, estimate_constants(coeffs))
        self.recovery = recovery and coeffs.sigma == 0
        self.rc = RecoveryCoefficients(coeffs) if self.recovery else None
        self.detF = detF            # optional callable n -> max |det F - 1|
        self._window = deque(maxlen=3)
        self._F_prev = None
        self._F_int = np.zeros(self.grid.shape)

    def __call__(self, rec):
        g = self.grid
        r = self.report
        r.step.append(rec.n)
        r.t.append(rec.t)
        r.E0.append(energy_l2(rec.V, g))
        r.Et.append(energy_l2(rec.Vt, g))
        r.E1.append(energy_l2(d_xi1(rec.V, g.h1), g))
        r.wall_flux.append(wall_flux(rec.V, self.coeffs))
        r.phi2.append(energy_l2(rec.forcing, g))
        r.phi12.append(energy_l2(d_xi1(rec.forcing, g.h1), g))
        if self.detF is not None:
            err = self.detF(rec.n)
            if err is not None:
                r.detF_err[rec.n] = err
        self._window.append((rec.n, rec.V.copy(), rec.forcing.copy()))
        if len(self._window) == 2 and self._window[0][0] == 0:
            return  # need three states before the first one-sided stencil
        if len(self._window) == 3:
            if self._window[0][0] == 0 and len(r.E2rec) == 0:
                self._process(0)
            self._process(1)

    def _rates(self, k):
        """Time derivatives of V and forcing at window slot k."""
        (_, V0, F0), (_, V1, F1), (_, V2, F2) = self._window
        dt = self.dt
        if k == 0:
            return (-3 * V0 + 4 * V1 - V2) / (2 * dt), (-3 * F0 + 4 * F1 - F2) / (2 * dt)
        if k == 1:
            return (V2 - V0) / (2 * dt), (F2 - F0) / (2 * dt)
        return (3 * V2 - 4 * V1 + V0) / (2 * dt), (3 * F2 - 4 * F1 + F0) / (2 * dt)

    def _process(self, k):
        g = self.grid
        r = self.report
        _, V, F = self._window[k]
        Vt, Ft = self._rates(k)
        r.phit2.append(energy_l2(Ft, g))
        if not self.recovery:
            r.E2rec.append(float("nan"))
            r.normal_res.append(float("nan"))
            return
        U1 = d_xi1(V[0], g.h1)
        Fsrc = self.rc.source(U1, Vt[2])
        if self._F_prev is not None:
            self._F_int = self._F_int + 0.5 * self.dt * (Fsrc + self._F_prev)
        self._F_prev = Fsrc
        rec, res = normal_derivative_recovery(V, Vt[0], Vt[2], self._F_int, F[0], self.rc)
        r.E2rec.append(energy_l2(rec, g))
        r.normal_res.append(res)

    def finish(self):
        """Flush the last state and evaluate the Gronwall bounds."""
        if len(self._window) == 3:
            self._process(2)
        elif len(self.report.E2rec) < len(self.report.step):
            # fewer than three states in total: no time derivative available
            for _ in range(len(self.report.step) - len(self.report.E2rec)):
                self.report.E2rec.append(float("nan"))
                self.report.normal_res.append(float("nan"))
                self.report.phit2.append(0.0)
        gronwall_check(self.report)
        return self.report


def eulerian_residual(recons, P, grid: Grid, dt: float):
    """Residuals of the Eulerian boundary-layer system at the middle of three snapshots.

    ``recons`` are three consecutive ReconstructionOutput objects (velocities
    attached) spaced by ``dt``. Eulerian derivatives at the images x(xi, t) of
    the nodes use the chain rule d/dx_j = sum_k (F^-1)_kj d/dxi_k; the material
    derivative of u is the Lagrangian second time difference of x.
    """
    r0, r1, r2 = recons
    Finv = np.linalg.inv(r1.F)

    def eul(f):
        f1, f2 = d_xi1(f, grid.h1), d_xi2(f, grid.h2)
        return f1 * Finv[..., 0, 0] + f2 * Finv[..., 1, 0], f1 * Finv[..., 0, 1] + f2 * Finv[..., 1, 1]

    acc = ((r2.x - r1.x) - (r1.x - r0.x)) / dt**2
    dS11_dx, _ = eul(r1.S.a11)
    _, dS12_dy = eul(r1.S.a12)
    momentum = acc - dS11_dx - dS12_dy + P(r1.x, r1.t)
    # periodic part of u for xi1 differences (u itself is periodic)
    du_dx, _ = eul(r1.u)
    _, dv_dy = eul(r1.v)
    divergence = du_dx + dv_dy
    return {
        "momentum": l2_norm(momentum, grid),
        "divergence": l2_norm(divergence, grid),
        "constitutive": 0.0,  # C is constant along particle paths by construction
        "momentum_field": momentum,
        "divergence_field": divergence,
    }
