"""Problem data for one boundary-layer run, its validation and a few presets."""
from dataclasses import dataclass, field, replace

import numpy as np

from . import profiles
from .errors import ValidationError
from .grid import Grid
from .profiles import ProfileSpec
from .psd import PSD_TOL, SymTensor2, det2

WALL_TOL = 1e-10
FARFIELD_U_TOL = 1e-8
FARFIELD_C_TOL = 1e-6
PERIOD_TOL = 1e-12


@dataclass(frozen=True)
class Numerics:
    cfl: float = 0.5
    sigma: float = 0.0
    picard_iters: int = 0
    picard_tol: float = 1e-10
    snapshot_stride: int = 0
    C0: float = 1e-3
    dissipation: float = 1.0 / 32.0


@dataclass(frozen=True)
class Scenario:
    name: str = "rest"
    u0: ProfileSpec = field(default_factory=ProfileSpec)
    u_inf: ProfileSpec = field(default_factory=ProfileSpec)
    C: ProfileSpec = field(default_factory=lambda: ProfileSpec("identity"))
    C11_inf: ProfileSpec = field(default_factory=lambda: ProfileSpec("constant"))
    P: ProfileSpec = field(default_factory=ProfileSpec)
    T: float = 1.0
    grid: Grid = field(default_factory=lambda: Grid(64, 64, 8.0))
    numerics: Numerics = field(default_factory=Numerics)

    # evaluation on a grid; ``grid`` defaults to the scenario's own

    def u0_field(self, grid=None):
        g = grid or self.grid
        return profiles.evaluate("u0", self.u0, *g.mesh)

    def u_inf_line(self, grid=None):
        g = grid or self.grid
        return profiles.evaluate("u_inf", self.u_inf, g.xi1)

    def C_field(self, grid=None) -> SymTensor2:
        g = grid or self.grid
        return profiles.evaluate("C", self.C, *g.mesh)

    def C11_inf_line(self, grid=None):
        g = grid or self.grid
        return profiles.evaluate("C11_inf", self.C11_inf, g.xi1)

    def C11_inf_at(self, xi1):
        return profiles.evaluate("C11_inf", self.C11_inf, np.asarray(xi1, dtype=float))

    def pressure(self):
        return profiles.pressure_function(self.P)

    def with_grid(self, n1=None, n2=None, L=None):
        g = self.grid
        return replace(self, grid=Grid(n1 or g.n1, n2 or g.n2, L or g.L))

    def with_numerics(self, **kw):
        return replace(self, numerics=replace(self.numerics, **kw))

    def validation_failures(self):
        out = []
        for family, spec in self.profile_specs().items():
            try:
                profiles.resolve_params(family, spec)
            except KeyError as exc:
                out.append(str(exc.args[0]))
        if out:
            return out
        num = self.numerics
        if not self.T > 0:
            out.append(f"horizon T must be positive, got {self.T}")
        if num.sigma < 0:
            out.append(f"sigma must be >= 0, got {num.sigma}")
        if not 0 <= num.picard_iters <= 3:
            out.append(f"picard_iters must lie in [0, 3], got {num.picard_iters}")
        if num.snapshot_stride < 0:
            out.append("snapshot_stride must be >= 0")

        g = self.grid
        u0 = self.u0_field()
        uinf = self.u_inf_line()
        wall = float(np.max(np.abs(u0[:, 0])))
        if wall > WALL_TOL:
            out.append(f"u0 nonzero at wall (max |u0(xi1, 0)| = {wall:.3g})")
        top = float(np.max(np.abs(u0[:, -1] - uinf)))
        if top > FARFIELD_U_TOL:
            out.append(f"u0 does not reach u_inf at xi2 = L (max deviation {top:.3g})")

        C = self.C_field()
        psd_ok = (C.a11 >= -PSD_TOL) & (C.a22 >= -PSD_TOL) & (det2(C) >= -PSD_TOL)
        if not np.all(psd_ok):
            out.append(f"C fails the PSD test at {int(np.size(psd_ok) - np.count_nonzero(psd_ok))} nodes")
        c22 = float(np.min(C.a22))
        if c22 < num.C0:
            out.append(f"min C22 = {c22:.3g} below C0 = {num.C0:g}")
        ctop = float(np.max(np.abs(C.a11[:, -1] - self.C11_inf_line())))
        if ctop > FARFIELD_C_TOL:
            out.append(f"C11 does not reach C11_inf at xi2 = L (max deviation {ctop:.3g})")
        if float(np.min(self.C11_inf_line())) < 0:
            out.append("C11_inf must be nonnegative")

        # period-1 in xi1: compare against the mesh shifted by one period
        x1, x2 = g.mesh
        shifted = [
            ("u0", profiles.evaluate("u0", self.u0, x1 + 1.0, x2) - u0),
            ("u_inf", profiles.evaluate("u_inf", self.u_inf, g.xi1 + 1.0) - uinf),
            ("C11_inf", self.C11_inf_at(g.xi1 + 1.0) - self.C11_inf_line()),
        ]
        Cs = profiles.evaluate("C", self.C, x1 + 1.0, x2)
        shifted.append(("C", np.abs(Cs.a11 - C.a11) + np.abs(Cs.a12 - C.a12) + np.abs(Cs.a22 - C.a22)))
        P = self.pressure()
        probe = np.linspace(-1.5, 1.5, 13)
        shifted.append(("P", P(probe + 1.0, 0.37) - P(probe, 0.37)))
        for name, diff in shifted:
            if float(np.max(np.abs(diff))) > PERIOD_TOL:
                out.append(f"{name} profile is not 1-periodic in xi1")
        return out

    def validate(self):
        failures = self.validation_failures()
        if failures:
            raise ValidationError(failures)
        return self

    def profile_specs(self):
        return {"u0": self.u0, "u_inf": self.u_inf, "C": self.C, "C11_inf": self.C11_inf, "P": self.P}


def rest(n=64, L=8.0, T=1.0, C=None) -> Scenario:
    return Scenario(name="rest", C=C or ProfileSpec("identity"), T=T, grid=Grid(n, n, L))


def eps_sine(eps=0.01, n=64, L=8.0, T=0.5) -> Scenario:
    """C = I, far-field velocity eps*sin(2 pi xi1), wall layer of unit thickness."""
    return Scenario(
        name="eps_sine",
        u0=ProfileSpec("shear_decay", {"eps": eps}),
        u_inf=ProfileSpec("sine", {"eps": eps}),
        T=T,
        grid=Grid(n, n, L),
    )


def varying(n=64, L=8.0, T=0.5) -> Scenario:
    """Spatially varying C with an xi2 dependence, a wall jet and a pressure gradient.

    The data are compatible at the wall corner: C is uniform on the wall and the
    pressure gradient starts from zero, so Phi vanishes there at t = 0.
    """
    return Scenario(
        name="varying",
        u0=ProfileSpec("shear_decay", {"eps": 0.01, "jet": 0.05}),
        u_inf=ProfileSpec("sine", {"eps": 0.01}),
        C=ProfileSpec("varying"),
        C11_inf=ProfileSpec("constant", {"value": 2.0}),
        P=ProfileSpec("sine", {"amp": 0.05, "omega": 2.0, "phase": float(np.pi / 2)}),
        T=T,
        grid=Grid(n, n, L),
    )


def rank_one(n=64, L=8.0, T=0.5) -> Scenario:
    """Merely semidefinite C (det C = 0); far-field C11 vanishes."""
    return Scenario(
        name="rank_one",
        u0=ProfileSpec("shear_decay", {"eps": 0.0, "jet": 0.02}),
        C=ProfileSpec("rank_one", {"shear": 0.2}),
        C11_inf=ProfileSpec("constant", {"value": 0.0}),
        P=ProfileSpec("sine", {"amp": 0.05, "omega": 2.0, "phase": float(np.pi / 2)}),
        T=T,
        grid=Grid(n, n, L),
    )


def suite(n=64, T=0.5):
    return [rest(n=n, T=T), eps_sine(n=n, T=T), varying(n=n, T=T), rank_one(n=n, T=T)]
