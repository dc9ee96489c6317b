"""Named analytic profiles for scenario data.

Each family maps a profile name to a function of the grid coordinates and a
parameter dict. Defaults are filled in by :func:`resolve_params`, so a
``ProfileSpec`` carries only what the user overrides.
"""
from dataclasses import dataclass, field

import numpy as np

from .psd import SymTensor2

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProfileSpec:
    name: str = "zero"
    params: dict = field(default_factory=dict)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))


# --- u_inf(xi1) -------------------------------------------------------------

def _uinf_zero(xi1):
    return np.zeros_like(xi1)


def _uinf_sine(xi1, eps, k):
    return eps * np.sin(TWO_PI * k * xi1)


# --- u0(xi1, xi2) -----------------------------------------------------------

def _u0_zero(xi1, xi2):
    return np.zeros(np.broadcast(xi1, xi2).shape)


def _u0_shear_decay(xi1, xi2, eps, k, delta, jet):
    # vanishes at the wall, tends to eps*sin(2 pi k xi1) faster than any exponential
    s2 = (xi2 / delta) ** 2
    g = np.exp(-s2)
    wave = np.sin(TWO_PI * k * xi1)
    return eps * wave * (1.0 - g) + jet * wave * s2 * g


def _u0_plug(xi1, xi2, eps, k):
    # impulsive start: u0 = u_inf everywhere, which slips at the wall
    return eps * np.sin(TWO_PI * k * xi1) + 0.0 * xi2


# --- C(xi1, xi2) ------------------------------------------------------------

def _c_identity(xi1, xi2):
    one = np.ones(np.broadcast(xi1, xi2).shape)
    return SymTensor2(one, 0.0 * one, one.copy())


def _c_constant(xi1, xi2, c11, c12, c22):
    one = np.ones(np.broadcast(xi1, xi2).shape)
    return SymTensor2(c11 * one, c12 * one, c22 * one)


def _c_varying(xi1, xi2, c11_inf, amp, shear, c22, width):
    # envelope s^2 exp(1 - s^2) peaks at 1 for s = 1 and is flat to second order
    # on the wall, so C is uniform there and the wall starts in equilibrium
    s2 = (xi2 / width) ** 2
    g = s2 * np.exp(1.0 - s2)
    c11 = c11_inf + amp * np.sin(TWO_PI * xi1) * g
    c12 = shear * np.cos(TWO_PI * xi1) * g
    c22v = c22 * (1.0 + 0.25 * np.sin(TWO_PI * xi1) * g)
    return SymTensor2(c11, c12, c22v)


def _c_rank_one(xi1, xi2, shear, width):
    # C = v v^T with v = (s, 1): only semidefinite, det C = 0 everywhere; the
    # same wall-flat envelope as the varying family
    s2 = (xi2 / width) ** 2
    s = shear * np.sin(TWO_PI * xi1) * s2 * np.exp(1.0 - s2)
    return SymTensor2(s * s, s, np.ones_like(s))


# --- C11_inf(xi1) -----------------------------------------------------------

def _c11inf_constant(xi1, value):
    return value * np.ones_like(xi1)


def _c11inf_sine(xi1, mean, amp, k):
    return mean + amp * np.sin(TWO_PI * k * xi1)


# --- P(x, t) ----------------------------------------------------------------

def _p_zero(x, t):
    return np.zeros_like(x)


def _p_constant(x, t, p0):
    return p0 * np.ones_like(x)


def _p_sine(x, t, amp, k, omega, phase):
    # phase = pi/2 switches the forcing on from zero at t = 0
    return amp * np.sin(TWO_PI * k * x) * np.cos(omega * t - phase)


FAMILIES = {
    "u_inf": {
        "zero": (_uinf_zero, {}),
        "sine": (_uinf_sine, {"eps": 0.01, "k": 1}),
    },
    "u0": {
        "zero": (_u0_zero, {}),
        "shear_decay": (_u0_shear_decay, {"eps": 0.01, "k": 1, "delta": 1.0, "jet": 0.0}),
        "plug": (_u0_plug, {"eps": 0.01, "k": 1}),
    },
    "C": {
        "identity": (_c_identity, {}),
        "constant": (_c_constant, {"c11": 1.0, "c12": 0.0, "c22": 1.0}),
        "varying": (
            _c_varying,
            {"c11_inf": 2.0, "amp": 0.5, "shear": 0.2, "c22": 1.0, "width": 1.0},
        ),
        "rank_one": (_c_rank_one, {"shear": 0.5, "width": 1.0}),
    },
    "C11_inf": {
        "constant": (_c11inf_constant, {"value": 1.0}),
        "sine": (_c11inf_sine, {"mean": 2.0, "amp": 0.0, "k": 1}),
    },
    "P": {
        "zero": (_p_zero, {}),
        "constant": (_p_constant, {"p0": 0.0}),
        "sine": (_p_sine, {"amp": 0.0, "k": 1, "omega": 0.0, "phase": 0.0}),
    },
}


def resolve_params(family: str, spec: ProfileSpec) -> dict:
    try:
        _, defaults = FAMILIES[family][spec.name]
    except KeyError:
        known = ", ".join(sorted(FAMILIES.get(family, {})))
        raise KeyError(f"unknown {family} profile {spec.name!r} (known: {known})") from None
    unknown = set(spec.params) - set(defaults)
    if unknown:
        raise KeyError(f"{family} profile {spec.name!r} has no parameter(s) {sorted(unknown)}")
    params = dict(defaults)
    params.update(spec.params)
    return params


def evaluate(family: str, spec: ProfileSpec, *args):
    fn, _ = FAMILIES[family][spec.name]
    return fn(*args, **resolve_params(family, spec))


def pressure_function(spec: ProfileSpec):
    """Bind a pressure-gradient profile to a callable ``P(x, t)``."""
    fn, _ = FAMILIES["P"][spec.name]
    params = resolve_params("P", spec)

    def P(x, t):
        return fn(np.asarray(x, dtype=float), t, **params)

    return P
