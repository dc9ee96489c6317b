"""Flat ``key = value`` scenario files.

::

    # comments run to the end of the line
    name = eps_sine
    T = 0.5
    grid.n1 = 128
    profiles.u0 = shear_decay
    profiles.u0.eps = 0.01
    numerics.cfl = 0.5
    sigma.values = 0.2, 0.1, 0.05, 0.025

Keys that are not given keep the defaults of :class:`Scenario`. Study keys
(``convergence.*``, ``sigma.*``) only matter to the matching CLI command.
"""
from dataclasses import dataclass, field, fields, replace

from . import profiles
from .errors import ParseError
from .grid import Grid
from .profiles import ProfileSpec
from .scenario import Numerics, Scenario

FAMILIES = ("u0", "u_inf", "C", "C11_inf", "P")
GRID_KEYS = {"n1": int, "n2": int, "L": float}
NUMERIC_KEYS = {
    "cfl": float,
    "sigma": float,
    "picard_iters": int,
    "picard_tol": float,
    "snapshot_stride": int,
    "C0": float,
    "dissipation": float,
}
CASES = ("potential", "sine_layer", "linear", "zero")


@dataclass(frozen=True)
class ConvergenceSpec:
    case: str = "potential"
    grids: tuple = (64, 128, 256)
    cfl: float = 0.5
    T: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    convergence: ConvergenceSpec = field(default_factory=ConvergenceSpec)
    sigmas: tuple = (0.2, 0.1, 0.05, 0.025)


def _number(text, kind, line):
    try:
        if kind is int:
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(text)
    except ValueError:
        raise ParseError(f"expected {kind.__name__}, got {text!r}", line) from None


def _number_list(text, kind, line):
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ParseError("expected a comma-separated list", line)
    return tuple(_number(s, kind, line) for s in items)


def _lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"expected 'key = value', got {body!r}", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not key or not value:
            raise ParseError(f"empty key or value in {body!r}", lineno)
        yield lineno, key, value


def read_config(text: str, validate=True) -> RunConfig:
    """Parse a config document; raises ParseError (with the line) or ValidationError."""
    seen = {}
    top = {}
    grid = {}
    numerics = {}
    fam_names = {}
    fam_params = {f: {} for f in FAMILIES}
    param_lines = {}
    conv = {}
    sigmas = None
    for lineno, key, value in _lines(text):
        if key in seen:
            raise ParseError(f"duplicate key {key!r} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        head, _, rest = key.partition(".")
        if key == "name":
            top["name"] = value
        elif key == "T":
            top["T"] = _number(value, float, lineno)
        elif head == "grid" and rest in GRID_KEYS:
            grid[rest] = _number(value, GRID_KEYS[rest], lineno)
        elif head == "numerics" and rest in NUMERIC_KEYS:
            numerics[rest] = _number(value, NUMERIC_KEYS[rest], lineno)
        elif head == "profiles":
            fam, _, param = rest.partition(".")
            if fam not in FAMILIES:
                raise ParseError(f"unknown profile family {fam!r} (known: {', '.join(FAMILIES)})", lineno)
            if param:
                fam_params[fam][param] = _number(value, float, lineno)
                param_lines[(fam, param)] = lineno
            else:
                if value not in profiles.FAMILIES[fam]:
                    known = ", ".join(sorted(profiles.FAMILIES[fam]))
                    raise ParseError(f"unknown {fam} profile {value!r} (known: {known})", lineno)
                fam_names[fam] = value
        elif key == "convergence.case":
            if value not in CASES:
                raise ParseError(f"unknown manufactured case {value!r} (known: {', '.join(CASES)})", lineno)
            conv["case"] = value
        elif key == "convergence.grids":
            conv["grids"] = _number_list(value, int, lineno)
        elif key in ("convergence.cfl", "convergence.T"):
            conv[rest] = _number(value, float, lineno)
        elif key == "sigma.values":
            sigmas = _number_list(value, float, lineno)
        else:
            raise ParseError(f"unknown key {key!r}", lineno)

    base = Scenario()
    specs = {}
    for fam in FAMILIES:
        name = fam_names.get(fam, getattr(base, fam).name)
        spec = ProfileSpec(name, fam_params[fam])
        try:
            profiles.resolve_params(fam, spec)
        except KeyError as exc:
            bad = sorted(set(fam_params[fam]) - set(profiles.FAMILIES[fam][name][1]))
            raise ParseError(str(exc.args[0]), param_lines.get((fam, bad[0])) if bad else None) from None
        specs[fam] = spec
    g0 = base.grid
    try:
        g = Grid(grid.get("n1", g0.n1), grid.get("n2", g0.n2), grid.get("L", g0.L))
    except ValueError as exc:
        line = min(seen.get(f"grid.{k}", 10**9) for k in GRID_KEYS)
        raise ParseError(str(exc), line if line < 10**9 else None) from None
    scenario = replace(base, grid=g, numerics=replace(base.numerics, **numerics), **top, **specs)
    if validate:
        scenario.validate()
    cfg = RunConfig(scenario, ConvergenceSpec(**conv))
    return replace(cfg, sigmas=sigmas) if sigmas is not None else cfg


def parse_config(text: str, validate=True) -> Scenario:
    return read_config(text, validate).scenario


def _fmt(value):
    return repr(value) if isinstance(value, float) else str(value)


def serialize_config(scenario: Scenario) -> str:
    """Inverse of :func:`parse_config`; every field is written out explicitly."""
    lines = [f"name = {scenario.name}", f"T = {_fmt(float(scenario.T))}"]
    g = scenario.grid
    lines += [f"grid.n1 = {g.n1}", f"grid.n2 = {g.n2}", f"grid.L = {_fmt(float(g.L))}"]
    for f in fields(Numerics):
        value = getattr(scenario.numerics, f.name)
        lines.append(f"numerics.{f.name} = {_fmt(value)}")
    for fam in FAMILIES:
        spec = getattr(scenario, fam)
        lines.append(f"profiles.{fam} = {spec.name}")
        for k in sorted(spec.params):
            lines.append(f"profiles.{fam}.{k} = {_fmt(float(spec.params[k]))}")
    return "\n".join(lines) + "\n"
