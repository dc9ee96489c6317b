"""Lagrangian boundary-layer solver for the upper convected Maxwell fluid.

The wall-layer problem is integrated as a first-order symmetric hyperbolic
system on the periodic half-strip, then mapped back to Eulerian fields.
"""
from .config import parse_config, read_config, serialize_config
from .errors import UCMError
from .grid import Grid
from .hyperbolic import prepare, run
from .profiles import ProfileSpec
from .psd import SymTensor2, psd_sqrt
from .scenario import Numerics, Scenario

__all__ = [
    "Grid",
    "Numerics",
    "ProfileSpec",
    "Scenario",
    "SymTensor2",
    "UCMError",
    "parse_config",
    "prepare",
    "psd_sqrt",
    "read_config",
    "run",
    "serialize_config",
]
