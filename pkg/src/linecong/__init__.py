"""Singularities of line congruences: classification, ridges, principal lines and focal sets."""

from .classify import PointReport, classify_point, scan_domain
from .config import DEFAULT_NUMERICS, DEFAULT_TOL, Numerics, Tolerances
from .congruence import Domain, LineCongruence, reparametrize, shape_at
from .errors import LineCongruenceError
from .expr import parse, pretty
from .formats import load_config, parse_config
from .jets import Jet

__version__ = "0.1.0"

__all__ = ["DEFAULT_NUMERICS", "DEFAULT_TOL", "Domain", "Jet", "LineCongruence", "LineCongruenceError",
           "Numerics", "PointReport", "Tolerances", "classify_point", "load_config", "parse", "parse_config",
           "pretty", "reparametrize", "scan_domain", "shape_at"]
