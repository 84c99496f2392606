"""Acoustic wave solver with perfectly matched layers.

Experiment functions take a configuration as a dict (the same keys as the
JSON config files) or as a JSON string, overlaid on the named profile.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    NumericalError,
    UnsupportedError,
    damping_strength,
    gauss_legendre_rule,
    gauss_lobatto_nodes,
    laplace_verify,
    manufactured_convergence,
    spectral_identity_residual,
    stretch,
    tolerance,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "UnsupportedError",
    "assemble",
    "config",
    "convergence",
    "damping_strength",
    "gauss_legendre_rule",
    "gauss_lobatto_nodes",
    "laplace_verify",
    "longtime",
    "manufactured_convergence",
    "pml_error",
    "simulate",
    "spectral_identity_residual",
    "stretch",
    "tolerance",
]


def _text(cfg):
    if cfg is None:
        return ""
    if isinstance(cfg, str):
        return cfg
    return json.dumps(cfg)


def config(cfg=None, profile="small"):
    """Effective configuration as a dict, with every default filled in."""
    return json.loads(_core.normalize_config(_text(cfg), profile))


def assemble(cfg=None, profile="small"):
    """Operators as (data, indices, indptr, shape) CSR tuples, plus node coordinates."""
    return _core.assemble(_text(cfg), profile)


def simulate(cfg=None, profile="small"):
    return _core.simulate(_text(cfg), profile)


def pml_error(cfg=None, profile="small"):
    return _core.pml_error(_text(cfg), profile)


def longtime(cfg=None, profile="small"):
    return _core.longtime(_text(cfg), profile)


def convergence(cfg=None, profile="small"):
    return _core.convergence(_text(cfg), profile)
