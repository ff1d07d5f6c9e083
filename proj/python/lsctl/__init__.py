"""Lotka-Sharpe operators, chemostat control and robustness certificates.

Results come back as plain dicts and lists. Configs are dicts with the RunConfig keys.
"""

import json as _json

from . import _core
from ._core import (
    BlowupError,
    CertificateError,
    ConvergenceError,
    DomainError,
    ExtinctionError,
    SetpointError,
    ShapeError,
    decode_doubles,
    encode_doubles,
    ls_integral,
    net_reproduction_number,
    surrogate_forward,
    surrogate_predict,
)

__all__ = [
    "BlowupError", "CertificateError", "ConvergenceError", "DomainError", "ExtinctionError",
    "SetpointError", "ShapeError", "audit_lipschitz", "audit_surrogate", "dataset", "decode_doubles",
    "default_config", "encode_doubles", "equilibrium", "family", "ls_integral",
    "net_reproduction_number", "robustness", "simulate", "solve", "surrogate_forward",
    "surrogate_predict",
]


def _cfg(config):
    return "" if config is None else _json.dumps(config)


def default_config():
    return _json.loads(_core.default_config())


def solve(k, mu, max_age=1.0):
    """Root of the Lotka-Sharpe condition for samples k, mu on a uniform grid over [0, max_age]."""
    return _json.loads(_core.solve(max_age, list(k), list(mu)))


def family(seed, index, max_age=1.0, n_points=201):
    """Family draw from stream (seed, index): params plus k, mu, g samples."""
    return _json.loads(_core.family(seed, index, max_age, n_points))


def equilibrium(config=None):
    return _json.loads(_core.equilibrium(_cfg(config)))


def simulate(config=None):
    """Closed-loop PDE run; per-step series plus the equilibrium scalars."""
    return _json.loads(_core.simulate(_cfg(config)))


def robustness(deltas, config=None, n_ic=20, jobs=1):
    return _json.loads(_core.robustness(_cfg(config), list(deltas), n_ic, jobs))


def dataset(n, seed, max_age=1.0, n_points=201, jobs=1, out=""):
    return _json.loads(_core.dataset(n, seed, max_age, n_points, jobs, str(out)))


def audit_surrogate(model="exact", dataset="", n=100, test_seed=2, delta=0.05):
    return _json.loads(_core.audit_surrogate(str(model), str(dataset), n, test_seed, delta))


def audit_lipschitz(pairs=1000, ordered=100, seed=1, n_points=201, jobs=1):
    return _json.loads(_core.audit_lipschitz(pairs, ordered, seed, n_points, jobs))
