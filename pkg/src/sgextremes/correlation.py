"""Correlation families for the stationary Gaussian sequence.

A correlation model maps a lag k >= 0 to a correlation rho(k), with
rho(0) = 1 and |rho(k)| < 1 for k >= 1.  The three families span the
regimes relevant to weak-dependence limit theory:

* ``Geometric``  -- rho(k) = r**k, exponential decay,
* ``PowerDecay`` -- rho(k) = c * (1+k)**(-a), polynomial decay,
* ``LogDecay``   -- rho(k) = min(0.9, c / ln(k+e)), logarithmic decay.

Geometric and PowerDecay satisfy rho(n) * ln(n) -> 0 (the weak-dependence
condition under which exceedances behave Poisson-like); LogDecay does not
and is provided as a negative control for exploratory runs only.  The
``berman_ok`` attribute records which regime a model belongs to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Geometric",
    "PowerDecay",
    "LogDecay",
    "CorrelationModel",
    "rho",
    "berman_diagnostic",
    "model_from_config",
    "model_to_config",
]

# |rho(k)| must stay strictly below 1 for the Gaussian law to be
# nondegenerate; decay formulas are capped here for extreme parameters.
_RHO_CAP = 0.999


@dataclass(frozen=True)
class Geometric:
    """rho(k) = r**k with r in (-1, 1)."""

    r: float

    berman_ok = True

    def __post_init__(self):
        if not (-1.0 < self.r < 1.0):
            raise ValueError(f"Geometric rate must be in (-1, 1), got {self.r}")

    def rho(self, k):
        k = np.asarray(k)
        return np.float_power(self.r, k)


@dataclass(frozen=True)
class PowerDecay:
    """rho(k) = c * (1+k)**(-a), capped at 0.999, with a > 0, c > 0."""

    a: float
    c: float

    berman_ok = True

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError(f"PowerDecay exponent must be positive, got {self.a}")
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise ValueError(f"PowerDecay scale must be positive, got {self.c}")

    def rho(self, k):
        k = np.asarray(k, dtype=float)
        val = np.minimum(self.c * (1.0 + k) ** (-self.a), _RHO_CAP)
        return np.where(k == 0, 1.0, val)


@dataclass(frozen=True)
class LogDecay:
    """rho(k) = min(0.9, c / ln(k+e)), c > 0.

    Decays too slowly for rho(n) * ln(n) -> 0; kept as a negative control.
    """

    c: float

    berman_ok = False

    def __post_init__(self):
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise ValueError(f"LogDecay scale must be positive, got {self.c}")

    def rho(self, k):
        k = np.asarray(k, dtype=float)
        val = np.minimum(self.c / np.log(k + math.e), 0.9)
        return np.where(k == 0, 1.0, val)


CorrelationModel = Geometric | PowerDecay | LogDecay


def rho(model: CorrelationModel, k):
    """Correlation at lag(s) ``k`` (scalar or array, k >= 0)."""
    karr = np.asarray(k)
    if np.any(karr < 0):
        raise ValueError("lags must be nonnegative")
    out = model.rho(karr)
    if np.isscalar(k) or karr.ndim == 0:
        return float(out)
    return out


def berman_diagnostic(model: CorrelationModel, n_grid, delta: float = 0.0) -> np.ndarray:
    """Tabulate rho(n)*ln(n) and rho(n)*(ln n)**(1+delta) on a lag grid.

    Returns an array with columns (n, rho(n)*ln(n), rho(n)*(ln n)**(1+delta)).
    Vanishing of the second column along n documents the weak-dependence
    hypothesis; the third column is its strengthened form used with bounded
    random scaling (exponent bump delta >= 0 chosen by the caller).
    """
    n_arr = np.asarray(n_grid, dtype=float)
    if n_arr.ndim != 1 or len(n_arr) == 0:
        raise ValueError("n_grid must be a nonempty 1-D sequence")
    if np.any(n_arr < 2):
        raise ValueError("all grid entries must be >= 2")
    if np.any(np.diff(n_arr) <= 0):
        raise ValueError("n_grid must be strictly increasing")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    r = model.rho(n_arr)
    ln = np.log(n_arr)
    return np.column_stack([n_arr, r * ln, r * ln ** (1.0 + delta)])


# config tags used by CLI/JSON configs
_TAGS = {"geometric": Geometric, "power": PowerDecay, "log": LogDecay}


def model_from_config(cfg: dict) -> CorrelationModel:
    """Build a correlation model from a {"family": tag, ...params} mapping."""
    try:
        family = cfg["family"]
    except (KeyError, TypeError):
        raise ValueError("correlation config needs a 'family' tag") from None
    try:
        cls = _TAGS[family]
    except KeyError:
        raise ValueError(
            f"unknown correlation family {family!r}; expected one of {sorted(_TAGS)}"
        ) from None
    params = {k: v for k, v in cfg.items() if k != "family"}
    try:
        return cls(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for family {family!r}: {exc}") from None


def model_to_config(model: CorrelationModel) -> dict:
    """Inverse of :func:`model_from_config`."""
    for tag, cls in _TAGS.items():
        if isinstance(model, cls):
            cfg = {"family": tag}
            cfg.update({f: getattr(model, f) for f in model.__dataclass_fields__})
            return cfg
    raise TypeError(f"not a correlation model: {model!r}")
