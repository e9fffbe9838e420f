"""The two random-scaling laws: Weibullian-tailed and bounded regular-varying.

``Weibullian(L, p, alpha, C)`` realizes the survival function

    F-bar(u) = min(1, C * u**alpha * exp(-L * u**p))

on the region where that expression is nonincreasing.  To the left of that
region the survival is 1; if the expression is below 1 at the region's left
edge u0, the deficit sits as an atom at u0.  The atom is irrelevant for any
tail computation but keeps inverse-transform sampling exact.

``Bounded(gamma)`` has upper endpoint 1 and survival F-bar(1 - x) = x**gamma
for x in [0, 1] -- the canonical law whose survival is exactly regularly
varying at the endpoint with index gamma.

Both laws expose exact survival and quantile functions and a reproducible
sampler driven by (seed, stream_id) Philox streams, matching the stream
contract of :mod:`sgextremes.gaussian`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.random import Generator, Philox
from scipy.optimize import brentq

__all__ = [
    "Weibullian",
    "Bounded",
    "ScaleDistribution",
    "NoConvergence",
    "survival",
    "quantile",
    "sample_scales",
    "dist_from_config",
    "dist_to_config",
]

_QUANTILE_BISECTIONS = 80  # bracket shrink 2**-80: far below 1e-12 relative
_BRACKET_GROWTH_CAP = 200


class NoConvergence(RuntimeError):
    """Quantile root-finding exceeded its iteration cap."""


def _stream(seed: int, stream_id: int) -> Generator:
    return Generator(Philox(key=np.array([seed, stream_id], dtype=np.uint64)))


@dataclass(frozen=True)
class Weibullian:
    """Scale law with survival min(1, C * u**alpha * exp(-L * u**p))."""

    L: float
    p: float
    alpha: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        for name in ("L", "p", "C"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"Weibullian {name} must be positive, got {v}")
        if not math.isfinite(self.alpha):
            raise ValueError(f"Weibullian alpha must be finite, got {self.alpha}")

    def _h(self, u):
        # the raw tail expression C * u**alpha * exp(-L * u**p), u > 0
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return self.C * u**self.alpha * np.exp(-self.L * u**self.p)

    def _log_h(self, u: float) -> float:
        return math.log(self.C) + self.alpha * math.log(u) - self.L * u**self.p

    @cached_property
    def _edge(self) -> tuple[float, float]:
        """(u0, q0): left edge of the strict-decrease region and F-bar(u0).

        The tail expression peaks at u_peak = (max(alpha,0)/(L*p))**(1/p);
        u0 is u_peak when the peak value is <= 1 (leaving an atom of mass
        1 - q0 at u0), else the point beyond the peak where the expression
        crosses 1 (no atom, q0 = 1).
        """
        L, p, alpha, C = self.L, self.p, self.alpha, self.C
        u_peak = 0.0 if alpha <= 0 else (alpha / (L * p)) ** (1.0 / p)
        if alpha < 0:
            peak_val = math.inf
        elif alpha == 0:
            peak_val = C
        else:
            peak_val = C * u_peak**alpha * math.exp(-alpha / p)
        if peak_val <= 1.0:
            return u_peak, peak_val
        # find the crossing h(u) = 1 beyond the peak
        lo = max(u_peak, 1e-300)
        if alpha < 0:
            lo = 1.0
            for _ in range(_BRACKET_GROWTH_CAP):
                if self._log_h(lo) > 0:
                    break
                lo /= 2.0
            else:
                raise NoConvergence(f"cannot bracket the survival edge of {self!r}")
        hi = max(2.0 * lo, 1.0)
        for _ in range(_BRACKET_GROWTH_CAP):
            if self._log_h(hi) < 0:
                break
            hi *= 2.0
        else:
            raise NoConvergence(f"cannot bracket the survival edge of {self!r}")
        u0 = brentq(self._log_h, lo, hi, xtol=1e-300, rtol=4e-16, maxiter=200)
        return u0, 1.0

    def survival(self, u):
        """P(S > u), exact per formula; valid for u >= 0."""
        u0, _ = self._edge
        uarr = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.ones_like(uarr)
        mask = uarr >= u0
        if np.any(mask):
            out[mask] = np.minimum(self._h(uarr[mask]), 1.0)
        if np.isscalar(u) or np.asarray(u).ndim == 0:
            return float(out[0])
        return out

    def quantile(self, q):
        """Smallest u with P(S > u) <= q, for q in (0, 1]."""
        u0, q0 = self._edge
        qarr = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any(qarr <= 0.0) or np.any(qarr > 1.0):
            raise ValueError("quantile argument must lie in (0, 1]")
        out = np.full(qarr.shape, u0)
        solve = qarr < q0
        if np.any(solve):
            qs = qarr[solve]
            if self.alpha == 0.0:
                u = (np.log(self.C / qs) / self.L) ** (1.0 / self.p)
            else:
                u = self._quantile_bisect(qs, u0)
            out[solve] = u
        if np.isscalar(q) or np.asarray(q).ndim == 0:
            return float(out[0])
        return out

    def _quantile_bisect(self, q: np.ndarray, u0: float) -> np.ndarray:
        # monotone past u0, so plain bisection converges unconditionally;
        # the fixed iteration count keeps results batch-independent
        L, p, alpha, C = self.L, self.p, self.alpha, self.C
        target = np.log(q)

        def logh(u):
            with np.errstate(divide="ignore", over="ignore"):
                return math.log(C) + alpha * np.log(u) - L * u**p

        lo = np.full(q.shape, max(u0, 1e-300))
        # ignore the power-law factor for the initial upper guess
        hi = np.maximum((np.maximum(math.log(C) - target, 1e-12) / L) ** (1.0 / p), lo * 2)
        for _ in range(_BRACKET_GROWTH_CAP):
            bad = logh(hi) > target
            if not np.any(bad):
                break
            hi = np.where(bad, hi * 2.0, hi)
        else:
            raise NoConvergence(f"quantile bracket growth failed for {self!r}")
        for _ in range(_QUANTILE_BISECTIONS):
            mid = 0.5 * (lo + hi)
            high_side = logh(mid) > target
            lo = np.where(high_side, mid, lo)
            hi = np.where(high_side, hi, mid)
        return 0.5 * (lo + hi)

    def sample(self, count: int, seed: int = 0, stream_id: int = 0) -> np.ndarray:
        """count i.i.d. draws by inverse transform, reproducible by stream."""
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        u = 1.0 - _stream(seed, stream_id).random(count)  # uniform on (0, 1]
        return self.quantile(u)


@dataclass(frozen=True)
class Bounded:
    """Scale law on [0, 1] with survival F-bar(1 - x) = x**gamma."""

    gamma: float

    def __post_init__(self):
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"Bounded gamma must be positive, got {self.gamma}")

    # no atom, no flat region: quantile covers (0, 1] directly
    @property
    def _edge(self) -> tuple[float, float]:
        return 0.0, 1.0

    def survival(self, u):
        uarr = np.asarray(u, dtype=float)
        out = np.clip(1.0 - uarr, 0.0, 1.0) ** self.gamma
        if np.isscalar(u) or uarr.ndim == 0:
            return float(out)
        return out

    def quantile(self, q):
        qarr = np.asarray(q, dtype=float)
        if np.any(qarr <= 0.0) or np.any(qarr > 1.0):
            raise ValueError("quantile argument must lie in (0, 1]")
        out = 1.0 - qarr ** (1.0 / self.gamma)
        if qarr.ndim == 0 or np.isscalar(q):
            return float(out)
        return out

    def sample(self, count: int, seed: int = 0, stream_id: int = 0) -> np.ndarray:
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        u = 1.0 - _stream(seed, stream_id).random(count)
        return self.quantile(u)


ScaleDistribution = Weibullian | Bounded


def survival(dist: ScaleDistribution, u):
    """P(S > u) for the given scale law."""
    return dist.survival(u)


def quantile(dist: ScaleDistribution, q):
    """Smallest u with P(S > u) <= q."""
    return dist.quantile(q)


def sample_scales(dist: ScaleDistribution, count: int, seed: int = 0, stream_id: int = 0):
    """count i.i.d. scale draws, reproducible by (seed, stream_id)."""
    return dist.sample(count, seed=seed, stream_id=stream_id)


def dist_from_config(cfg: dict) -> ScaleDistribution:
    """Build a scale law from {"kind": "weibullian"|"bounded", ...params}."""
    try:
        kind = cfg["kind"]
    except (KeyError, TypeError):
        raise ValueError("scale config needs a 'kind' tag") from None
    params = {k: v for k, v in cfg.items() if k != "kind"}
    try:
        if kind == "weibullian":
            return Weibullian(
                L=params.pop("L"),
                p=params.pop("p"),
                alpha=params.pop("alpha", 0.0),
                C=params.pop("Cc", 1.0),
                **params,
            )
        if kind == "bounded":
            return Bounded(gamma=params.pop("gamma"), **params)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad parameters for scale kind {kind!r}: {exc}") from None
    raise ValueError(f"unknown scale kind {kind!r}; expected 'weibullian' or 'bounded'")


def dist_to_config(dist: ScaleDistribution) -> dict:
    """Inverse of :func:`dist_from_config`."""
    if isinstance(dist, Weibullian):
        return {"kind": "weibullian", "L": dist.L, "p": dist.p, "alpha": dist.alpha, "Cc": dist.C}
    if isinstance(dist, Bounded):
        return {"kind": "bounded", "gamma": dist.gamma}
    raise TypeError(f"not a scale distribution: {dist!r}")
