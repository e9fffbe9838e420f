"""Product-tail asymptotics, norming constants, and the quadrature oracle.

For S with a Weibullian-type tail C * u**alpha * exp(-L * u**p) and X
standard normal, the product Y = S * X is again Weibullian-type:

    P(Y > u) ~ (2+p)**(-1/2) * C * Q**(-alpha) * u**(2*alpha/(2+p))
               * exp(-T * u**(2*p/(2+p)))

with Q = (L*p)**(1/(2+p)) and T = Q**2/2 + L*Q**(-p).  This module
evaluates that closed form, the matching linear norming constants
(a_n, b_n), and the analogous asymptotic for products S * Z against a
Weibull-tailed Z.  Each closed form is paired with an independent
numerical oracle: P(S*X > u) = E[Phi-bar(u/S)] computed by adaptive
quadrature over the quantile domain of S, which is robust to atoms in
the scale law and to scale laws concentrating near a finite endpoint.

Levels u_n(x) solving n * P(Y > u) = exp(-x) are found by bracketed
root-finding on the oracle, so they carry no asymptotic error beyond the
quadrature tolerance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq
from scipy.special import erfc, erfcinv

from .scaling import Bounded, ScaleDistribution, Weibullian

__all__ = [
    "QuadratureFailure",
    "NoBracket",
    "normal_sf",
    "normal_isf",
    "ProductConstants",
    "product_constants",
    "product_tail_asymptotic",
    "product_tail_oracle",
    "ProductTailReport",
    "product_tail_report",
    "asymptotic_level",
    "NormingConstants",
    "norming_constants",
    "solve_level",
    "ScaledProductConstants",
    "scaled_product_constants",
    "scaled_product_tail_asymptotic",
    "tail_equivalence_check",
]

_SQRT2 = math.sqrt(2.0)
# upper cutoff of the log-quantile integration variable; exp(-700) is far
# below any representable contribution of interest (tails down to 1e-300)
_V_MAX = 700.0
_V_LADDER = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 640.0)
_BRENTQ_RTOL = 4.0 * np.finfo(float).eps


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class NoBracket(RuntimeError):
    """The level equation has no solution in the searchable range."""


def normal_sf(x):
    """Upper normal tail Phi-bar(x) = P(N(0,1) > x), accurate into deep tails."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out)
    return out


def normal_isf(q: float) -> float:
    """Inverse of :func:`normal_sf`."""
    return float(_SQRT2 * erfcinv(2.0 * q))


# --- closed-form constants ---------------------------------------------------

@dataclass(frozen=True)
class ProductConstants:
    """Constants of the product tail: Q = (L*p)**(1/(2+p)), T = Q**2/2 + L*Q**-p."""

    Q: float
    T: float


def product_constants(L: float, p: float) -> ProductConstants:
    if not (L > 0 and p > 0):
        raise ValueError(f"need L > 0 and p > 0, got L={L}, p={p}")
    Q = (L * p) ** (1.0 / (2.0 + p))
    T = 0.5 * Q * Q + L * Q ** (-p)
    return ProductConstants(Q=Q, T=T)


def product_tail_asymptotic(L: float, p: float, alpha: float, C: float, u):
    """Closed-form tail of S*X for Weibullian S with power prefactor C*u**alpha."""
    c = product_constants(L, p)
    u = np.asarray(u, dtype=float)
    out = (
        (2.0 + p) ** -0.5
        * C
        * c.Q ** (-alpha)
        * u ** (2.0 * alpha / (2.0 + p))
        * np.exp(-c.T * u ** (2.0 * p / (2.0 + p)))
    )
    if out.ndim == 0:
        return float(out)
    return out


def asymptotic_level(L: float, p: float, alpha: float, C: float, prob: float) -> float:
    """The u at which :func:`product_tail_asymptotic` equals ``prob``."""
    if not (0.0 < prob < 1.0):
        raise ValueError(f"prob must be in (0, 1), got {prob}")

    def f(u):
        return math.log(product_tail_asymptotic(L, p, alpha, C, u)) - math.log(prob)

    lo, hi = 1e-8, 1.0
    for _ in range(200):
        if f(hi) < 0:
            break
        hi *= 2.0
    else:
        raise NoBracket(f"asymptotic never drops below {prob}")
    for _ in range(200):
        if f(lo) > 0:
            break
        lo /= 2.0
    else:
        raise NoBracket(f"asymptotic stays below {prob} on the whole range")
    return brentq(f, lo, hi, xtol=1e-13, rtol=_BRENTQ_RTOL, maxiter=200)


# --- quantile-domain expectation oracle --------------------------------------

def _expect_over_quantiles(dist: ScaleDistribution, fn, tol: float, peak_v=None) -> float:
    """E[fn(S)] by adaptive quadrature over the quantile domain of S.

    With q the survival probability, E[fn(S)] = integral of fn(quantile(q))
    over q in (0, 1).  Substituting q = q0 * exp(-v) stretches the deep tail
    (where the integrand of tail expectations concentrates) onto an O(1)
    scale, and any atom at the lower edge u0 of the strict-decrease region
    contributes the exact term (1 - q0) * fn(u0).  ``peak_v`` marks the
    Laplace point of the integrand for the subdivision hints.
    """
    u0, q0 = dist._edge
    atom = (1.0 - q0) * fn(u0)
    pts = list(_V_LADDER)
    if peak_v is not None and math.isfinite(peak_v):
        pts += [max(peak_v - 4.0, 1e-3), peak_v, peak_v + 4.0]
    pts = sorted({p for p in pts if 0.0 < p < _V_MAX})

    def integrand(v):
        s = dist.quantile(q0 * math.exp(-v))
        return fn(s) * math.exp(-v)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        val, abserr = quad(
            integrand, 0.0, _V_MAX, points=pts, limit=500, epsabs=0.0, epsrel=tol
        )
    if caught and abserr > 10.0 * tol * max(abs(val), 1e-300):
        raise QuadratureFailure(
            f"quantile-domain quadrature stuck at abserr={abserr:.3e} "
            f"for value {val:.6e} (requested rel tol {tol:.1e})"
        )
    return atom + q0 * val


def _oracle_peak_v(dist: ScaleDistribution, u: float) -> float | None:
    # Laplace point of E[Phi-bar(u/S)]: s* minimizing u^2/(2 s^2) + L s^p
    if not isinstance(dist, Weibullian):
        return None
    u0, q0 = dist._edge
    Q = (dist.L * dist.p) ** (1.0 / (2.0 + dist.p))
    s_star = u ** (2.0 / (2.0 + dist.p)) / Q
    if s_star <= u0 or s_star <= 0.0:
        return None
    log_h = math.log(dist.C) + dist.alpha * math.log(s_star) - dist.L * s_star**dist.p
    return max(math.log(q0) - log_h, 0.0)


def product_tail_oracle(dist: ScaleDistribution, u: float, tol: float = 1e-10) -> float:
    """P(S*X > u) = E[Phi-bar(u/S)] by quantile-domain quadrature.

    Independent of every closed form in this module; `tol` is a relative
    tolerance in (0, 1e-6].
    """
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    if not (0.0 < tol <= 1e-6):
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol}")

    def fn(s):
        if s <= 0.0:
            return 0.0
        return normal_sf(u / s)

    return _expect_over_quantiles(dist, fn, tol, peak_v=_oracle_peak_v(dist, u))


@dataclass(frozen=True)
class ProductTailReport:
    """Asymptotic vs oracle evaluation of P(S*X > u) at one level."""

    u: float
    asymptotic: float
    oracle: float
    ratio: float


def product_tail_report(dist: Weibullian, u: float, tol: float = 1e-10) -> ProductTailReport:
    if not isinstance(dist, Weibullian):
        raise TypeError("product tail reports require a Weibullian scale law")
    asym = product_tail_asymptotic(dist.L, dist.p, dist.alpha, dist.C, u)
    orac = product_tail_oracle(dist, u, tol)
    ratio = asym / orac if orac > 0 else math.nan
    return ProductTailReport(u=float(u), asymptotic=float(asym), oracle=orac, ratio=ratio)


# --- norming constants and levels --------------------------------------------

@dataclass(frozen=True)
class NormingConstants:
    """Linear norming u_n(x) = a_n * x + b_n; `classical` marks the unscaled-
    Gaussian variant."""

    a_n: float
    b_n: float
    n: float
    classical: bool = False


def norming_constants(
    L: float, p: float, alpha: float, C: float, n: float, classical: bool = False
) -> NormingConstants:
    """Norming constants for maxima of the scaled sequence at length n.

    ``n`` may be a real value >= 2 (useful for analysis grids such as
    n = e**10).  With ``classical=True`` returns instead the textbook
    constants for the unscaled standard Gaussian sequence (useful as a
    bracket seed and as a reference in reports); the (L, p, alpha, C)
    arguments are then unused.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    ln = math.log(n)
    if classical:
        rt = math.sqrt(2.0 * ln)
        return NormingConstants(
            a_n=1.0 / rt,
            b_n=rt - (math.log(ln) + math.log(4.0 * math.pi)) / (2.0 * rt),
            n=n,
            classical=True,
        )
    c = product_constants(L, p)
    a_n = (2.0 + p) / (2.0 * p) * c.T ** (-(2.0 + p) / (2.0 * p)) * ln ** ((2.0 - p) / (2.0 * p))
    b_n = (ln / c.T) ** ((2.0 + p) / (2.0 * p)) + a_n * (
        (alpha / p) * math.log(ln / c.T)
        + math.log((2.0 + p) ** -0.5 * C * c.Q ** (-alpha))
    )
    return NormingConstants(a_n=a_n, b_n=b_n, n=n, classical=False)


def _prob_positive(dist: ScaleDistribution) -> float:
    if isinstance(dist, Weibullian):
        u0, q0 = dist._edge
        return 1.0 if u0 > 0.0 else q0
    return 1.0


@lru_cache(maxsize=1024)
def _solve_level_cached(dist: ScaleDistribution, n: int, x: float, tol: float) -> float:
    target = math.exp(-x) / n
    # sup of P(S*X > u) over u > 0 is P(S > 0) / 2
    if target >= 0.5 * _prob_positive(dist):
        raise NoBracket(
            f"n * P(Y > u) cannot reach exp(-x) = {math.exp(-x):.4g} at n={n}: "
            f"exceedance probability is bounded by {0.5 * _prob_positive(dist):.4g}"
        )

    def f(u):
        return product_tail_oracle(dist, u, tol) - target

    start = normal_isf(target) if target < 0.5 else 0.5
    start = max(start, 1e-8)
    lo = hi = start
    if f(start) >= 0.0:
        for _ in range(200):
            hi *= 2.0
            if f(hi) < 0.0:
                break
        else:
            raise NoBracket(f"no upper bracket for the level equation at n={n}, x={x}")
    else:
        for _ in range(200):
            lo *= 0.5
            if f(lo) >= 0.0:
                break
            if lo < 1e-12:
                raise NoBracket(
                    f"no lower bracket for the level equation at n={n}, x={x}"
                )
        else:
            raise NoBracket(f"no lower bracket for the level equation at n={n}, x={x}")
    return brentq(f, lo, hi, xtol=1e-13 * max(1.0, hi), rtol=_BRENTQ_RTOL, maxiter=200)


def solve_level(dist: ScaleDistribution, n: int, x: float, tol: float = 1e-9) -> float:
    """The level u with n * P(S*X > u) = exp(-x), to relative tolerance tol.

    Root-finding on the monotone oracle; results are cached per
    (dist, n, x, tol) since levels are reused across replications.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not math.exp(-x) / n < 1.0:
        raise ValueError(f"need exp(-x)/n < 1, got x={x}, n={n}")
    if not (0.0 < tol <= 1e-6):
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol}")
    return _solve_level_cached(dist, n, float(x), float(tol))


# --- scaled products against a Weibull-tailed factor --------------------------

@dataclass(frozen=True)
class ScaledProductConstants:
    """Constants of P(S*Z > u) for Z with survival exp(-L_n * z**q)."""

    q: float
    L_n: float
    A_n: float
    D_n: float


def scaled_product_constants(L: float, p: float, q: float, L_n: float) -> ScaledProductConstants:
    if not (L > 0 and p > 0 and q > 0 and L_n > 0):
        raise ValueError(f"all parameters must be positive, got {(L, p, q, L_n)}")
    A_n = (q * L_n) ** (1.0 / (p + q)) * (L * p) ** (-1.0 / (p + q))
    D_n = (L + L * p / q) * A_n**p
    return ScaledProductConstants(q=q, L_n=L_n, A_n=A_n, D_n=D_n)


def scaled_product_tail_asymptotic(
    L: float, p: float, alpha: float, C: float, q: float, L_n: float, u
):
    """Closed-form tail of S*Z: S Weibullian (L, p, alpha, C), Z Weibull (L_n, q)."""
    c = scaled_product_constants(L, p, q, L_n)
    u = np.asarray(u, dtype=float)
    g_arg = c.A_n * u ** (q / (p + q))
    out = (
        math.sqrt(2.0 * math.pi * L * p / (p + q))
        * c.A_n ** (p / 2.0)
        * u ** (p * q / (2.0 * (p + q)))
        * C
        * g_arg**alpha
        * np.exp(-c.D_n * u ** (p * q / (p + q)))
    )
    if out.ndim == 0:
        return float(out)
    return out


def tail_equivalence_check(
    distA: Weibullian, distB: Weibullian, c: float, u_grid, tol: float = 1e-10
) -> np.ndarray:
    """Oracle ratio P(S_A X > u) / P(S_B X > u) along a level grid.

    For scale laws with identical (L, p) whose survival ratio tends to c,
    the product-tail ratio against the common auxiliary factor (here the
    standard normal inside the oracle) tends to c as well.  Returns rows
    (u, ratio, ratio / c).
    """
    if not (isinstance(distA, Weibullian) and isinstance(distB, Weibullian)):
        raise TypeError("tail equivalence requires two Weibullian laws")
    if not (distA.L == distB.L and distA.p == distB.p):
        raise ValueError("tail equivalence requires identical (L, p)")
    if not (c > 0 and math.isfinite(c)):
        raise ValueError(f"c must be a positive finite constant, got {c}")
    rows = []
    for u in np.asarray(u_grid, dtype=float):
        ra = product_tail_oracle(distA, float(u), tol)
        rb = product_tail_oracle(distB, float(u), tol)
        ratio = ra / rb if rb > 0 else math.nan
        rows.append((u, ratio, ratio / c))
    return np.array(rows)
