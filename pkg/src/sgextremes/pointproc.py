"""Scaled sequences, bivariate exceedance patterns, and order statistics.

Given Y_i = S_i * X_i, the exceedance pattern at levels (u1, u2) records
the normalized positions i/n where Y_i > u1 (mark 1) and where -Y_i > u2
(mark 2).  Boundary ties use strict inequality, a probability-zero event
for continuous laws but fixed for determinism.  Counting points in an
interval (s, t] and selecting the k-th largest / l-th smallest value are
the two statistics the Monte Carlo harness consumes, linked per path by
the duality: the k-th largest is <= u exactly when at most k-1 values
exceed u.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianPath

__all__ = [
    "LengthMismatch",
    "OutOfRange",
    "ScaledPath",
    "PointPattern",
    "scale_path",
    "extract",
    "count",
    "order_stats",
    "write_pattern_csv",
]


class LengthMismatch(ValueError):
    """Gaussian path and scale array have different lengths."""


class OutOfRange(ValueError):
    """Order-statistic rank outside 1..n."""


@dataclass(frozen=True)
class ScaledPath:
    """Elementwise product Y_i = S_i * X_i with sampling provenance."""

    values: np.ndarray
    model: object
    dist: object
    seed: int
    stream_id: int

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PointPattern:
    """Positions i/n of exceedances: mark 1 for Y_i > u1, mark 2 for -Y_i > u2."""

    points_d1: np.ndarray
    points_d2: np.ndarray
    levels: tuple[float, float]
    n: int

    def points(self, mark: int) -> np.ndarray:
        if mark == 1:
            return self.points_d1
        if mark == 2:
            return self.points_d2
        raise ValueError(f"mark must be 1 or 2, got {mark}")


def scale_path(gauss: GaussianPath, scales: np.ndarray, dist=None) -> ScaledPath:
    """Multiply a Gaussian path by independent scales, elementwise."""
    scales = np.asarray(scales, dtype=float)
    if scales.shape != gauss.values.shape:
        raise LengthMismatch(
            f"path has length {len(gauss.values)}, scales have shape {scales.shape}"
        )
    return ScaledPath(
        values=gauss.values * scales,
        model=gauss.model,
        dist=dist,
        seed=gauss.seed,
        stream_id=gauss.stream_id,
    )


def _values(path) -> np.ndarray:
    if isinstance(path, (ScaledPath, GaussianPath)):
        return path.values
    return np.asarray(path, dtype=float)


def extract(path, u1: float, u2: float) -> PointPattern:
    """The bivariate exceedance pattern of a path at levels (u1, u2)."""
    y = _values(path)
    n = len(y)
    pos = np.arange(1, n + 1) / n
    return PointPattern(
        points_d1=pos[y > u1],
        points_d2=pos[-y > u2],
        levels=(float(u1), float(u2)),
        n=n,
    )


def count(pattern: PointPattern, mark: int, interval: tuple[float, float]) -> int:
    """Number of mark-``mark`` points with position in (s, t]."""
    s, t = interval
    if not (0.0 <= s < t <= 1.0):
        raise ValueError(f"need 0 <= s < t <= 1, got ({s}, {t})")
    pts = pattern.points(mark)
    return int(np.searchsorted(pts, t, side="right") - np.searchsorted(pts, s, side="right"))


def order_stats(path, k: int, l: int) -> tuple[float, float]:
    """(k-th largest, l-th smallest) of the path values, multiset semantics."""
    y = _values(path)
    n = len(y)
    if not (1 <= k <= n):
        raise OutOfRange(f"k must be in 1..{n}, got {k}")
    if not (1 <= l <= n):
        raise OutOfRange(f"l must be in 1..{n}, got {l}")
    kth_max = np.partition(y, n - k)[n - k]
    lth_min = np.partition(y, l - 1)[l - 1]
    return float(kth_max), float(lth_min)


def write_pattern_csv(pattern: PointPattern, fileobj) -> None:
    """Dump a pattern as CSV rows (position, mark)."""
    w = csv.writer(fileobj)
    w.writerow(["# levels", repr(pattern.levels[0]), repr(pattern.levels[1])])
    w.writerow(["# n", pattern.n])
    w.writerow(["position", "mark"])
    for p in pattern.points_d1:
        w.writerow([repr(float(p)), 1])
    for p in pattern.points_d2:
        w.writerow([repr(float(p)), 2])
