"""Bracketed scalar maximisation: log-grid scan followed by golden section."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, OptimizationDegenerate

GRID_POINTS = 17
FLAT_TOL = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Maximum:
    x: float
    value: float
    grid: np.ndarray
    grid_values: np.ndarray


def golden_max(f, lo: float, hi: float, xtol: float = 1e-10, max_iter: int = 200):
    """Golden-section search for a maximum of f on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def log_grid_max(f, lo: float, hi: float, points: int = GRID_POINTS) -> Maximum:
    """Maximise f on [lo, hi] (lo > 0) in log coordinates.

    The best grid point is refined by golden section between its
    neighbours; the refined point is kept only if it is at least as good.
    A flat objective returns ``lo`` with an ``OptimizationDegenerate`` warning.
    """
    if not 0 < lo < hi:
        raise InvalidParameter(f"need 0 < lo < hi, got ({lo}, {hi})")
    grid = np.logspace(math.log10(lo), math.log10(hi), points)
    grid[0], grid[-1] = lo, hi
    values = np.array([f(x) for x in grid])
    if np.ptp(values) <= FLAT_TOL:
        warnings.warn("objective is flat over the bounds", OptimizationDegenerate, stacklevel=3)
        return Maximum(lo, float(values[0]), grid, values)
    i = int(np.argmax(values))
    left = math.log(grid[max(i - 1, 0)])
    right = math.log(grid[min(i + 1, points - 1)])
    t, v = golden_max(lambda s: f(math.exp(s)), left, right)
    if v >= values[i]:
        return Maximum(math.exp(t), float(v), grid, values)
    return Maximum(float(grid[i]), float(values[i]), grid, values)
