"""Deterministic derivative-free maximization utilities.

Receiver objectives are cheap to evaluate but can be flat or kinked
(threshold switches), so everything here is grid seeding plus
golden-section or grid refinement: no derivatives, no randomness.
Identical inputs always produce bit-identical results; ties are broken
toward the smallest argument so regression tests stay stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

__all__ = [
    "ScalarSearchSpec",
    "GridSearchSpec",
    "maximize_scalar",
    "maximize_grid",
    "scan_discrete",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class ScalarSearchSpec:
    """Bounded 1-D search: coarse grid seed, then golden-section refinement."""

    lo: float
    hi: float
    coarse_points: int = 64
    tol: float = 1e-7

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.coarse_points < 3:
            raise ValueError("coarse_points must be >= 3")
        if not (0.0 < self.tol < self.hi - self.lo):
            raise ValueError("tol must be positive and smaller than the interval")


@dataclass(frozen=True)
class GridSearchSpec:
    """Bounded n-D search: full grid, then rounds of shrunken re-gridding.

    Each refinement round re-grids a box of per-axis width
    (hi - lo) / shrink_factor**round centered on the incumbent, clipped
    to the original bounds. Points listed in ``mandatory`` are always
    evaluated (first, so they also win ties).
    """

    bounds: tuple[tuple[float, float], ...]
    points: tuple[int, ...]
    refinement_rounds: int = 0
    shrink_factor: float = 8.0
    mandatory: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self) -> None:
        if len(self.bounds) != len(self.points):
            raise ValueError("bounds and points must have the same length")
        for (lo, hi), n in zip(self.bounds, self.points):
            if not lo < hi:
                raise ValueError(f"axis bounds must be ordered, got ({lo}, {hi})")
            if n < 3:
                raise ValueError("each axis needs at least 3 points")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be >= 0")
        if not self.shrink_factor > 1.0:
            raise ValueError("shrink_factor must be > 1")
        for point in self.mandatory:
            if len(point) != len(self.bounds):
                raise ValueError("mandatory points must match the box dimension")
            for x, (lo, hi) in zip(point, self.bounds):
                if not lo <= x <= hi:
                    raise ValueError(f"mandatory point {point} lies outside the bounds")


def _checked(f: Callable, x, label: str) -> float:
    value = float(f(*x) if isinstance(x, tuple) else f(x))
    if not math.isfinite(value):
        raise ValueError(f"objective returned non-finite value {value!r} at {label} = {x!r}")
    return value


def _axis_grid(lo: float, hi: float, n: int) -> list[float]:
    step = (hi - lo) / (n - 1)
    grid = [lo + i * step for i in range(n)]
    grid[-1] = hi
    return grid


def maximize_scalar(f: Callable[[float], float], spec: ScalarSearchSpec) -> tuple[float, float]:
    """Maximize f on [lo, hi]; returns (x_star, f_star).

    The result is at least as good as the best coarse-grid point: the
    golden-section refinement runs inside the bracket around the coarse
    argmax and its candidate replaces the incumbent only on strict
    improvement.
    """
    grid = _axis_grid(spec.lo, spec.hi, spec.coarse_points)
    best_x = grid[0]
    best_f = _checked(f, grid[0], "x")
    best_i = 0
    for i in range(1, len(grid)):
        v = _checked(f, grid[i], "x")
        if v > best_f:
            best_x, best_f, best_i = grid[i], v, i
    a = grid[max(best_i - 1, 0)]
    b = grid[min(best_i + 1, len(grid) - 1)]
    x, v = _golden_max(f, a, b, spec.tol)
    if v > best_f:
        best_x, best_f = x, v
    return best_x, best_f


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    h = b - a
    if h <= tol:
        mid = 0.5 * (a + b)
        return mid, _checked(f, mid, "x")
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc = _checked(f, c, "x")
    yd = _checked(f, d, "x")
    best_x, best_f = (c, yc) if yc >= yd else (d, yd)
    steps = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    for _ in range(steps):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI2 * h
            yc = _checked(f, c, "x")
            if yc > best_f:
                best_x, best_f = c, yc
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = _checked(f, d, "x")
            if yd > best_f:
                best_x, best_f = d, yd
    mid = 0.5 * (a + b)
    vm = _checked(f, mid, "x")
    if vm > best_f:
        best_x, best_f = mid, vm
    return best_x, best_f


def maximize_grid(f: Callable[..., float], spec: GridSearchSpec) -> tuple[tuple[float, ...], float]:
    """Maximize f over a box; returns (x_star, f_star).

    Mandatory points are evaluated before the grid so they win ties;
    refinement rounds only ever improve the incumbent and never step
    outside the original bounds.
    """
    best_x: tuple[float, ...] | None = None
    best_f = -math.inf
    for point in spec.mandatory:
        v = _checked(f, tuple(point), "x")
        if v > best_f:
            best_x, best_f = tuple(point), v

    widths = [hi - lo for lo, hi in spec.bounds]
    center = [0.5 * (lo + hi) for lo, hi in spec.bounds]
    for round_idx in range(spec.refinement_rounds + 1):
        if round_idx == 0:
            boxes = list(spec.bounds)
        else:
            shrink = spec.shrink_factor**round_idx
            boxes = []
            for (lo0, hi0), w, c in zip(spec.bounds, widths, center):
                half = 0.5 * w / shrink
                boxes.append((max(lo0, c - half), min(hi0, c + half)))
        axes = [_axis_grid(lo, hi, n) for (lo, hi), n in zip(boxes, spec.points)]
        for point in product(*axes):
            v = _checked(f, point, "x")
            if v > best_f:
                best_x, best_f = point, v
        center = list(best_x)
    return best_x, best_f


def scan_discrete(f: Callable[[int], float], domain: Sequence[int]) -> tuple[int, float]:
    """Exhaustive maximization over an integer domain; ties keep the smaller key."""
    domain = list(domain)
    if not domain:
        raise ValueError("domain must be non-empty")
    best_k = domain[0]
    best_f = _checked(f, best_k, "k")
    for k in domain[1:]:
        v = _checked(f, k, "k")
        if v > best_f:
            best_k, best_f = k, v
    return best_k, best_f
