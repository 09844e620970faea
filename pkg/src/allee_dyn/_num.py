"""Grid-scan, golden-section and bisection primitives.

All threshold and extremum searches in the package follow the same recipe:
a uniform vectorized grid locates candidate basins or crossing cells, then a
derivative-free local refinement (golden section for extrema, bisection for
roots) polishes each candidate.  Ties between equal minima are broken to the
smallest x at an absolute value tolerance.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2

TIE_TOL = 1e-9


def golden_min(fn: Callable[[float], float], lo: float, hi: float,
               xtol: float = 1e-10, maxiter: int = 400) -> tuple[float, float]:
    """Golden-section minimum of ``fn`` on [lo, hi]; returns (x, fn(x))."""
    a, b = float(lo), float(hi)
    if b < a:
        a, b = b, a
    h = b - a
    if h <= xtol:
        x = 0.5 * (a + b)
        return x, fn(x)
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    yc = fn(c)
    yd = fn(d)
    for _ in range(maxiter):
        if h <= xtol:
            break
        if yc < yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + _INVPHI2 * h
            yc = fn(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INVPHI * h
            yd = fn(d)
    x = c if yc < yd else d
    y = min(yc, yd)
    # Endpoints can beat the interior probe when the true minimum sits on
    # the boundary of the original bracket.
    for xe in (lo, hi):
        ye = fn(xe)
        if ye < y:
            x, y = xe, ye
    return x, y


def bisect_root(fn: Callable[[float], float], lo: float, hi: float,
                xtol: float = 1e-12, maxiter: int = 200) -> float:
    """Bisection root of ``fn`` on [lo, hi]; fn(lo) and fn(hi) must straddle 0."""
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError("bisect_root: no sign change on bracket")
    a, b = float(lo), float(hi)
    for _ in range(maxiter):
        if b - a <= xtol:
            break
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0.0:
            return m
        if flo * fm < 0.0:
            b = m
        else:
            a, flo = m, fm
    return 0.5 * (a + b)


def _local_min_indices(values: np.ndarray) -> list[int]:
    """Indices of grid-local minima, endpoints included."""
    n = len(values)
    if n == 1:
        return [0]
    idx = []
    if values[0] <= values[1]:
        idx.append(0)
    interior = np.nonzero(
        (values[1:-1] <= values[:-2]) & (values[1:-1] <= values[2:])
    )[0]
    idx.extend((interior + 1).tolist())
    if values[-1] <= values[-2]:
        idx.append(n - 1)
    return idx


def refine_min(fn_scalar: Callable[[float], float],
               fn_vec: Callable[[np.ndarray], np.ndarray],
               lo: float, hi: float, n_grid: int = 10_000,
               xtol: float = 1e-10) -> tuple[float, float]:
    """Global minimum of a continuous function on [lo, hi].

    Grid scan plus golden-section polish of every candidate basin.  When
    several refined minima agree within TIE_TOL the smallest x wins, which
    realizes the leftmost-minimizer tie rule.
    """
    if hi < lo:
        raise ValueError("refine_min: empty interval")
    if hi == lo:
        return lo, fn_scalar(lo)
    xs = np.linspace(lo, hi, n_grid + 1)
    vals = fn_vec(xs)
    best: list[tuple[float, float]] = []
    for i in _local_min_indices(vals):
        blo = xs[max(i - 1, 0)]
        bhi = xs[min(i + 1, n_grid)]
        best.append(golden_min(fn_scalar, blo, bhi, xtol=xtol))
    vmin = min(v for _, v in best)
    x_star, v_star = min((x, v) for x, v in best if v <= vmin + TIE_TOL)
    return x_star, v_star


def refine_max(fn_scalar, fn_vec, lo, hi, n_grid: int = 10_000,
               xtol: float = 1e-10) -> tuple[float, float]:
    """Global maximum, leftmost tie; mirror of :func:`refine_min`."""
    x, v = refine_min(lambda x: -fn_scalar(x), lambda xs: -fn_vec(xs),
                      lo, hi, n_grid=n_grid, xtol=xtol)
    return x, -v


def first_crossing(fn_scalar, fn_vec, level: float, lo: float, hi: float,
                   n_grid: int = 10_000, descending: bool = False,
                   xtol: float = 1e-12) -> float | None:
    """First root of ``fn = level`` scanning up (or down) through [lo, hi].

    Grid points that hit the level exactly count as roots.  Returns None
    when no grid cell brackets the level.
    """
    if hi <= lo:
        return None
    xs = np.linspace(lo, hi, n_grid + 1)
    g = fn_vec(xs) - level
    cells = set(np.nonzero(g[:-1] * g[1:] < 0.0)[0].tolist())
    points = range(n_grid, -1, -1) if descending else range(n_grid + 1)
    for i in points:
        if g[i] == 0.0:
            return float(xs[i])
        cell = i - 1 if descending else i
        if cell in cells:
            return bisect_root(lambda x: fn_scalar(x) - level,
                               float(xs[cell]), float(xs[cell + 1]), xtol=xtol)
    return None


def derivative(fn_scalar, x: float, h: float = 1e-6) -> float:
    """Central finite difference."""
    return (fn_scalar(x + h) - fn_scalar(x - h)) / (2.0 * h)
