"""Bounded noise densities on [-1, 1].

Every density phi is positive on (-1, 1), zero outside [-1, 1], and
integrates to one.  Sampling is inverse-CDF on uniform doubles from the
splittable streams in :mod:`allee_dyn.rng`: exactly one double per sample,
which keeps draw accounting identical across backends and thread counts.

Kinds
-----
uniform
    phi = 1/2; the default everywhere.
tnormal:<sigma>
    a normal with standard deviation sigma renormalized to its own mass on
    [-1, 1], so the support assumption holds exactly.
triangular
    phi(x) = 1 - |x|.
table:<file>
    piecewise-linear density through user (x, phi) samples, renormalized to
    unit mass on load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError, QuadratureError
from .rng import RngState, uniform_block

__all__ = [
    "NoiseSpec",
    "uniform",
    "truncated_normal",
    "triangular",
    "user_table",
    "from_cli_token",
    "sample",
    "sample_block",
    "tail_prob_upper",
    "tail_prob_lower",
    "mean_positive_part",
    "adaptive_simpson",
]


@dataclass(frozen=True)
class NoiseSpec:
    """A bounded density with sampler, CDF and quadrature access."""

    kind: str
    params: tuple = ()
    density: Callable[[np.ndarray], np.ndarray] = None
    cdf: Callable[[float], float] = None
    ppf: Callable[[np.ndarray], np.ndarray] = None
    density_floor: float | None = None
    density_ceiling: float | None = None
    table: tuple[np.ndarray, np.ndarray] | None = None

    def label(self) -> str:
        if self.params:
            return f"{self.kind}:" + ":".join(f"{p:g}" for p in self.params)
        return self.kind


# ----------------------------------------------------------------------
# constructors


def uniform() -> NoiseSpec:
    def density(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= -1.0) & (x <= 1.0), 0.5, 0.0)

    def cdf(t):
        return min(max((t + 1.0) / 2.0, 0.0), 1.0)

    def ppf(u):
        return 2.0 * u - 1.0

    return NoiseSpec(kind="uniform", density=density, cdf=cdf, ppf=ppf,
                     density_floor=0.5, density_ceiling=0.5)


def truncated_normal(sigma: float) -> NoiseSpec:
    if sigma <= 0.0:
        raise DomainError("sigma must be positive")
    lo = ndtr(-1.0 / sigma)
    hi = ndtr(1.0 / sigma)
    mass = hi - lo
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi) * mass)

    def density(x):
        x = np.asarray(x, dtype=float)
        v = norm * np.exp(-0.5 * (x / sigma) ** 2)
        return np.where((x >= -1.0) & (x <= 1.0), v, 0.0)

    def cdf(t):
        if t <= -1.0:
            return 0.0
        if t >= 1.0:
            return 1.0
        return float((ndtr(t / sigma) - lo) / mass)

    def ppf(u):
        return sigma * ndtri(lo + np.asarray(u) * mass)

    floor = norm * math.exp(-0.5 / (sigma * sigma))  # attained at x = +-1
    return NoiseSpec(kind="tnormal", params=(sigma,), density=density,
                     cdf=cdf, ppf=ppf, density_floor=float(floor),
                     density_ceiling=float(norm))


def triangular() -> NoiseSpec:
    def density(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= -1.0) & (x <= 1.0), 1.0 - np.abs(x), 0.0)

    def cdf(t):
        if t <= -1.0:
            return 0.0
        if t >= 1.0:
            return 1.0
        if t < 0.0:
            return 0.5 * (1.0 + t) * (1.0 + t)
        return 1.0 - 0.5 * (1.0 - t) * (1.0 - t)

    def ppf(u):
        u = np.asarray(u, dtype=float)
        return np.where(u < 0.5, np.sqrt(2.0 * u) - 1.0,
                        1.0 - np.sqrt(2.0 * (1.0 - u)))

    # phi vanishes at the endpoints: no positive uniform floor exists.
    return NoiseSpec(kind="triangular", density=density, cdf=cdf, ppf=ppf,
                     density_floor=None, density_ceiling=1.0)


def user_table(xs, ps, renormalize: bool = True) -> NoiseSpec:
    """Piecewise-linear density through sample points (xs, ps).

    The sampler inverts the piecewise-linear interpolant of the exact node
    CDF, so between nodes it carries an O(grid step^2) shape error; tail
    probabilities and quadrature use the trapezoid CDF itself.
    """
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or xs.shape != ps.shape:
        raise DomainError("table needs matching 1-d x and phi columns, >= 2 rows")
    if np.any(np.diff(xs) <= 0.0):
        raise DomainError("table x values must be strictly increasing")
    if xs[0] < -1.0 or xs[-1] > 1.0:
        raise DomainError("table support must lie within [-1, 1]")
    if np.any(ps < 0.0):
        raise DomainError("table density values must be non-negative")
    if np.any(ps[1:-1] <= 0.0):
        raise DomainError("table density must be positive inside the support")
    # extend with zeros to cover all of [-1, 1]
    if xs[0] > -1.0:
        xs = np.concatenate([[-1.0], xs])
        ps = np.concatenate([[0.0], ps])
    if xs[-1] < 1.0:
        xs = np.concatenate([xs, [1.0]])
        ps = np.concatenate([ps, [0.0]])
    mass = float(np.trapezoid(ps, xs))
    if mass <= 0.0:
        raise DomainError("table density has zero mass")
    if renormalize:
        ps = ps / mass

    cum = np.concatenate([[0.0], np.cumsum(0.5 * (ps[1:] + ps[:-1]) * np.diff(xs))])
    cum[-1] = 1.0

    def density(x):
        x = np.asarray(x, dtype=float)
        v = np.interp(x, xs, ps, left=0.0, right=0.0)
        return np.where((x >= -1.0) & (x <= 1.0), v, 0.0)

    def cdf(t):
        if t <= xs[0]:
            return 0.0
        if t >= xs[-1]:
            return 1.0
        i = int(np.searchsorted(xs, t, side="right")) - 1
        dt = t - xs[i]
        p_t = ps[i] + (ps[i + 1] - ps[i]) * dt / (xs[i + 1] - xs[i])
        return float(cum[i] + 0.5 * (ps[i] + p_t) * dt)

    def ppf(u):
        # linear interpolation of the inverse CDF on the table grid
        return np.interp(np.asarray(u, dtype=float), cum, xs)

    return NoiseSpec(kind="table", density=density, cdf=cdf, ppf=ppf,
                     density_floor=float(ps.min()) if ps.min() > 0.0 else None,
                     density_ceiling=float(ps.max()),
                     table=(xs, ps))


def from_cli_token(token: str) -> NoiseSpec:
    """Build a NoiseSpec from ``uniform|tnormal:<sigma>|triangular|table:<file>``."""
    if token == "uniform":
        return uniform()
    if token == "triangular":
        return triangular()
    if token.startswith("tnormal:"):
        return truncated_normal(float(token.split(":", 1)[1]))
    if token.startswith("table:"):
        path = token.split(":", 1)[1]
        data = np.loadtxt(path)
        if data.ndim != 2 or data.shape[1] != 2:
            raise DomainError(f"table file {path!r} must have two columns")
        return user_table(data[:, 0], data[:, 1])
    raise DomainError(f"unknown noise {token!r}")


# ----------------------------------------------------------------------
# sampling


def sample(noise: NoiseSpec, state: RngState) -> tuple[float, RngState]:
    """One draw from phi; deterministic given the stream state."""
    u, new_state = uniform_block(state, 1)
    x = float(noise.ppf(u[0]))
    return min(max(x, -1.0), 1.0), new_state


def sample_block(noise: NoiseSpec, state: RngState, n: int) -> tuple[np.ndarray, RngState]:
    """n draws; equals n successive :func:`sample` calls."""
    u, new_state = uniform_block(state, n)
    x = np.clip(np.asarray(noise.ppf(u), dtype=float), -1.0, 1.0)
    return x, new_state


# ----------------------------------------------------------------------
# tail probabilities and moments


def tail_prob_upper(noise: NoiseSpec, t: float) -> float:
    """P{chi > t}, clamped to 1 for t <= -1 and 0 for t >= 1."""
    if t <= -1.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    return 1.0 - noise.cdf(t)


def tail_prob_lower(noise: NoiseSpec, t: float) -> float:
    """P{chi < t}, clamped to 0 for t <= -1 and 1 for t >= 1."""
    if t <= -1.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return noise.cdf(t)


def adaptive_simpson(fn: Callable[[float], float], lo: float, hi: float,
                     abs_tol: float = 1e-10, max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with absolute tolerance."""

    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = fn(m)
        return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        err = left + right - whole
        if abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        if depth >= max_depth:
            raise QuadratureError("adaptive Simpson did not converge")
        half = 0.5 * tol
        return (recurse(a, fa, m, fm, lm, flm, left, half, depth + 1)
                + recurse(m, fm, b, fb, rm, frm, right, half, depth + 1))

    fa, fb = fn(lo), fn(hi)
    m, fm, whole = simpson(lo, fa, hi, fb)
    return recurse(lo, fa, hi, fb, m, fm, whole, abs_tol, 0)


def mean_positive_part(noise: NoiseSpec, abs_tol: float = 1e-10) -> float:
    """integral of x * phi(x) over [0, 1]; strictly positive."""
    if noise.table is not None:
        xs, ps = noise.table
        grid = np.unique(np.concatenate([xs[xs >= 0.0], [0.0, 1.0]]))
        vals = grid * noise.density(grid)
        return float(np.trapezoid(vals, grid))
    val = adaptive_simpson(lambda x: x * float(noise.density(x)), 0.0, 1.0,
                           abs_tol=abs_tol)
    if val <= 0.0:
        raise QuadratureError("mean positive part must be positive")
    return val
