"""Regime thresholds for x_{n+1} = max(f(x_n) + l*chi_{n+1}, 0).

For a configuration (map, a, H, l) with the structural assumptions in place,
the displacement F(x) = f(x) - x determines several landmarks:

b
    leftmost global minimizer of F on [0, a]; the bottom of the drop zone.
f_H
    max of f on [0, H]; H - f_H limits amplitudes that keep (a, H) invariant.
l windows
    ``l_max_invariance = min(H - f_H, F(a))`` bounds amplitudes for which
    (a, H) traps trajectories; ``l_escape_threshold = -F(b)`` is the
    amplitude above which noise can push any positive state over the drop
    zone (unconditional persistence when both hold).
u_l
    largest root of F = l below a: above it, trajectories are absorbed
    upward almost surely.
v_l
    smallest positive root of F = -l: below it, trajectories can never climb
    past v_l and end trapped near zero.  This outer threshold is the one the
    worked examples report and the one trajectory classification uses.
v_core
    first point above b where F recovers to -l, i.e. inf{v > b : F(v) > -l}.
    The corridor (v_core, u_l) is where the probability machinery lives: all
    bound formulas measure distances from v_core, and the ordering
    b < v_core < u_l < a holds for admissible l.  When the drop zone dips
    below -l only once, v_core coincides with alpha_l.
beta_l / alpha_l
    first up-crossing of +l above b / last down-crossing of -l below a; they
    delimit the genuinely mixed zone.  The corridor condition |F| < l on
    (v_core, u_l) is exactly (beta_l = u_l and alpha_l = v_core), and that
    root form is how it is evaluated (the sup of |F| over the open corridor
    tends to l at its own endpoints, so a direct grid comparison against l
    is ill-posed).

Roots are located by directional grid scans (10^4 cells) plus bisection to
1e-9; extrema by grid plus golden-section with leftmost tie-breaking at 1e-9.
Near-tangential roots (|F'| < 1e-6 at the root) flag the analysis as
ill-conditioned instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._num import derivative, first_crossing, refine_max, refine_min
from .errors import PreconditionError, RootNotFoundError
from .maps import MapSpec, eval_F, eval_F_vec, eval_f, eval_f_vec

__all__ = [
    "RegimeAnalysis",
    "find_b",
    "compute_f_H",
    "admissible_l_window",
    "compute_u_l",
    "compute_v_l",
    "compute_v_core",
    "compute_alpha_beta",
    "local_min_over",
    "local_max_over",
    "hitting_time_bound",
    "check_expansivity",
    "analyze_regime",
]

N_GRID_ROOTS = 10_000
N_GRID_EXTREMA = 10_000
ROOT_XTOL = 1e-9
TANGENCY_DF = 1e-6


@dataclass(frozen=True)
class RegimeAnalysis:
    """All computed thresholds for one (map, a, H, l) configuration."""

    map: MapSpec
    a: float
    H: float
    l: float
    b: float
    f_H: float
    f_H_argmax: float
    F_a: float
    F_b: float
    l_max_invariance: float
    l_escape_threshold: float
    escape_window: tuple[float, float] | None
    u_l: float | None = None
    v_l: float | None = None
    v_core: float | None = None
    alpha_l: float | None = None
    beta_l: float | None = None
    flbound_holds: bool | None = None
    F_monotone_on_core: bool | None = None
    kappa: float | None = None
    ill_conditioned: tuple[str, ...] = ()

    @property
    def has_thresholds(self) -> bool:
        return self.u_l is not None

    @property
    def regime(self) -> str:
        if self.has_thresholds:
            return "threshold"
        if self.escape_window and self.escape_window[0] < self.l < self.escape_window[1]:
            return "escape"
        if self.alpha_l is not None:
            return "partial"
        return "none"


def _F(m: MapSpec):
    return (lambda x: eval_F(m, x)), (lambda xs: eval_F_vec(m, xs))


def find_b(m: MapSpec, a: float, n_grid: int = N_GRID_EXTREMA) -> tuple[float, float]:
    """Leftmost global minimizer of F on [0, a] and its value F(b).

    Equal minima (within 1e-9) resolve to the smallest x, so a map whose
    drop zone bottoms out twice at the same depth reports the first bottom.
    """
    fs, fv = _F(m)
    b, Fb = refine_min(fs, fv, 0.0, a, n_grid=n_grid)
    if b <= a * 1e-12 or b >= a * (1.0 - 1e-12):
        raise PreconditionError(
            f"F has no interior minimum on [0, {a}]: minimizer at {b}")
    return b, Fb


def compute_f_H(m: MapSpec, H: float, n_grid: int = N_GRID_EXTREMA) -> tuple[float, float]:
    """(argmax, max) of f on [0, H]."""
    if H <= 0.0:
        raise PreconditionError("H must be positive")
    return refine_max(lambda x: eval_f(m, x), lambda xs: eval_f_vec(m, xs),
                      0.0, H, n_grid=n_grid)


def admissible_l_window(m: MapSpec, a: float, H: float,
                        b: float | None = None,
                        f_H: float | None = None) -> tuple[float, float]:
    """(l_max_invariance, l_escape_threshold) for the configuration.

    An unconditional-persistence window exists exactly when the second value
    is below the first.
    """
    if b is None:
        b, _ = find_b(m, a)
    if f_H is None:
        _, f_H = compute_f_H(m, H)
    l_max_inv = min(H - f_H, eval_F(m, a))
    l_escape = -eval_F(m, b)
    return l_max_inv, l_escape


def _require_amplitude(m: MapSpec, a: float, b: float, l: float,
                       need_growth: bool = True):
    """Existence preconditions for threshold roots.

    ``need_growth`` adds l < F(a) (required for u_l); the drop condition
    l < -F(b) is required by every threshold.  alpha_l / beta_l stay
    meaningful without the growth condition as long as their defining sets
    are non-empty, which the scans check directly.
    """
    if l <= 0.0:
        raise PreconditionError("amplitude l must be positive")
    F_b = eval_F(m, b)
    if l >= -F_b:
        raise RootNotFoundError(
            f"l = {l} >= -F(b) = {-F_b:.6g}: the drop zone never reaches -l")
    if need_growth:
        F_a = eval_F(m, a)
        if l >= F_a:
            raise RootNotFoundError(
                f"l = {l} >= F(a) = {F_a:.6g}: no upper threshold below a")


def _tangency(m: MapSpec, x: float) -> bool:
    return abs(derivative(lambda t: eval_F(m, t), x)) < TANGENCY_DF


def compute_u_l(m: MapSpec, a: float, b: float, l: float) -> float:
    """Largest root of F = l below a (first crossing scanning down from a)."""
    _require_amplitude(m, a, b, l)
    fs, fv = _F(m)
    root = first_crossing(fs, fv, l, b, a, n_grid=N_GRID_ROOTS,
                          descending=True, xtol=ROOT_XTOL * 1e-3)
    if root is None:
        raise RootNotFoundError(f"no root of F = {l} found in [{b}, {a}]")
    return root


def compute_v_l(m: MapSpec, a: float, b: float, l: float) -> float:
    """Smallest positive root of F = -l (first crossing scanning up from 0)."""
    _require_amplitude(m, a, b, l, need_growth=False)
    fs, fv = _F(m)
    root = first_crossing(fs, fv, -l, 0.0, b, n_grid=N_GRID_ROOTS,
                          descending=False, xtol=ROOT_XTOL * 1e-3)
    if root is None:
        raise RootNotFoundError(f"no root of F = {-l} found in [0, {b}]")
    return root


def compute_v_core(m: MapSpec, a: float, b: float, l: float) -> float:
    """First point above b where F recovers above -l."""
    _require_amplitude(m, a, b, l, need_growth=False)
    fs, fv = _F(m)
    root = first_crossing(fs, fv, -l, b, a, n_grid=N_GRID_ROOTS,
                          descending=False, xtol=ROOT_XTOL * 1e-3)
    if root is None:
        raise RootNotFoundError(f"no recovery of F above {-l} found in [{b}, {a}]")
    return root


def compute_alpha_beta(m: MapSpec, a: float, b: float, l: float) -> tuple[float, float]:
    """(alpha_l, beta_l): last down-crossing of -l below a, first up-crossing
    of +l above b.  Both exist whenever F(b) < -l, F reaches above l on
    (b, a); the scans report the absence otherwise."""
    _require_amplitude(m, a, b, l, need_growth=False)
    fs, fv = _F(m)
    alpha = first_crossing(fs, fv, -l, b, a, n_grid=N_GRID_ROOTS,
                           descending=True, xtol=ROOT_XTOL * 1e-3)
    beta = first_crossing(fs, fv, l, b, a, n_grid=N_GRID_ROOTS,
                          descending=False, xtol=ROOT_XTOL * 1e-3)
    if alpha is None or beta is None:
        raise RootNotFoundError("alpha_l / beta_l crossing not found")
    return alpha, beta


def local_min_over(m: MapSpec, lo: float, hi: float,
                   n_grid: int = N_GRID_EXTREMA) -> float:
    """min of F over [lo, hi] (degenerate intervals allowed)."""
    if hi < lo:
        raise PreconditionError("empty interval")
    if hi == lo:
        return eval_F(m, lo)
    fs, fv = _F(m)
    return refine_min(fs, fv, lo, hi, n_grid=n_grid)[1]


def local_max_over(m: MapSpec, lo: float, hi: float,
                   n_grid: int = N_GRID_EXTREMA) -> float:
    """max of F over [lo, hi]."""
    if hi < lo:
        raise PreconditionError("empty interval")
    if hi == lo:
        return eval_F(m, lo)
    fs, fv = _F(m)
    return refine_max(fs, fv, lo, hi, n_grid=n_grid)[1]


def hitting_time_bound(m: MapSpec, a: float, b: float, l: float,
                       x0: float) -> int:
    """Deterministic worst-case step count to absorption.

    Descent (x0 in (b, v_core)): steps until the trajectory is in [0, b],
    using the worst per-step drop inf over [b, x0] of (-F - l).  x0 at or
    below b needs 0 steps.  Ascent (x0 in (u_l, a)): steps to reach (a, H),
    using inf over [x0, a] of (F - l).  Elsewhere the bound is undefined.
    """
    _require_amplitude(m, a, b, l)
    v_core = compute_v_core(m, a, b, l)
    if 0.0 < x0 <= b:
        return 0
    if b < x0 < v_core:
        drop = -local_max_over(m, b, x0) - l
        if drop <= 0.0:
            raise PreconditionError(
                f"no uniform drop on [b, {x0}]: inf(-F - l) = {drop:.3g}")
        return int(math.floor((v_core - b) / drop)) + 1
    u_l = compute_u_l(m, a, b, l)
    if u_l < x0 < a:
        gain = local_min_over(m, x0, a) - l
        if gain <= 0.0:
            raise PreconditionError(
                f"no uniform gain on [{x0}, a]: inf(F - l) = {gain:.3g}")
        return int(math.floor((a - u_l) / gain)) + 1
    raise PreconditionError(
        f"x0 = {x0} is outside the descent zone (b, v_core) = ({b:.6g}, "
        f"{v_core:.6g}) and the ascent zone (u_l, a) = ({u_l:.6g}, {a:.6g})")


def check_expansivity(m: MapSpec, v: float, u: float,
                      n_grid: int = N_GRID_ROOTS) -> float | None:
    """Largest kappa with |F(y) - F(x)| >= kappa |x - y| on [v, u].

    Estimated as the min of |dF/dx| over adjacent grid points; absent when
    F is not strictly monotone on the interval or the estimate vanishes.
    """
    if not v < u:
        raise PreconditionError("need v < u")
    xs = np.linspace(v, u, n_grid + 1)
    dF = np.diff(eval_F_vec(m, xs))
    if np.all(dF > 0.0) or np.all(dF < 0.0):
        kappa = float(np.abs(dF).min() / (xs[1] - xs[0]))
        return kappa if kappa > 0.0 else None
    return None


def _monotone_on(m: MapSpec, lo: float, hi: float,
                 n_grid: int = N_GRID_ROOTS) -> bool:
    xs = np.linspace(lo, hi, n_grid + 1)
    return bool(np.all(np.diff(eval_F_vec(m, xs)) >= -1e-12))


def analyze_regime(m: MapSpec, a: float, H: float, l: float,
                   root_match_tol: float = 1e-6) -> RegimeAnalysis:
    """Compute every threshold the configuration admits.

    Threshold fields stay None when l falls outside (0, min(F(a), -F(b))),
    in which case only the window data (and possibly the escape regime)
    applies.
    """
    if not 0.0 < a < H:
        raise PreconditionError("need 0 < a < H")
    if l < 0.0:
        raise PreconditionError("amplitude l must be non-negative")
    b, F_b = find_b(m, a)
    x_max, f_H = compute_f_H(m, H)
    F_a = eval_F(m, a)
    l_max_inv = min(H - f_H, F_a)
    l_escape = -F_b
    window = (l_escape, l_max_inv) if l_escape < l_max_inv else None
    res = RegimeAnalysis(
        map=m, a=a, H=H, l=l, b=b, f_H=f_H, f_H_argmax=x_max, F_a=F_a,
        F_b=F_b, l_max_invariance=l_max_inv, l_escape_threshold=l_escape,
        escape_window=window,
    )
    if not (0.0 < l < l_escape):
        return res

    # the drop-side thresholds exist as soon as l clears -F(b)
    v_l = compute_v_l(m, a, b, l)
    v_core = compute_v_core(m, a, b, l)
    fs, fv = _F(m)
    alpha_l = first_crossing(fs, fv, -l, b, a, n_grid=N_GRID_ROOTS,
                             descending=True, xtol=ROOT_XTOL * 1e-3)
    # beta_l is absent when F never reaches above l on (b, a)
    beta_l = first_crossing(fs, fv, l, b, a, n_grid=N_GRID_ROOTS,
                            descending=False, xtol=ROOT_XTOL * 1e-3)

    u_l = flbound = monotone = kappa = None
    if l < F_a:
        u_l = compute_u_l(m, a, b, l)
        flbound = (beta_l is not None
                   and abs(beta_l - u_l) <= root_match_tol
                   and abs(alpha_l - v_core) <= root_match_tol)
        monotone = _monotone_on(m, v_core, u_l)
        kappa = check_expansivity(m, v_core, u_l)
    ill = tuple(
        f"near-tangential root at {x:.6g}"
        for x in (u_l, v_l, v_core, alpha_l, beta_l)
        if x is not None and _tangency(m, x)
    )
    return replace(res, u_l=u_l, v_l=v_l, v_core=v_core, alpha_l=alpha_l,
                   beta_l=beta_l, flbound_holds=flbound,
                   F_monotone_on_core=monotone, kappa=kappa,
                   ill_conditioned=ill)
