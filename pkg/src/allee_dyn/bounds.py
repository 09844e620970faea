"""Analytical lower bounds on persistence and low-density probabilities.

Every bound here is a lower bound on the probability that a trajectory of
x_{n+1} = max(f(x_n) + l*chi_{n+1}, 0) crosses the relevant outer threshold
(up past u_l for persistence, down past the drop zone for low density)
within an explicit number of steps, obtained by demanding a run of
sufficiently favorable noise draws.  None of them is claimed sharp; when a
bound's precondition fails the corresponding side is reported as absent,
never as zero.

Methods
-------
escape
    one favorable-run bound p1^K for reaching (a, H) from any start in
    (0, a], valid when l clears the worst drop of the zone below a.  The
    free split parameter is exposed as ``alpha_frac``.
basic
    fixed per-step gain (l + A)/2 with A the worst displacement between x0
    and u_l; bound p1^K1 (and the mirrored p2^K2 for the low side).
uniform
    the basic bound anchored at an interior point, valid simultaneously for
    every start above (resp. below) that anchor.
improved
    per-step re-estimation of the gain when F increases through the
    corridor: product of step probabilities lambda_i (resp. mu_i).
explicit_h / explicit_h_kappa / explicit_uniform
    closed-form relaxations of ``improved`` using a density floor h and
    optionally a minimum slope kappa of F; each factor is clamped into
    [0, 1] so the relaxation stays a probability and never exceeds the
    improved product.
boundary
    the one-step capture probability into the absorbing zone; it tends to 1
    as x0 approaches u_l (resp. v_core) and realizes the boundary-continuity
    behavior of the persistence probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analysis import RegimeAnalysis, local_max_over, local_min_over
from .errors import DomainError, PreconditionError
from .maps import MapSpec, eval_F, eval_f
from .noise import NoiseSpec, mean_positive_part, tail_prob_lower, tail_prob_upper

__all__ = [
    "BoundReport",
    "escape_bound",
    "escape_bound_best",
    "basic_bounds",
    "uniform_bounds",
    "improved_bounds",
    "explicit_bounds",
    "boundary_bounds",
    "min_expectation",
    "METHODS",
]

METHODS = ("escape", "basic", "uniform", "improved", "explicit_h",
           "explicit_h_kappa", "explicit_uniform", "boundary")


@dataclass(frozen=True)
class BoundReport:
    """Lower bounds for one (x0, l) with the constants that produced them."""

    x0: float | None
    l: float
    method: str
    persistence_bound: float | None
    lowdensity_bound: float | None
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        for v in (self.persistence_bound, self.lowdensity_bound):
            if v is not None and not (0.0 <= v <= 1.0):
                raise ValueError(f"bound outside [0,1]: {v}")


def _require_thresholds(regime: RegimeAnalysis):
    if not regime.has_thresholds:
        raise PreconditionError(
            "configuration has no thresholds (amplitude outside the "
            "threshold regime)")


def _prod(values) -> float:
    out = 1.0
    for v in values:
        out *= v
    return out


# ----------------------------------------------------------------------


def escape_bound(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis,
                 alpha_frac: float = 0.5) -> BoundReport:
    """Favorable-run bound for reaching (a, H) from any start in (0, a]."""
    if not 0.0 < alpha_frac < 1.0:
        raise DomainError("alpha_frac must lie in (0, 1)")
    l = regime.l
    drop = regime.l_escape_threshold  # = -F(b) = worst loss below a
    if l <= drop:
        raise PreconditionError(
            f"l = {l} does not clear the drop threshold {drop:.6g}")
    if l >= regime.l_max_invariance:
        raise PreconditionError(
            f"l = {l} is not below the invariance bound "
            f"{regime.l_max_invariance:.6g}")
    delta = alpha_frac * (l - drop)
    p1 = tail_prob_upper(noise, (drop + delta) / l)
    K = math.floor(regime.a / delta) + 1
    return BoundReport(
        x0=None, l=l, method="escape",
        persistence_bound=p1**K, lowdensity_bound=None,
        constants={"delta": delta, "p1": p1, "K": K, "alpha_frac": alpha_frac})


def escape_bound_best(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis,
                      n_grid: int = 99) -> BoundReport:
    """Sweep the free split parameter and keep the largest escape bound.

    The bound p1^K trades tail mass (small alpha_frac) against step count
    (large alpha_frac); the maximizer is configuration dependent.
    """
    best = None
    for i in range(1, n_grid + 1):
        frac = i / (n_grid + 1)
        rep = escape_bound(m, noise, regime, alpha_frac=frac)
        if best is None or rep.persistence_bound > best.persistence_bound:
            best = rep
    return best


def _persistence_basic(m, noise, regime, anchor):
    l = regime.l
    A = local_min_over(m, anchor, regime.u_l)
    if A <= -l:
        raise PreconditionError(f"A = {A:.6g} <= -l at anchor {anchor}")
    p1 = tail_prob_upper(noise, 1.0 - (l + A) / (2.0 * l))
    K1 = math.floor(2.0 * (regime.u_l - anchor) / (l + A)) + 1
    return A, p1, K1


def _lowdensity_basic(m, noise, regime, anchor):
    l = regime.l
    B = local_max_over(m, regime.v_core, anchor)
    if B >= l:
        raise PreconditionError(f"B = {B:.6g} >= l at anchor {anchor}")
    p2 = tail_prob_lower(noise, -1.0 + (l - B) / (2.0 * l))
    K2 = math.floor(2.0 * (anchor - regime.v_core) / (l - B)) + 1
    return B, p2, K2


def basic_bounds(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis,
                 x0: float) -> BoundReport:
    """Fixed-gain run bounds; each side reported only where it applies.

    Above u_l the persistence side is exactly 1 (absorbing zone); below the
    corridor the low-density side is exactly 1.  In between, the bound
    kicks in on (alpha_l, u_l] resp. [v_core, beta_l).  Configurations
    without an upper threshold (F(a) <= l) still get the low-density side.
    """
    if regime.v_core is None:
        raise PreconditionError(
            "configuration has no drop-side thresholds (amplitude outside "
            "the admissible range)")
    if not 0.0 <= x0 <= regime.H:
        raise DomainError(f"x0 = {x0} outside [0, H]")
    l = regime.l
    constants: dict = {}
    persistence = lowdensity = None
    if regime.u_l is not None:
        if x0 > regime.u_l:
            persistence = 1.0
        elif x0 > regime.alpha_l:
            A, p1, K1 = _persistence_basic(m, noise, regime, x0)
            persistence = p1**K1
            constants.update(A=A, p1=p1, K1=K1)
    if x0 < regime.v_core:
        lowdensity = 1.0
    elif regime.beta_l is not None and x0 < regime.beta_l:
        B, p2, K2 = _lowdensity_basic(m, noise, regime, x0)
        lowdensity = p2**K2
        constants.update(B=B, p2=p2, K2=K2)
    return BoundReport(x0=x0, l=l, method="basic",
                       persistence_bound=persistence,
                       lowdensity_bound=lowdensity, constants=constants)


def uniform_bounds(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis,
                   interval: tuple[float, float]) -> BoundReport:
    """Anchor the basic bounds at interior points alpha < beta.

    The persistence bound holds for every x0 in [alpha, H]; the low-density
    bound for every x0 in [0, beta].  When the corridor is genuinely mixed
    (alpha_l < beta_l) and (alpha, beta) sits inside (alpha_l, beta_l), both
    apply to every x0 in between.
    """
    _require_thresholds(regime)
    alpha, beta = interval
    if not regime.alpha_l < alpha < regime.u_l:
        raise PreconditionError(
            f"alpha must lie in (alpha_l, u_l) = "
            f"({regime.alpha_l:.6g}, {regime.u_l:.6g})")
    if not regime.v_core < beta < regime.beta_l:
        raise PreconditionError(
            f"beta must lie in (v_core, beta_l) = "
            f"({regime.v_core:.6g}, {regime.beta_l:.6g})")
    A, p1, K1 = _persistence_basic(m, noise, regime, alpha)
    B, p2, K2 = _lowdensity_basic(m, noise, regime, beta)
    mixed = (regime.alpha_l < regime.beta_l
             and regime.alpha_l < alpha and beta < regime.beta_l)
    return BoundReport(
        x0=None, l=regime.l, method="uniform",
        persistence_bound=p1**K1, lowdensity_bound=p2**K2,
        constants={"alpha": alpha, "beta": beta, "A": A, "B": B,
                   "p1": p1, "p2": p2, "K1": K1, "K2": K2,
                   "persistence_valid_for": (alpha, regime.H),
                   "lowdensity_valid_for": (0.0, beta),
                   "mixed_zone": mixed})


def _improved_ingredients(m, regime, x0):
    l = regime.l
    if not regime.F_monotone_on_core:
        raise PreconditionError("F is not increasing across the corridor")
    if not regime.v_core < x0 < regime.u_l:
        raise PreconditionError(
            f"x0 = {x0} outside the corridor ({regime.v_core:.6g}, "
            f"{regime.u_l:.6g})")
    F0 = eval_F(m, x0)
    eps = (l + F0) / 2.0
    delta = (l - F0) / 2.0
    K1 = math.floor((regime.u_l - x0) / eps) + 1
    K2 = math.floor((x0 - regime.v_core) / delta) + 1
    eps_i = [(l + 2.0 * eval_F(m, x0 + (i - 1) * eps) - F0) / (2.0 * l)
             for i in range(1, K1 + 1)]
    delta_i = [(l - 2.0 * eval_F(m, max(x0 - (i - 1) * delta, 0.0)) + F0)
               / (2.0 * l) for i in range(1, K2 + 1)]
    return F0, eps, delta, K1, K2, eps_i, delta_i


def improved_bounds(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis,
                    x0: float) -> BoundReport:
    """Step-by-step product bounds for increasing F on the corridor."""
    _require_thresholds(regime)
    F0, eps, delta, K1, K2, eps_i, delta_i = _improved_ingredients(m, regime, x0)
    lam = [tail_prob_upper(noise, 1.0 - e) for e in eps_i]
    mu = [tail_prob_lower(noise, -1.0 + d) for d in delta_i]
    return BoundReport(
        x0=x0, l=regime.l, method="improved",
        persistence_bound=_prod(lam), lowdensity_bound=_prod(mu),
        constants={"F_x0": F0, "eps": eps, "delta": delta, "K1": K1,
                   "K2": K2, "eps_i": eps_i, "delta_i": delta_i,
                   "lambda_i": lam, "mu_i": mu})


def _clamped_factor(h: float, length: float) -> float:
    # a density floor h turns an interval of that length into probability
    # >= h * min(length, 2), itself capped at 1
    return min(h * min(length, 2.0), 1.0)


def explicit_bounds(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis,
                    x0: float, h: float | None = None,
                    kappa: float | None = None,
                    variant: str = "h") -> BoundReport:
    """Closed-form relaxations of the improved bounds.

    variant "h": needs a density floor h > 0 (defaults to the noise's
    declared floor).  variant "h_kappa": additionally uses the expansivity
    constant kappa (defaults to the regime's).  variant "uniform": uniform
    noise only, h = 1/2.
    """
    _require_thresholds(regime)
    l = regime.l
    if variant == "uniform":
        if noise.kind != "uniform":
            raise PreconditionError("variant 'uniform' requires uniform noise")
        h = 0.5
        method = "explicit_uniform"
    elif variant == "h_kappa":
        h = noise.density_floor if h is None else h
        method = "explicit_h_kappa"
    elif variant == "h":
        h = noise.density_floor if h is None else h
        method = "explicit_h"
    else:
        raise DomainError(f"unknown variant {variant!r}")
    if h is None or h <= 0.0:
        raise PreconditionError("a positive density floor h is required")

    F0, eps, delta, K1, K2, eps_i, delta_i = _improved_ingredients(m, regime, x0)
    constants = {"h": h, "eps": eps, "delta": delta, "K1": K1, "K2": K2}
    if method == "explicit_h":
        persistence = _prod(_clamped_factor(h, e) for e in eps_i)
        lowdensity = _prod(_clamped_factor(h, d) for d in delta_i)
    else:
        kappa = regime.kappa if kappa is None else kappa
        if kappa is None or kappa < 0.0:
            raise PreconditionError(
                "variant with kappa requires the expansivity constant")
        constants["kappa"] = kappa
        persistence = _prod(
            _clamped_factor(h, (eps / l) * (1.0 + kappa * (i - 1)))
            for i in range(1, K1 + 1))
        lowdensity = _prod(
            _clamped_factor(h, (delta / l) * (1.0 + kappa * (i - 1)))
            for i in range(1, K2 + 1))
    return BoundReport(x0=x0, l=l, method=method,
                       persistence_bound=persistence,
                       lowdensity_bound=lowdensity, constants=constants)


def boundary_bounds(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis,
                    x0: float) -> BoundReport:
    """One-step capture probabilities into the absorbing zones.

    P{f(x0) + l*chi lands in (u_l, H)} below u_l, and mirrored into
    [0, v_core) above v_core.  Both tend to 1 at the matching corridor edge
    whenever the density is bounded.
    """
    _require_thresholds(regime)
    if not regime.v_core < x0 < regime.u_l:
        raise PreconditionError(
            f"x0 = {x0} outside the corridor ({regime.v_core:.6g}, "
            f"{regime.u_l:.6g})")
    l = regime.l
    fx = eval_f(m, x0)
    up = tail_prob_upper(noise, (regime.u_l - fx) / l) \
        - tail_prob_upper(noise, (regime.H - fx) / l)
    down = tail_prob_lower(noise, (regime.v_core - fx) / l)
    return BoundReport(x0=x0, l=l, method="boundary",
                       persistence_bound=max(up, 0.0),
                       lowdensity_bound=down,
                       constants={"f_x0": fx})


def min_expectation(noise: NoiseSpec, l: float) -> float:
    """Floor on the long-run expectation of x_n: l times the mean positive
    part of the noise (x_n >= max(l*chi_n, 0) pathwise)."""
    if l < 0.0:
        raise DomainError("l must be non-negative")
    return l * mean_positive_part(noise)
