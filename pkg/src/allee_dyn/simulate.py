"""Trajectory iteration, outcome classification, and pathwise checks.

The iteration is x_{n+1} = max(f(x_n) + l*chi_{n+1}, 0).  Classification is
by strict crossings of the outer thresholds: a trajectory is ``persistent``
at the first step with x > u_l (absorbed upward almost surely) and
``low_density`` at the first step with x < v_l (trapped near zero almost
surely); ``undecided`` is a first-class outcome, never coerced.  In the
escape regime (l above the drop threshold) classification is instead entry
into the invariant interval (a, H).

Single-trajectory runs record the path: every step up to 10_000, every k-th
beyond that, and always the last 50 before classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DomainError, PreconditionError
from .maps import MapSpec, eval_F, eval_f
from .noise import NoiseSpec
from .rng import RngState, uniform_block

__all__ = [
    "TrajectoryResult",
    "step",
    "simulate",
    "check_trap_below_b1",
    "check_invariance_aH",
    "check_escape_all",
]

PATH_FULL_STEPS = 10_000
PATH_TAIL_KEEP = 50

PERSISTENT = "persistent"
LOW_DENSITY = "low_density"
UNDECIDED = "undecided"

_OUTCOME_NAMES = {
    _backend._kernel_py.OUTCOME_UNDECIDED: UNDECIDED,
    _backend._kernel_py.OUTCOME_PERSISTENT: PERSISTENT,
    _backend._kernel_py.OUTCOME_LOW: LOW_DENSITY,
}


@dataclass(frozen=True)
class TrajectoryResult:
    """One simulated path with its outcome classification."""

    outcome: str
    hit_step: int | None
    steps: np.ndarray          # indices of stored path values
    values: np.ndarray         # x at those indices
    stream: RngState
    n_max: int

    @property
    def final_x(self) -> float:
        return float(self.values[-1])


def step(x: float, chi: float, l: float, m: MapSpec) -> float:
    """One iteration: max(f(x) + l*chi, 0)."""
    if not (math.isfinite(x) and math.isfinite(chi)):
        raise DomainError("step inputs must be finite")
    v = eval_f(m, x) + l * chi
    return v if v > 0.0 else 0.0


def _classify(x: float, u_l: float | None, v_l: float | None) -> str | None:
    if u_l is not None and x > u_l:
        return PERSISTENT
    if v_l is not None and x < v_l:
        return LOW_DENSITY
    return None


def simulate(m: MapSpec, noise: NoiseSpec, l: float, x0: float, n_max: int,
             stream: RngState, u_l: float | None = None,
             v_l: float | None = None) -> TrajectoryResult:
    """Iterate up to n_max steps, stopping at the first threshold crossing.

    Classification runs only when both thresholds are supplied; without them
    the raw path is produced and the outcome stays ``undecided``.
    """
    if x0 < 0.0 or not math.isfinite(x0):
        raise DomainError("x0 must be finite and non-negative")
    if l < 0.0:
        raise DomainError("l must be non-negative")
    classify = u_l is not None and v_l is not None
    if classify and not v_l < u_l:
        raise PreconditionError("need v_l < u_l for classification")

    thin = max(1, math.ceil(n_max / PATH_FULL_STEPS))
    kept_n: list[int] = [0]
    kept_x: list[float] = [x0]
    ring: list[tuple[int, float]] = []

    f = m.scalar_fn if m.scalar_fn is not None else (lambda t: eval_f(m, t))
    transform = _backend._transform(noise)

    x = x0
    outcome = _classify(x, u_l, v_l) if classify else None
    hit = 0 if outcome else None
    state = stream
    n = 0
    block = np.empty(0)
    ptr = 0
    while outcome is None and n < n_max:
        if ptr == len(block):
            u, state = uniform_block(state, _backend._kernel_py.BLOCK)
            block = transform(u)
            ptr = 0
        chi = block[ptr]
        ptr += 1
        n += 1
        x = f(x) + l * chi
        if x < 0.0:
            x = 0.0
        if n <= PATH_FULL_STEPS or n % thin == 0:
            kept_n.append(n)
            kept_x.append(x)
        ring.append((n, x))
        if len(ring) > PATH_TAIL_KEEP:
            ring.pop(0)
        if classify:
            outcome = _classify(x, u_l, v_l)
            if outcome:
                hit = n

    merged = dict(zip(kept_n, kept_x))
    merged.update(ring)
    ns = np.array(sorted(merged), dtype=np.int64)
    xs = np.array([merged[k] for k in ns], dtype=np.float64)
    return TrajectoryResult(
        outcome=outcome or UNDECIDED, hit_step=hit,
        steps=ns, values=xs, stream=stream, n_max=n_max)


def check_trap_below_b1(m: MapSpec, l: float, b1: float, x0: float,
                        path: TrajectoryResult) -> bool:
    """Pathwise trap check: with l <= b1 - f(b1) and x0 in [0, b1], the whole
    path must stay in [0, b1]."""
    fb1 = eval_f(m, b1)
    if fb1 >= b1:
        raise PreconditionError(f"f(b1) = {fb1:.6g} >= b1 = {b1}")
    if l > b1 - fb1:
        raise PreconditionError(
            f"l = {l} exceeds the trap margin b1 - f(b1) = {b1 - fb1:.6g}")
    if not 0.0 <= x0 <= b1:
        raise PreconditionError(f"x0 = {x0} outside [0, b1]")
    vals = path.values
    return bool(np.all(vals >= 0.0) and np.all(vals <= b1))


def check_invariance_aH(m: MapSpec, l: float, a: float, H: float, x0: float,
                        path: TrajectoryResult,
                        f_H: float | None = None) -> bool:
    """Pathwise invariance check for (a, H) under the amplitude window."""
    if f_H is None:
        from .analysis import compute_f_H
        _, f_H = compute_f_H(m, H)
    bound = min(H - f_H, eval_F(m, a))
    if l >= bound:
        raise PreconditionError(
            f"l = {l} is not below min(H - f_H, F(a)) = {bound:.6g}")
    if not a < x0 < H:
        raise PreconditionError(f"x0 = {x0} outside (a, H)")
    vals = path.values
    return bool(np.all(vals > a) and np.all(vals < H))


def check_escape_all(m: MapSpec, noise: NoiseSpec, l: float, a1: float,
                     H1: float, x0: float, n_max: int,
                     stream: RngState) -> TrajectoryResult:
    """Simulate until the trajectory enters the invariant interval (a1, H1).

    Requires the unconditional-persistence window: l above the worst drop
    on [0, a1] and below the invariance bound of (a1, H1).
    """
    from .analysis import compute_f_H, local_min_over

    if not 0.0 < x0 < H1:
        raise PreconditionError(f"x0 = {x0} outside (0, H1)")
    worst_drop = -local_min_over(m, 0.0, a1)
    _, f_H1 = compute_f_H(m, H1)
    upper = min(H1 - f_H1, eval_F(m, a1))
    if not worst_drop < l < upper:
        raise PreconditionError(
            f"l = {l} outside the escape window ({worst_drop:.6g}, {upper:.6g})")

    key = (stream.key0, stream.key1)
    outcomes, hits, _, final = _backend.run_trials(
        m, noise, l, x0, n_max, [key], _backend.MODE_INTERVAL, a1, H1)
    outcome = _OUTCOME_NAMES[int(outcomes[0])]
    hit = int(hits[0]) if hits[0] >= 0 else None
    return TrajectoryResult(
        outcome=outcome, hit_step=hit,
        steps=np.array([hit if hit is not None else n_max]),
        values=np.array([final[0]]), stream=stream, n_max=n_max)
