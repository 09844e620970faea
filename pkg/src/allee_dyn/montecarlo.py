"""Batch Monte-Carlo estimation of persistence / low-density probabilities.

Trial i under base seed s always runs on the derived stream (s, i), so
estimates are bit-reproducible at any parallelism degree: trials are cut
into fixed-size chunks, chunks may execute on worker threads (capped by the
ALLEE_DYN_THREADS environment variable), and results are reduced in chunk
order.  Undecided trials count toward neither outcome, which keeps the
empirical proportions conservative against the one-sided theoretical lower
bounds they are compared with.

Confidence intervals are Wilson-score at 99%.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .analysis import RegimeAnalysis
from .bounds import BoundReport, min_expectation
from .errors import DomainError, PreconditionError
from .maps import MapSpec
from .noise import NoiseSpec
from .rng import PURPOSE_TRIAL, derive

__all__ = [
    "McEstimate",
    "VerificationVerdict",
    "wilson_interval",
    "estimate",
    "expectation_estimate",
    "verify_bounds",
    "verify_expectation",
    "sweep",
    "thread_count",
]

Z99 = 2.5758293035489004  # standard normal quantile at 0.995
CHUNK = 1024
UNDECIDED_VERDICT_FRACTION = 0.01

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class McEstimate:
    """Aggregated outcome counts with Wilson 99% intervals."""

    x0: float
    l: float
    trials: int
    n_max: int
    base_seed: int
    n_persistent: int
    n_low: int
    n_undecided: int
    p_hat_persist: float
    p_hat_low: float
    ci_persist: tuple[float, float]
    ci_low: tuple[float, float]
    mean_tail_estimate: float | None = None
    mode: str = "threshold"

    def __post_init__(self):
        if self.n_persistent + self.n_low + self.n_undecided != self.trials:
            raise ValueError("outcome counts must sum to trials")


@dataclass(frozen=True)
class VerificationVerdict:
    status: str
    checks: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.status == PASS


def wilson_interval(k: int, n: int, z: float = Z99) -> tuple[float, float]:
    """Wilson score interval for k successes out of n trials."""
    if n <= 0:
        raise DomainError("n must be positive")
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def thread_count(requested: int | None = None) -> int:
    """Worker threads: explicit request, else ALLEE_DYN_THREADS, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("ALLEE_DYN_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise DomainError(f"bad ALLEE_DYN_THREADS value {env!r}") from exc
    return 1


def _chunked_run(m, noise, l, x0, n_max, trials, base_seed, mode, lo, hi,
                 post_steps, threads):
    """Run trials on derived streams in fixed chunks; chunk-ordered reduce."""
    chunks = [(start, min(start + CHUNK, trials))
              for start in range(0, trials, CHUNK)]

    def run(span):
        start, stop = span
        keys = []
        for i in range(start, stop):
            st = derive(base_seed, i, PURPOSE_TRIAL)
            keys.append((st.key0, st.key1))
        return _backend.run_trials(m, noise, l, x0, n_max, keys, mode,
                                   lo, hi, post_steps)

    workers = thread_count(threads)
    if workers == 1 or len(chunks) == 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    outcomes = np.concatenate([p[0] for p in parts])
    hits = np.concatenate([p[1] for p in parts])
    extra = np.concatenate([p[2] for p in parts])
    final = np.concatenate([p[3] for p in parts])
    return outcomes, hits, extra, final


def _aggregate(x0, l, trials, n_max, base_seed, outcomes, mode,
               mean_tail=None) -> McEstimate:
    n_pers = int((outcomes == _backend._kernel_py.OUTCOME_PERSISTENT).sum())
    n_low = int((outcomes == _backend._kernel_py.OUTCOME_LOW).sum())
    n_und = trials - n_pers - n_low
    return McEstimate(
        x0=x0, l=l, trials=trials, n_max=n_max, base_seed=base_seed,
        n_persistent=n_pers, n_low=n_low, n_undecided=n_und,
        p_hat_persist=n_pers / trials, p_hat_low=n_low / trials,
        ci_persist=wilson_interval(n_pers, trials),
        ci_low=wilson_interval(n_low, trials),
        mean_tail_estimate=mean_tail, mode=mode)


def estimate(m: MapSpec, noise: NoiseSpec, regime: RegimeAnalysis, x0: float,
             trials: int, n_max: int, base_seed: int,
             threads: int | None = None,
             absorption_steps: int = 0) -> McEstimate:
    """Estimate outcome probabilities from `trials` independent streams.

    In the threshold regime trials classify by strict crossings of
    (v_l, u_l); in the escape regime by entry into (a, H), where
    ``absorption_steps`` extra steps per trial verify the entry is absorbing
    (any excursion raises: the invariance window makes it impossible).
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if x0 < 0.0:
        raise DomainError("x0 must be non-negative")
    if regime.has_thresholds:
        outcomes, _, _, _ = _chunked_run(
            m, noise, regime.l, x0, n_max, trials, base_seed,
            _backend.MODE_THRESHOLD, regime.v_l, regime.u_l, 0, threads)
        return _aggregate(x0, regime.l, trials, n_max, base_seed, outcomes,
                          "threshold")
    if regime.regime == "escape":
        outcomes, _, extra, _ = _chunked_run(
            m, noise, regime.l, x0, n_max, trials, base_seed,
            _backend.MODE_INTERVAL, regime.a, regime.H, absorption_steps,
            threads)
        if absorption_steps and extra.max() > 0:
            raise PreconditionError(
                "a trajectory left (a, H) after entry; the invariance "
                "window is not satisfied")
        return _aggregate(x0, regime.l, trials, n_max, base_seed, outcomes,
                          "escape")
    raise PreconditionError(
        "classification unavailable: amplitude admits neither thresholds "
        "nor the escape window")


def expectation_estimate(m: MapSpec, noise: NoiseSpec, l: float, x0: float,
                         trials: int, n_max: int, base_seed: int,
                         threads: int | None = None) -> tuple[float, float]:
    """(mean, standard error) of per-trial tail means (last 20% of steps)."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    _, _, tails, _ = _chunked_run(
        m, noise, l, x0, n_max, trials, base_seed, _backend.MODE_PLAIN,
        0.0, 0.0, 0, threads)
    se = float(tails.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(tails.mean()), se


def verify_bounds(est: McEstimate, reports: list[BoundReport]) -> VerificationVerdict:
    """One-sided check: empirical CI uppers must not fall below proven
    lower bounds on the same configuration."""
    checks = []
    status = PASS
    if est.n_undecided > UNDECIDED_VERDICT_FRACTION * est.trials:
        return VerificationVerdict(
            INCONCLUSIVE,
            (f"undecided fraction {est.n_undecided / est.trials:.3g} "
             f"exceeds {UNDECIDED_VERDICT_FRACTION:g}",))
    for rep in reports:
        if rep.x0 is not None and abs(rep.x0 - est.x0) > 1e-12:
            raise DomainError(
                f"bound report at x0 = {rep.x0} does not match estimate at "
                f"x0 = {est.x0}")
        if abs(rep.l - est.l) > 1e-12:
            raise DomainError("bound report and estimate disagree on l")
        for side, bound, ci in (("persistence", rep.persistence_bound, est.ci_persist),
                                ("low-density", rep.lowdensity_bound, est.ci_low)):
            if bound is None:
                continue
            ok = ci[1] >= bound - 1e-12
            checks.append(
                f"{rep.method}/{side}: bound {bound:.6g} vs CI high {ci[1]:.6g}"
                f" -> {'ok' if ok else 'VIOLATED'}")
            if not ok:
                status = FAIL
    return VerificationVerdict(status, tuple(checks))


def verify_expectation(m: MapSpec, noise: NoiseSpec, l: float, x0: float,
                       trials: int, n_max: int, base_seed: int,
                       threads: int | None = None) -> VerificationVerdict:
    """Check the expectation floor: tail mean >= l*alpha - 3 SE."""
    if trials < 1000:
        raise PreconditionError("expectation check needs >= 1000 trials")
    mean, se = expectation_estimate(m, noise, l, x0, trials, n_max,
                                    base_seed, threads)
    floor = min_expectation(noise, l)
    ok = mean >= floor - 3.0 * se
    detail = (f"tail mean {mean:.6g} vs floor {floor:.6g} - 3*SE "
              f"({se:.3g}) -> {'ok' if ok else 'VIOLATED'}")
    return VerificationVerdict(PASS if ok else FAIL, (detail,))


def sweep(m: MapSpec, noise: NoiseSpec, make_regime, grid, trials: int,
          n_max: int, base_seed: int,
          threads: int | None = None) -> list[McEstimate]:
    """One estimate per (x0, l) grid point, reproducible row by row.

    ``make_regime(l)`` supplies the threshold analysis for each amplitude;
    rows use disjoint seed offsets so they stay independent and any row can
    be reproduced in isolation.
    """
    out = []
    for row, (x0, l) in enumerate(grid):
        regime = make_regime(l)
        out.append(estimate(m, noise, regime, x0, trials, n_max,
                            base_seed + row, threads))
    return out
