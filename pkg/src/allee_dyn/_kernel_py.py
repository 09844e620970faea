"""Pure-Python trajectory kernel.

This is the reference implementation of the hot loop; the compiled kernel in
``_kernel.pyx`` mirrors it operation for operation (same libm calls, same
expression shapes, same draw order), so both produce bit-identical
trajectories for built-in maps under uniform noise.  Noise values are
consumed one double per step from a per-trial Philox stream, drawn in blocks
whose size never affects the values.

Modes
-----
0   full-length run, no classification; accumulates the trajectory mean over
    the last 20% of steps (``extra`` = tail mean).
1   threshold classification: outcome 1 when x > hi strictly, 2 when x < lo
    strictly, checked at step 0 and after every step.
2   interval entry: outcome 1 at the first step with lo < x < hi; after
    entry the trial keeps running for ``post_steps`` and ``extra`` counts
    the steps spent outside the interval (0 means absorption verified).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.random import Generator, Philox

BLOCK = 256

MODE_PLAIN = 0
MODE_THRESHOLD = 1
MODE_INTERVAL = 2

OUTCOME_UNDECIDED = 0
OUTCOME_PERSISTENT = 1
OUTCOME_LOW = 2


def _generator(key: tuple[int, int]) -> Generator:
    return Generator(Philox(key=np.array(key, dtype=np.uint64)))


def uniform_chi(u: np.ndarray) -> np.ndarray:
    return 2.0 * u - 1.0


class _ChiFeed:
    """Sequential noise values for one trial, drawn blockwise."""

    __slots__ = ("gen", "transform", "buf", "ptr")

    def __init__(self, key, transform):
        self.gen = _generator(key)
        self.transform = transform
        self.buf = None
        self.ptr = BLOCK

    def next(self) -> float:
        if self.ptr == BLOCK:
            self.buf = self.transform(self.gen.random(BLOCK))
            self.ptr = 0
        v = self.buf[self.ptr]
        self.ptr += 1
        return v


def run_trials(f: Callable[[float], float],
               transform: Callable[[np.ndarray], np.ndarray],
               l: float, x0: float, n_max: int,
               keys: Sequence[tuple[int, int]],
               mode: int, lo: float, hi: float,
               post_steps: int = 0):
    """Run one trial per key; returns (outcomes, hit_steps, extra, final_x)."""
    n = len(keys)
    outcomes = np.zeros(n, dtype=np.int8)
    hits = np.full(n, -1, dtype=np.int64)
    extra = np.zeros(n, dtype=np.float64)
    final = np.empty(n, dtype=np.float64)
    for i, key in enumerate(keys):
        feed = _ChiFeed(key, transform)
        if mode == MODE_PLAIN:
            final[i], extra[i] = _trial_plain(f, feed, l, x0, n_max)
        elif mode == MODE_THRESHOLD:
            outcomes[i], hits[i], final[i] = _trial_threshold(
                f, feed, l, x0, n_max, lo, hi)
        elif mode == MODE_INTERVAL:
            outcomes[i], hits[i], extra[i], final[i] = _trial_interval(
                f, feed, l, x0, n_max, lo, hi, post_steps)
        else:
            raise ValueError(f"unknown mode {mode}")
    return outcomes, hits, extra, final


def _trial_plain(f, feed, l, x0, n_max):
    x = x0
    tail_len = max(1, n_max // 5)
    tail_from = n_max - tail_len
    acc = 0.0
    for n in range(1, n_max + 1):
        x = f(x) + l * feed.next()
        if x < 0.0:
            x = 0.0
        if n > tail_from:
            acc += x
    return x, acc / tail_len


def _trial_threshold(f, feed, l, x0, n_max, lo, hi):
    x = x0
    if x > hi:
        return OUTCOME_PERSISTENT, 0, x
    if x < lo:
        return OUTCOME_LOW, 0, x
    for n in range(1, n_max + 1):
        x = f(x) + l * feed.next()
        if x < 0.0:
            x = 0.0
        if x > hi:
            return OUTCOME_PERSISTENT, n, x
        if x < lo:
            return OUTCOME_LOW, n, x
    return OUTCOME_UNDECIDED, -1, x


def _trial_interval(f, feed, l, x0, n_max, lo, hi, post_steps):
    x = x0
    hit = -1
    if lo < x < hi:
        hit = 0
    else:
        for n in range(1, n_max + 1):
            x = f(x) + l * feed.next()
            if x < 0.0:
                x = 0.0
            if lo < x < hi:
                hit = n
                break
    if hit < 0:
        return OUTCOME_UNDECIDED, -1, 0.0, x
    violations = 0
    for _ in range(post_steps):
        x = f(x) + l * feed.next()
        if x < 0.0:
            x = 0.0
        if not (lo < x < hi):
            violations += 1
    return OUTCOME_PERSISTENT, hit, float(violations), x
