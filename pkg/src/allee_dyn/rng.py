"""Splittable counter-based random streams.

Every trajectory gets its own Philox4x64 stream, keyed by
``(mix(base_seed, purpose), stream_index)``.  Philox is a counter-based
generator: the stream for a given key is a pure function of the counter, so

* trial ``i`` under base seed ``s`` always sees the same noise sequence,
  no matter how many worker threads run or in which order trials execute;
* a stream can be resumed at any draw position without replaying it.

Positions are tracked in units of double draws.  One double consumes one
64-bit output and Philox advances its counter in blocks of four outputs,
so resuming at position ``p`` means ``advance(p // 4)`` plus discarding
``p % 4`` doubles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Purpose tags keep streams used by different subsystems disjoint even for
# equal (seed, index) pairs.
PURPOSE_TRIAL = 0
PURPOSE_RUN = 1
PURPOSE_SUITE = 2


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijective 64-bit hash."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngState:
    """Immutable position in a keyed Philox stream."""

    key0: int
    key1: int
    pos: int = 0

    def key(self) -> np.ndarray:
        return np.array([self.key0, self.key1], dtype=np.uint64)


def derive(base_seed: int, stream_index: int, purpose: int = PURPOSE_TRIAL) -> RngState:
    """State at the start of stream ``stream_index`` under ``base_seed``."""
    if stream_index < 0:
        raise ValueError("stream_index must be non-negative")
    key0 = mix64((base_seed & _MASK64) ^ mix64(purpose))
    return RngState(key0=key0, key1=stream_index & _MASK64, pos=0)


def bit_generator(state: RngState) -> Philox:
    """Philox bit generator positioned at ``state.pos`` doubles.

    ``state.pos % 4`` leftover draws must be discarded by the caller;
    :func:`uniform_block` does so.  The returned object also backs the
    compiled kernel through its ``.capsule``.
    """
    bg = Philox(key=state.key())
    if state.pos:
        bg.advance(state.pos // 4)
    return bg


def uniform_block(state: RngState, n: int) -> tuple[np.ndarray, RngState]:
    """Draw ``n`` uniform [0,1) doubles; return them and the advanced state."""
    bg = bit_generator(state)
    gen = Generator(bg)
    skip = state.pos % 4
    if skip:
        gen.random(skip)
    u = gen.random(n)
    return u, RngState(state.key0, state.key1, state.pos + n)
