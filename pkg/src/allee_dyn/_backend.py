"""Kernel selection: compiled extension when available, pure Python otherwise.

The compiled kernel covers the hot case (built-in map, uniform noise).
Everything else (expression-tree maps, shaped noises) runs through the
pure-Python kernel.  Both produce bit-identical trajectories on the shared
cases; ``ALLEE_DYN_FORCE_PY=1`` forces the fallback, e.g. for benchmarks.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np
from numpy.random import Philox

from . import _kernel_py
from .maps import MapSpec, eval_f
from .noise import NoiseSpec

try:
    from . import _kernel as _compiled
except ImportError:  # pragma: no cover - build-environment dependent
    _compiled = None

MODE_PLAIN = _kernel_py.MODE_PLAIN
MODE_THRESHOLD = _kernel_py.MODE_THRESHOLD
MODE_INTERVAL = _kernel_py.MODE_INTERVAL


def _force_python() -> bool:
    return os.environ.get("ALLEE_DYN_FORCE_PY", "") not in ("", "0")


def compiled_available() -> bool:
    return _compiled is not None


def backend_for(m: MapSpec, noise: NoiseSpec) -> str:
    if (_compiled is not None and not _force_python()
            and m.kernel_id > 0 and m.scalar_fn is not None
            and noise.kind == "uniform"):
        return "compiled"
    return "python"


def _scalar_f(m: MapSpec):
    if m.scalar_fn is not None:
        return m.scalar_fn
    return lambda x: eval_f(m, x)


def _transform(noise: NoiseSpec):
    if noise.kind == "uniform":
        return _kernel_py.uniform_chi
    ppf = noise.ppf
    return lambda u: np.clip(np.asarray(ppf(u), dtype=float), -1.0, 1.0)


def run_trials(m: MapSpec, noise: NoiseSpec, l: float, x0: float, n_max: int,
               keys: Sequence[tuple[int, int]], mode: int,
               lo: float = 0.0, hi: float = 0.0, post_steps: int = 0):
    """Dispatch a batch of trials to the best kernel.

    Returns (outcomes int8, hit_steps int64, extra float64, final float64);
    see _kernel_py.run_trials for mode semantics.
    """
    if backend_for(m, noise) == "compiled":
        bgs = [Philox(key=np.array(k, dtype=np.uint64)) for k in keys]
        capsules = [bg.capsule for bg in bgs]
        return _compiled.run_trials_uniform(
            m.kernel_id, l, x0, n_max, capsules, mode, lo, hi, post_steps)
    return _kernel_py.run_trials(
        _scalar_f(m), _transform(noise), l, x0, n_max, keys, mode, lo, hi,
        post_steps)
