#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the pure-Python fallback.

Both kernels produce bit-identical trajectories (asserted here on every
workload), so the only difference is wall time.  Run from the repo root:

    python benchmarks/bench_kernels.py
"""

import os
import time

import numpy as np

from allee_dyn import _backend, maps, noise, rng


def _keys(n, seed=1):
    return [(s.key0, s.key1) for s in (rng.derive(seed, i) for i in range(n))]


WORKLOADS = [
    ("mixed-zone classification (example-6-1, 20k trials)",
     dict(m=maps.builtin("example-6-1"), l=0.2, x0=1.5, n_max=100_000,
          keys=_keys(20_000), mode=_backend.MODE_THRESHOLD,
          lo=0.3611808, hi=1.7399889)),
    ("tail-mean full runs (example-6-1, 1k trials x 10k steps)",
     dict(m=maps.builtin("example-6-1"), l=0.2, x0=0.1, n_max=10_000,
          keys=_keys(1_000), mode=_backend.MODE_PLAIN, lo=0.0, hi=0.0)),
    ("escape hitting (example-6-2, 2k trials)",
     dict(m=maps.builtin("example-6-2"), l=0.04, x0=0.01, n_max=100_000,
          keys=_keys(2_000), mode=_backend.MODE_INTERVAL, lo=0.2, hi=1.8)),
]


def run(spec, force_py):
    env_before = os.environ.get("ALLEE_DYN_FORCE_PY")
    os.environ["ALLEE_DYN_FORCE_PY"] = "1" if force_py else "0"
    try:
        t0 = time.perf_counter()
        out = _backend.run_trials(spec["m"], noise.uniform(), spec["l"],
                                  spec["x0"], spec["n_max"], spec["keys"],
                                  spec["mode"], spec["lo"], spec["hi"])
        return time.perf_counter() - t0, out
    finally:
        if env_before is None:
            os.environ.pop("ALLEE_DYN_FORCE_PY", None)
        else:
            os.environ["ALLEE_DYN_FORCE_PY"] = env_before


def main():
    if not _backend.compiled_available():
        print("compiled kernel not built; nothing to compare")
        return
    print(f"{'workload':58s} {'compiled':>9s} {'python':>9s} {'speedup':>8s}")
    for name, spec in WORKLOADS:
        t_c, out_c = run(spec, force_py=False)
        t_p, out_p = run(spec, force_py=True)
        for a, b in zip(out_c, out_p):
            assert np.array_equal(a, b), "kernels diverged"
        print(f"{name:58s} {t_c:8.3f}s {t_p:8.3f}s {t_p / t_c:7.1f}x")


if __name__ == "__main__":
    main()
