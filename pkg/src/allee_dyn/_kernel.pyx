# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernel for built-in maps under uniform noise.

Mirror of allee_dyn._kernel_py: identical expression shapes, identical libm
calls, identical draw order (one double per step from a per-trial Philox
stream), so trajectories agree bit-for-bit with the pure-Python kernel.
Compiled with -ffp-contract=off to keep that true.  Trials run without the
GIL, which lets chunked callers scale across threads.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, sin, M_PI

import numpy as np

cimport numpy as cnp
from numpy.random cimport bitgen_t

cnp.import_array()

DEF MODE_PLAIN = 0
DEF MODE_THRESHOLD = 1
DEF MODE_INTERVAL = 2

DEF OUTCOME_UNDECIDED = 0
DEF OUTCOME_PERSISTENT = 1
DEF OUTCOME_LOW = 2

_CAPSULE_NAME = b"BitGenerator"


cdef inline double map_eval(int mid, double x) noexcept nogil:
    if mid == 1:  # example-6-1 / boukal-hop
        return 4.0 * x / (2.0 + (x - 3.0) * (x - 3.0))
    elif mid == 2:  # example-6-2 / boukal-burgman
        return 4.0 * x * x / (2.0 + x) * exp(2.0 * (1.0 - x))
    elif mid == 3:  # demo-4-3
        if x < 1.0:
            return 3.0 * x / (3.0 + (x - 2.0) * (x - 2.0))
        elif x < 5.0:
            return x - sin(M_PI * (x - 1.0)) - 0.25
        else:
            return 8.55 * x / (8.0 + (x - 6.0) * (x - 6.0))
    elif mid == 4:  # demo-4-4
        if x < 2.0:
            return 16.0 * x / (15.0 + (x - 3.0) * (x - 3.0))
        elif x < 12.0:
            return x - sin(0.5 * M_PI * x) / (4.0 * x)
        else:
            return (x - 10.0) / (1.0 + (x - 13.0) * (x - 13.0)) + 11.0
    elif mid == 5:  # sine
        return x - sin(x)
    return x


cdef inline double next_chi(bitgen_t *rng) noexcept nogil:
    return 2.0 * rng.next_double(rng.state) - 1.0


cdef void trial_plain(bitgen_t *rng, int mid, double l, double x0,
                      long n_max, double *out_final,
                      double *out_tail) noexcept nogil:
    cdef double x = x0
    cdef long tail_len = n_max // 5
    if tail_len < 1:
        tail_len = 1
    cdef long tail_from = n_max - tail_len
    cdef double acc = 0.0
    cdef long n
    for n in range(1, n_max + 1):
        x = map_eval(mid, x) + l * next_chi(rng)
        if x < 0.0:
            x = 0.0
        if n > tail_from:
            acc += x
    out_final[0] = x
    out_tail[0] = acc / tail_len


cdef void trial_threshold(bitgen_t *rng, int mid, double l, double x0,
                          long n_max, double lo, double hi,
                          signed char *out_outcome, long *out_hit,
                          double *out_final) noexcept nogil:
    cdef double x = x0
    cdef long n
    if x > hi:
        out_outcome[0] = OUTCOME_PERSISTENT
        out_hit[0] = 0
        out_final[0] = x
        return
    if x < lo:
        out_outcome[0] = OUTCOME_LOW
        out_hit[0] = 0
        out_final[0] = x
        return
    for n in range(1, n_max + 1):
        x = map_eval(mid, x) + l * next_chi(rng)
        if x < 0.0:
            x = 0.0
        if x > hi:
            out_outcome[0] = OUTCOME_PERSISTENT
            out_hit[0] = n
            out_final[0] = x
            return
        if x < lo:
            out_outcome[0] = OUTCOME_LOW
            out_hit[0] = n
            out_final[0] = x
            return
    out_outcome[0] = OUTCOME_UNDECIDED
    out_hit[0] = -1
    out_final[0] = x


cdef void trial_interval(bitgen_t *rng, int mid, double l, double x0,
                         long n_max, double lo, double hi, long post_steps,
                         signed char *out_outcome, long *out_hit,
                         double *out_extra, double *out_final) noexcept nogil:
    cdef double x = x0
    cdef long hit = -1
    cdef long n
    cdef long violations = 0
    if lo < x < hi:
        hit = 0
    else:
        for n in range(1, n_max + 1):
            x = map_eval(mid, x) + l * next_chi(rng)
            if x < 0.0:
                x = 0.0
            if lo < x < hi:
                hit = n
                break
    if hit < 0:
        out_outcome[0] = OUTCOME_UNDECIDED
        out_hit[0] = -1
        out_extra[0] = 0.0
        out_final[0] = x
        return
    for n in range(post_steps):
        x = map_eval(mid, x) + l * next_chi(rng)
        if x < 0.0:
            x = 0.0
        if not (lo < x < hi):
            violations += 1
    out_outcome[0] = OUTCOME_PERSISTENT
    out_hit[0] = hit
    out_extra[0] = violations
    out_final[0] = x


def run_trials_uniform(int mid, double l, double x0, long n_max,
                       list capsules, int mode, double lo, double hi,
                       long post_steps=0):
    """Run one trial per Philox capsule; see _kernel_py.run_trials."""
    cdef Py_ssize_t n = len(capsules)
    outcomes = np.zeros(n, dtype=np.int8)
    hits = np.full(n, -1, dtype=np.int64)
    extra = np.zeros(n, dtype=np.float64)
    final = np.empty(n, dtype=np.float64)
    cdef signed char[::1] ov = outcomes
    cdef long[::1] hv = hits
    cdef double[::1] ev = extra
    cdef double[::1] fv = final
    cdef bitgen_t *rng
    cdef Py_ssize_t i
    cdef object capsule
    for i in range(n):
        capsule = capsules[i]
        if not PyCapsule_IsValid(capsule, _CAPSULE_NAME):
            raise ValueError("expected a BitGenerator capsule")
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, _CAPSULE_NAME)
        with nogil:
            if mode == MODE_PLAIN:
                trial_plain(rng, mid, l, x0, n_max, &fv[i], &ev[i])
            elif mode == MODE_THRESHOLD:
                trial_threshold(rng, mid, l, x0, n_max, lo, hi,
                                &ov[i], &hv[i], &fv[i])
            elif mode == MODE_INTERVAL:
                trial_interval(rng, mid, l, x0, n_max, lo, hi, post_steps,
                               &ov[i], &hv[i], &ev[i], &fv[i])
    return outcomes, hits, extra, final
