# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Mirrors :mod:`qproc._fallback` step for step."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double TINY = 1e-300


def blackwell_filter(double[:, :, ::1] E, double[::1] p0, double[::1] uniforms,
                     Py_ssize_t burn_in):
    """Run the Blackwell filter driven by pre-drawn uniforms.

    Returns ``(hvals, restarts, max_mass_dev)``; ``restarts == -1`` flags a
    filter that emits nothing from its initial vector.
    """
    cdef Py_ssize_t n_obs = E.shape[0], dh = E.shape[1]
    cdef Py_ssize_t steps = uniforms.shape[0]
    cdef Py_ssize_t t, e, i, j, pick
    cdef double qsum, acc, target, h, x, mass, dev, max_dev = 0.0
    cdef long restarts = 0
    cdef bint failed = 0, fresh = 1
    if burn_in > steps:
        burn_in = steps
    hvals_arr = np.zeros(steps - burn_in, dtype=np.float64)
    cdef double[::1] hvals = hvals_arr
    cdef double *p = <double *> malloc(dh * sizeof(double))
    cdef double *v = <double *> malloc(n_obs * dh * sizeof(double))
    cdef double *q = <double *> malloc(n_obs * sizeof(double))
    if p == NULL or v == NULL or q == NULL:
        free(p); free(v); free(q)
        raise MemoryError()
    try:
        with nogil:
            for i in range(dh):
                p[i] = p0[i]
            t = 0
            while t < steps:
                qsum = 0.0
                for e in range(n_obs):
                    acc = 0.0
                    for j in range(dh):
                        x = 0.0
                        for i in range(dh):
                            x = x + p[i] * E[e, i, j]
                        v[e * dh + j] = x
                        acc = acc + x
                    q[e] = acc
                    qsum = qsum + acc
                if qsum <= TINY:
                    if fresh:
                        failed = 1
                        break
                    restarts += 1
                    fresh = 1
                    for i in range(dh):
                        p[i] = p0[i]
                    continue
                if t >= burn_in:
                    h = 0.0
                    for e in range(n_obs):
                        if q[e] > 0.0:
                            x = q[e] / qsum
                            h = h - x * log(x)
                    hvals[t - burn_in] = h
                target = uniforms[t] * qsum
                pick = n_obs - 1
                acc = 0.0
                for e in range(n_obs):
                    acc = acc + q[e]
                    if target < acc:
                        pick = e
                        break
                while pick > 0 and q[pick] <= 0.0:
                    pick -= 1
                mass = q[pick]
                acc = 0.0
                for j in range(dh):
                    p[j] = v[pick * dh + j] / mass
                    acc = acc + p[j]
                dev = fabs(acc - 1.0)
                if dev > max_dev:
                    max_dev = dev
                fresh = 0
                t += 1
    finally:
        free(p); free(v); free(q)
    if failed:
        return hvals_arr, -1, max_dev
    return hvals_arr, restarts, max_dev
