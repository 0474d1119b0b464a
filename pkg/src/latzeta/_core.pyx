# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Hot inner loops for exact heat-kernel convolution on dense windows.

`stencil_apply` advances a probability field one time step; the window
reductions reconstruct late-time return values from pairs of half-time
fields.  The pure-python module `_core_py` mirrors these signatures (and
the floating-point accumulation order of the stencil) and is selected at
import when this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def stencil_apply(
    double[:, ::1] src,
    double[:, ::1] dst,
    long[::1] dxs,
    long[::1] dys,
    double[::1] probs,
    Py_ssize_t i0,
    Py_ssize_t i1,
    Py_ssize_t j0,
    Py_ssize_t j1,
):
    """dst[i, j] = sum_k probs[k] * src[i + dxs[k], j + dys[k]] on the window.

    The caller guarantees the shifted reads stay inside ``src``.  Each
    offset contributes one contiguous axpy pass per row, which keeps the
    inner loop vectorizable.
    """
    cdef Py_ssize_t i, j, k, nk = probs.shape[0]
    cdef double p
    cdef double* drow
    cdef const double* srow
    for i in range(i0, i1):
        drow = &dst[i, 0]
        p = probs[0]
        srow = (&src[i + dxs[0], 0]) + dys[0]
        for j in range(j0, j1):
            drow[j] = p * srow[j]
        for k in range(1, nk):
            p = probs[k]
            srow = (&src[i + dxs[k], 0]) + dys[k]
            for j in range(j0, j1):
                drow[j] += p * srow[j]


def window_dot(
    double[:, ::1] a,
    double[:, ::1] b,
    Py_ssize_t i0,
    Py_ssize_t i1,
    Py_ssize_t j0,
    Py_ssize_t j1,
):
    """Sum of a[i, j] * b[i, j] over the window (row sums combined with
    compensated addition)."""
    cdef Py_ssize_t i, j
    cdef double row, total = 0.0, comp = 0.0, y, t
    for i in range(i0, i1):
        row = 0.0
        for j in range(j0, j1):
            row += a[i, j] * b[i, j]
        y = row - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def window_dot_pair(
    double[:, ::1] a,
    double[:, ::1] b,
    double[:, ::1] c,
    Py_ssize_t i0,
    Py_ssize_t i1,
    Py_ssize_t j0,
    Py_ssize_t j1,
):
    """(sum a*c, sum b*c) over the window in a single pass over ``c``."""
    cdef Py_ssize_t i, j
    cdef double row_a, row_b, cv
    cdef double tot_a = 0.0, comp_a = 0.0, tot_b = 0.0, comp_b = 0.0, y, t
    for i in range(i0, i1):
        row_a = 0.0
        row_b = 0.0
        for j in range(j0, j1):
            cv = c[i, j]
            row_a += a[i, j] * cv
            row_b += b[i, j] * cv
        y = row_a - comp_a
        t = tot_a + y
        comp_a = (t - tot_a) - y
        tot_a = t
        y = row_b - comp_b
        t = tot_b + y
        comp_b = (t - tot_b) - y
        tot_b = t
    return tot_a, tot_b


def window_sum(
    double[:, ::1] a,
    Py_ssize_t i0,
    Py_ssize_t i1,
    Py_ssize_t j0,
    Py_ssize_t j1,
):
    """Sum of a[i, j] over the window (row sums combined with compensated
    addition)."""
    cdef Py_ssize_t i, j
    cdef double row, total = 0.0, comp = 0.0, y, t
    for i in range(i0, i1):
        row = 0.0
        for j in range(j0, j1):
            row += a[i, j]
        y = row - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total
