"""Compiled hot kernels: distance-block accumulation and FNV-1a hashing."""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp


def accumulate_block(double[:, ::1] gram, double[::1] row_sq_norms,
                     double[::1] col_sq_norms, cnp.int32_t[::1] col_langs,
                     Py_ssize_t row_start, Py_ssize_t col_start,
                     double[:, :] acc):
    """Add per-language distance sums for one (row block x column block) tile.

    gram holds the double-precision inner products between the two blocks.
    Each entry contributes sqrt(max(0, ||x||^2 + ||y||^2 - 2*x.y)) to
    acc[i, lang(j)]; the self-pair (same global row index) contributes 0.
    """
    cdef Py_ssize_t n_rows = gram.shape[0]
    cdef Py_ssize_t n_cols = gram.shape[1]
    cdef Py_ssize_t i, j, global_row
    cdef double d2, rn
    if row_sq_norms.shape[0] != n_rows or col_sq_norms.shape[0] != n_cols:
        raise ValueError("dimension mismatch between gram and squared norms")
    if col_langs.shape[0] != n_cols or acc.shape[0] != n_rows:
        raise ValueError("dimension mismatch between gram and accumulator")
    with nogil:
        for i in range(n_rows):
            rn = row_sq_norms[i]
            global_row = row_start + i
            for j in range(n_cols):
                if global_row == col_start + j:
                    continue
                d2 = rn + col_sq_norms[j] - 2.0 * gram[i, j]
                if d2 < 0.0:
                    d2 = 0.0
                acc[i, col_langs[j]] += sqrt(d2)


def fnv1a64(const unsigned char[::1] data):
    """FNV-1a 64-bit hash of a byte buffer."""
    cdef unsigned long long h = 14695981039346656037ULL
    cdef Py_ssize_t i
    cdef Py_ssize_t n = data.shape[0]
    with nogil:
        for i in range(n):
            h = (h ^ <unsigned long long>data[i]) * 1099511628211ULL
    return h
