"""Pure-numpy fallback for the compiled kernels."""

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def accumulate_block(gram, row_sq_norms, col_sq_norms, col_langs,
                     row_start, col_start, acc):
    """Numpy version of the tile accumulator; see _core.accumulate_block."""
    n_rows, n_cols = gram.shape
    if row_sq_norms.shape[0] != n_rows or col_sq_norms.shape[0] != n_cols:
        raise ValueError("dimension mismatch between gram and squared norms")
    if col_langs.shape[0] != n_cols or acc.shape[0] != n_rows:
        raise ValueError("dimension mismatch between gram and accumulator")
    d = row_sq_norms[:, None] + col_sq_norms[None, :] - 2.0 * gram
    lo = max(row_start, col_start)
    hi = min(row_start + n_rows, col_start + n_cols)
    if lo < hi:
        diag = np.arange(lo, hi)
        d[diag - row_start, diag - col_start] = 0.0
    np.maximum(d, 0.0, out=d)
    np.sqrt(d, out=d)
    onehot = np.zeros((n_cols, acc.shape[1]))
    onehot[np.arange(n_cols), col_langs] = 1.0
    acc += d @ onehot


def fnv1a64(data):
    """FNV-1a 64-bit hash of a bytes-like object."""
    h = _FNV_OFFSET
    for b in bytes(data):
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h
