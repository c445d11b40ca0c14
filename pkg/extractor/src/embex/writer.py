"""Writer for the binary embedding file format.

Layout (little-endian): magic "LGPS", u32 version=1, u32 dtype=1
(binary32), u64 N, u32 D, u64 alignment hash, then N x D float32 values
row-major.
"""

import struct

import numpy as np

MAGIC = b"LGPS"
VERSION = 1
DTYPE_BINARY32 = 1
_HEADER = struct.Struct("<4sIIQIQ")


def write_embeddings(values, alignment_hash, path):
    data = np.ascontiguousarray(values, dtype="<f4")
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
        raise ValueError("empty matrix")
    if not np.isfinite(data).all():
        raise ValueError("non-finite value in embedding matrix")
    n, d = data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, DTYPE_BINARY32, n, d,
                              int(alignment_hash)))
        fh.write(data.tobytes())
