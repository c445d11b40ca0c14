"""Binary embedding-matrix file format, row-aligned with the corpus.

Layout (little-endian): magic "LGPS", u32 version=1, u32 dtype=1 (binary32),
u64 N, u32 D, u64 alignment_hash, then N*D binary32 values row-major.
The 32-byte header is followed immediately by the payload.
"""

import struct
from dataclasses import dataclass

import numpy as np

from langsep.errors import AlignmentError, EmbeddingFormatError

MAGIC = b"LGPS"
VERSION = 1
DTYPE_BINARY32 = 1
_HEADER = struct.Struct("<4sIIQIQ")
HEADER_SIZE = _HEADER.size  # 32 bytes

_SCAN_ROWS = 4096


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N x D binary32 matrix plus cached double-precision squared row norms."""

    n: int
    d: int
    data: np.ndarray
    alignment_hash: int
    sq_norms: np.ndarray

    @classmethod
    def from_array(cls, values, alignment_hash):
        """Wrap an in-memory array (converted to binary32) as a matrix."""
        data = np.ascontiguousarray(values, dtype=np.float32)
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
            raise EmbeddingFormatError("empty matrix")
        _check_finite(data)
        return cls(
            n=data.shape[0],
            d=data.shape[1],
            data=data,
            alignment_hash=int(alignment_hash),
            sq_norms=_row_sq_norms(data),
        )


def _row_sq_norms(data):
    out = np.empty(data.shape[0], dtype=np.float64)
    for start in range(0, data.shape[0], _SCAN_ROWS):
        chunk = data[start:start + _SCAN_ROWS].astype(np.float64)
        out[start:start + _SCAN_ROWS] = np.einsum("ij,ij->i", chunk, chunk)
    return out


def _check_finite(data):
    for start in range(0, data.shape[0], _SCAN_ROWS):
        chunk = data[start:start + _SCAN_ROWS]
        finite = np.isfinite(chunk)
        if not finite.all():
            row, col = np.argwhere(~finite)[0]
            raise EmbeddingFormatError(
                f"non-finite value at row {start + int(row)}, column {int(col)}"
            )


def write_embeddings(values, alignment_hash, path):
    """Write a matrix in the binary layout; byte-exact for identical inputs."""
    data = np.ascontiguousarray(values, dtype="<f4")
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
        raise EmbeddingFormatError("empty matrix")
    _check_finite(data)
    n, d = data.shape
    header = _HEADER.pack(
        MAGIC, VERSION, DTYPE_BINARY32, n, d, int(alignment_hash)
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def load_embeddings(path):
    """Load an embedding file; data is memory-mapped, norms are cached.

    Rejects bad magic, unsupported version/dtype, truncated payloads, and
    non-finite values (reported with row and column).
    """
    try:
        with open(path, "rb") as fh:
            header = fh.read(HEADER_SIZE)
    except OSError as exc:
        raise EmbeddingFormatError(
            f"cannot read embedding file {path}: {exc}"
        ) from exc
    if len(header) < HEADER_SIZE:
        raise EmbeddingFormatError(f"{path}: truncated header")
    magic, version, dtype, n, d, alignment_hash = _HEADER.unpack(header)
    if magic != MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise EmbeddingFormatError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_BINARY32:
        raise EmbeddingFormatError(f"{path}: unsupported dtype {dtype}")
    if n == 0 or d == 0:
        raise EmbeddingFormatError(f"{path}: empty matrix")

    import os

    payload = os.path.getsize(path) - HEADER_SIZE
    expected = n * d * 4
    if payload < expected:
        raise EmbeddingFormatError(
            f"{path}: truncated payload ({payload} bytes, expected {expected})"
        )
    if payload > expected:
        raise EmbeddingFormatError(
            f"{path}: unexpected trailing data ({payload - expected} bytes)"
        )

    data = np.memmap(path, dtype="<f4", mode="r", offset=HEADER_SIZE, shape=(n, d))
    _check_finite(data)
    return EmbeddingMatrix(
        n=n,
        d=d,
        data=data,
        alignment_hash=alignment_hash,
        sq_norms=_row_sq_norms(data),
    )


def validate_alignment(corpus, matrix):
    """Check that matrix rows correspond one-to-one with corpus samples."""
    if matrix.n != len(corpus):
        raise AlignmentError(
            f"row count mismatch: corpus has {len(corpus)} samples, "
            f"embeddings have {matrix.n} rows"
        )
    if matrix.alignment_hash != corpus.alignment_hash:
        raise AlignmentError(
            "alignment hash mismatch: embeddings were not extracted from "
            "this corpus (or row order differs)"
        )
