import struct

import numpy as np
import pytest

from embex.hashing import alignment_hash_of_ids, fnv1a64
from embex.writer import write_embeddings


def test_fnv_reference_vectors():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C


def test_alignment_hash_join_rule():
    h = 0xCBF29CE484222325
    for byte in b"x\x0ay":
        h = ((h ^ byte) * 0x100000001B3) & ((1 << 64) - 1)
    assert alignment_hash_of_ids(["x", "y"]) == h
    assert alignment_hash_of_ids(["x", "y"]) != alignment_hash_of_ids(["y", "x"])


def test_writer_layout(tmp_path):
    path = tmp_path / "e.lgps"
    values = np.array([[1.5, -2.0], [0.25, 4.0], [8.0, 0.5]],
                      dtype=np.float32)
    write_embeddings(values, 0xDEADBEEF, path)
    raw = path.read_bytes()
    assert len(raw) == 32 + 6 * 4
    magic, version, dtype, n, d, digest = struct.unpack("<4sIIQIQ", raw[:32])
    assert magic == b"LGPS" and version == 1 and dtype == 1
    assert (n, d) == (3, 2)
    assert digest == 0xDEADBEEF
    np.testing.assert_array_equal(
        np.frombuffer(raw[32:], dtype="<f4").reshape(3, 2), values
    )


def test_writer_rejects_empty(tmp_path):
    with pytest.raises(ValueError, match="empty matrix"):
        write_embeddings(np.empty((0, 3), dtype=np.float32), 0,
                         tmp_path / "e")


def test_writer_rejects_non_finite(tmp_path):
    values = np.ones((2, 2), dtype=np.float32)
    values[1, 0] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        write_embeddings(values, 0, tmp_path / "e")
