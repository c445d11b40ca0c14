"""FNV-1a-64 corpus alignment hash.

Must byte-for-byte match the hash the scoring toolkit computes from the
same corpus: FNV-1a-64 over the UTF-8 sample ids joined by 0x0A, in row
order.
"""

_OFFSET = 0xCBF29CE484222325
_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data):
    h = _OFFSET
    for byte in data:
        h = ((h ^ byte) * _PRIME) & _MASK64
    return h


def alignment_hash_of_ids(ids):
    return fnv1a64(b"\x0a".join(i.encode("utf-8") for i in ids))
