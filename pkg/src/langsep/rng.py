"""Deterministic randomness on top of the Philox 4x64 counter generator.

Each random pipeline stage owns a stream keyed by (seed, stage label), so
stages never consume from each other's sequences. The sampling primitives
(bounded integers, shuffles, Gumbel draws) are implemented here directly on
the raw Philox output: numpy pins BitGenerator streams across releases but
not Generator method streams, and identical selections across versions and
machines is a hard requirement for this toolkit.
"""

import numpy as np

from langsep.kernels import fnv1a64

_MASK64 = (1 << 64) - 1
_BUFFER = 1024

STAGE_RAND = "select.rand"
STAGE_KMEANS = "select.kmeans"
STAGE_DSIR = "select.dsir"
STAGE_CURRICULUM = "curriculum"
STAGE_REPORT_PAIRS = "report.pairs"


class RandomStream:
    """Buffered stream of raw 64-bit Philox words with sampling helpers."""

    def __init__(self, seed, label):
        key = (fnv1a64(label.encode("utf-8")) << 64) | (int(seed) & _MASK64)
        self._bitgen = np.random.Philox(key=key)
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def raw(self, n):
        """Next n raw uint64 words."""
        out = np.empty(n, dtype=np.uint64)
        filled = 0
        while filled < n:
            if self._pos == len(self._buf):
                self._buf = self._bitgen.random_raw(max(_BUFFER, n - filled))
                self._pos = 0
            take = min(n - filled, len(self._buf) - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        return out

    def raw1(self):
        return int(self.raw(1)[0])

    def randbelow(self, n):
        """Uniform integer in [0, n) by rejection sampling (unbiased)."""
        if n <= 0:
            raise ValueError("randbelow requires n > 0")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.raw1()
            if r < limit:
                return r % n

    def uniform(self):
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.raw1() >> 11) * 2.0 ** -53

    def shuffle(self, seq):
        """In-place Fisher-Yates shuffle of a mutable sequence."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def sample_indices(self, n, k):
        """k distinct indices from range(n), in draw order (partial Fisher-Yates)."""
        if not 0 <= k <= n:
            raise ValueError("sample size out of range")
        arr = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            arr[i], arr[j] = arr[j], arr[i]
        return arr[:k]

    def gumbel(self, n):
        """n standard Gumbel draws; uniforms kept strictly inside (0, 1)."""
        u = ((self.raw(n) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
        return -np.log(-np.log(u))
