"""Splittable, counter-based random streams.

A stream is identified by ``(seed, stream_id)``; two streams with different ids
never share state, so Monte Carlo replications can be split across streams and
merged in any order. Backed by numpy's Philox bit generator.
"""
from __future__ import annotations

import numpy as np


class RandomStream:
    """Thin wrapper over ``numpy.random.Generator`` adding exact big-integer draws."""

    def __init__(self, seed: int = 0, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def spawn(self, stream: int) -> "RandomStream":
        return RandomStream(self.seed, stream)

    def random(self, size=None):
        return self.generator.random(size)

    def poisson(self, lam, size=None):
        return self.generator.poisson(lam, size)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)``; exact for arbitrarily large ``n``."""
        n = int(n)
        if n <= 0:
            raise ValueError("randbelow needs n > 0")
        if n < 2**62:
            return int(self.generator.integers(n))
        bits = n.bit_length()
        nbytes = (bits + 7) // 8
        excess = 8 * nbytes - bits
        while True:
            r = int.from_bytes(self.generator.bytes(nbytes), "little") >> excess
            if r < n:
                return r

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream={self.stream})"


def as_stream(rng, stream: int = 0) -> RandomStream:
    """Accept a RandomStream, an int seed or None."""
    if isinstance(rng, RandomStream):
        return rng
    if rng is None:
        rng = 0
    return RandomStream(int(rng), stream)
