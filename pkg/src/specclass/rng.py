"""Portable seeded random stream (SplitMix64).

The generator is counter based: the k-th 64-bit output (k >= 1) is
``mix(seed + k * GAMMA mod 2**64)``.  That lets the scalar path and the
vectorised numpy path produce identical streams, and it makes the output
bit-identical on every platform.
"""

import math

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1
_TWO_POW_M53 = 1.0 / (1 << 53)


def _mix(z):
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream with bounded-integer, uniform and normal draws.

    Parameters
    ----------
    seed : int
        Unsigned 64-bit seed; larger values are reduced modulo 2**64.
    """

    def __init__(self, seed=0):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed) & MASK64
        self.counter = 0

    def next_u64(self):
        self.counter += 1
        return _mix((self.seed + self.counter * GAMMA) & MASK64)

    def u64_array(self, n):
        """Next ``n`` outputs as a uint64 array (same values as ``next_u64``)."""
        k = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + k * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        return z ^ (z >> np.uint64(31))

    def bounded(self, n):
        """Unbiased integer in ``[0, n)`` by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def uniform(self):
        """Double in ``[0, 1)`` built from the top 53 bits."""
        return (self.next_u64() >> 11) * _TWO_POW_M53

    def uniform_array(self, n):
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53

    def normal(self):
        """Standard normal via the cosine branch of Box-Muller (two draws)."""
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def normal_array(self, n):
        u = self.uniform_array(2 * n)
        u1 = 1.0 - u[0::2]
        u2 = u[1::2]
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
