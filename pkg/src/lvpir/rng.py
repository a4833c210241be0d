"""Portable seeded generator used for query sampling.

SplitMix64 (Steele, Lea, Flood 2014): the state advances by the golden-ratio
increment 0x9E3779B97F4A7C15 and each output is the state pushed through the
finalizer ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2**64). Bounded integers use
rejection sampling on the top of the 64-bit range, and k-subsets use a partial
Fisher-Yates shuffle, so any implementation of the same three steps reproduces
the same draws from the same seed.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.state = self.seed

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def sample(self, population: Sequence[T], k: int) -> list[T]:
        """Uniform k-subset (in draw order) by partial Fisher-Yates."""
        pool = list(population)
        if not 0 <= k <= len(pool):
            raise ValueError(f"cannot draw {k} items from {len(pool)}")
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def choice_weighted(self, weights: Sequence[int]) -> int:
        """Index drawn with probability proportional to non-negative integer weights."""
        total = sum(weights)
        x = self.randbelow(total)
        for i, w in enumerate(weights):
            if x < w:
                return i
            x -= w
        raise AssertionError("unreachable")

    def spawn(self, index: int) -> SplitMix64:
        """Independent child stream, a pure function of (seed, index)."""
        return SplitMix64(SplitMix64((self.seed + (index + 1) * GOLDEN) & MASK64).next_u64())

    def randbytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            out += self.next_u64().to_bytes(8, "big")
        return bytes(out[:n])
