"""Portable seeded PRNG: splitmix64 for seeding and stream splitting, xorshift64* for draws.

Pinned here (rather than ``random.Random``) so traces are byte-identical across
Python versions and platforms.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
VERSION = "xorshift64star-v1"


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        s = splitmix64(seed & MASK64)
        self.state = s or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]`` (rejection sampling, no modulo bias)."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            r = self.next_u64()
            if r < limit:
                return lo + r % span

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def chance(self, num: int, den: int) -> bool:
        return self.randint(0, den - 1) < num

    def shuffle(self, items: list) -> None:
        for k in range(len(items) - 1, 0, -1):
            j = self.randint(0, k)
            items[k], items[j] = items[j], items[k]

    def split(self, *labels: int) -> "XorShift64Star":
        """Independent child stream keyed by integer labels."""
        x = self.state
        for lab in labels:
            x = splitmix64(x ^ splitmix64(lab & MASK64))
        return XorShift64Star(x)


def stream(seed: int, *labels: int) -> XorShift64Star:
    x = seed & MASK64
    for lab in labels:
        x = splitmix64(x ^ splitmix64(lab & MASK64))
    return XorShift64Star(x)
