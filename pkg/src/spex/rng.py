"""Counter-based SplitMix64.

Output i of a stream with key k is ``mix64(k + (i + 1) * GAMMA)``, where mix64
is the SplitMix64 finalizer (Steele, Lea and Flood, 2014). A child stream j is
keyed by ``mix64(k ^ mix64(j + GAMMA))``. Bounded integers use rejection
sampling on the top of the 64-bit word, so streams are reproducible from the
description alone.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


@dataclass
class SplitMix64:
    key: int
    counter: int = 0

    def __post_init__(self) -> None:
        self.key &= MASK

    def at(self, index: int) -> int:
        """The 64-bit word at position ``index`` without advancing."""
        return mix64(self.key + (index + 1) * GAMMA)

    def next_u64(self) -> int:
        out = self.at(self.counter)
        self.counter += 1
        return out

    def split(self, index: int) -> "SplitMix64":
        return SplitMix64(mix64(self.key ^ mix64(index + GAMMA)))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) for 1 <= n <= 2^64."""
        if n < 1 or n > 1 << 64:
            raise ValueError(f"bound {n} out of range")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + self.randbelow(hi - lo + 1)

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]
