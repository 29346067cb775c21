"""Deterministic 64-bit pseudo-random generator for reproducible sampling.

All stochastic pieces of the toolkit (row bagging, per-tree feature subsets,
fold shuffling, synthetic data in the test suite) draw from this one
generator so that results are bit-identical across runs, machines, and
worker counts. The core is xorshift64* (shift triple 12/25/27 with the
M32 multiplier); raw seeds pass through a splitmix64 finalizer so that
consecutive integers (seed, seed + 1, ...) still start from well-mixed,
nonzero states.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 finalizer step; maps any 64-bit input to a mixed output."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class XorShift64(object):
    """xorshift64* stream seeded explicitly; never use global random state."""

    def __init__(self, seed: int):
        state = splitmix64(seed & _MASK64)
        if state == 0:
            state = 0x2545F4914F6CDD1D
        self._state = state

    def next_u64(self) -> int:
        s = self._state
        s ^= (s >> 12)
        s ^= (s << 25) & _MASK64
        s ^= (s >> 27)
        self._state = s
        return (s * 0x2545F4914F6CDD1D) & _MASK64

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via the multiply-shift reduction."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        return (self.next_u64() * n) >> 64

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), returned sorted ascending.

        Partial Fisher-Yates; sorting keeps downstream accumulation order
        canonical so results do not depend on draw order.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n} indices")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        picked = pool[:k]
        picked.sort()
        return picked
