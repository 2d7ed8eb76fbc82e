"""Counter-based SplitMix64 streams.

Output ``i`` (``i = 1, 2, ...``) of the stream with key ``k`` is
``fmix64(k + i * 0x9E3779B97F4A7C15 mod 2**64)`` where ``fmix64`` is the
SplitMix64 finalizer. The key of a run is ``fmix64(seed)``; replicate
``j`` of a batch with base seed ``s`` uses seed ``s ^ j``. Doubles are the
top 53 bits scaled to ``[0, 1)``. The compiled kernel implements the same
arithmetic, so both backends consume identical streams.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def fmix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int) -> int:
    return fmix64(seed & MASK64)


def replicate_seed(seed_base: int, index: int) -> int:
    return (seed_base ^ index) & MASK64


class SplitMix64:
    """Sequential view of a counter-based stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = stream_key(seed)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return fmix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV53
