"""Deterministic pseudorandom generator used for partitioning and synthesis.

The generator is SplitMix64 (Steele, Lea & Flood), chosen because it is a
small, well-known, counter-style generator that can be reimplemented exactly
from its published constants.  Every randomized operation in this package is
a pure function of an explicit 64-bit seed; nothing reads the wall clock or
global RNG state.

Reproduction recipe (documented so fold assignments can be replayed by other
tools):

* state update: ``state = (state + 0x9E3779B97F4A7C15) mod 2^64``
* output mix:   ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2^64)
* bounded draw: ``below(n) = next_u64() % n``
* unit float:   ``next_float() = (next_u64() >> 11) * 2^-53``
* shuffle: Fisher-Yates from the last index down, swapping index ``i`` with
  ``below(i + 1)``
* child stream: seeded with ``next_u64()`` of the parent
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """One SplitMix64 output mix of a 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream with the fixed golden-ratio increment."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n). Uses plain modulo; the bias is
        below 2^-50 for every n used here and keeping the rule trivial makes
        cross-implementation replay easy."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        return self.next_u64() % n

    def next_float(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def shuffle(self, items: list) -> list:
        """In-place Fisher-Yates shuffle; returns the same list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def spawn(self) -> "SplitMix64":
        """Child stream seeded from this one; streams do not overlap in
        practice because the seed is fed through the output mix."""
        return SplitMix64(self.next_u64())

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Standard Box-Muller transform, one deviate per call.

        The spare cosine/sine pair is deliberately not cached so that the
        number of ``next_u64`` draws per call is constant.
        """
        u1 = ((self.next_u64() >> 11) + 0.5) * 2.0 ** -53  # strictly in (0, 1)
        u2 = self.next_float()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
