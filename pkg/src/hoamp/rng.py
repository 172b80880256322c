"""Seedable, splittable 64-bit PRNG used everywhere randomness is needed.

SplitMix64 (Steele, Lea, Flood 2014): a single 64-bit counter advanced by a
fixed odd constant and scrambled by two xor-multiply rounds.  Chosen because it
is trivially portable, passes BigCrush, and supports cheap stream splitting:
child streams are seeded from parent outputs, so a master seed reproducibly
fans out into independent per-trajectory generators.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic generator; all outputs are pure functions of the seed."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def uniform(self) -> float:
        # 53 mantissa bits -> [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def derive(self, index: int) -> int:
        """Seed for child stream `index`; pure function of seed and index."""
        return _mix((self._state + (index + 1) * _GAMMA) & _MASK)

    def split(self, index: int) -> "SplitMix64":
        """Child generator for stream `index`, independent of parent position."""
        return SplitMix64(self.derive(index))
