"""Exact half-integer arithmetic for spin quantum numbers.

Total-spin labels live on the lattice {0, 1/2, 1, 3/2, ...}.  Storing twice
the value as an int keeps every comparison and parity check exact; floats
only appear when an eigenvalue is actually needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, order=True)
class HalfInteger:
    """A number of the form n/2 with n a signed integer, stored as ``twice_value``."""

    twice_value: int

    def __post_init__(self):
        if not isinstance(self.twice_value, int):
            raise ValueError(f"twice_value must be an int, got {self.twice_value!r}")

    @classmethod
    def from_value(cls, x) -> "HalfInteger":
        """Build from an int, float or Fraction that is an exact multiple of 1/2."""
        if isinstance(x, HalfInteger):
            return x
        tv = Fraction(x) * 2
        if tv.denominator != 1:
            raise ValueError(f"{x!r} is not a half-integer")
        return cls(int(tv))

    @property
    def value(self) -> float:
        return self.twice_value / 2.0

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    def casimir_eigenvalue(self) -> float:
        """j(j+1), computed exactly in integers before the final division."""
        return self.twice_value * (self.twice_value + 2) / 4.0

    def __add__(self, other) -> "HalfInteger":
        return HalfInteger(self.twice_value + HalfInteger.from_value(other).twice_value)

    def __sub__(self, other) -> "HalfInteger":
        return HalfInteger(self.twice_value - HalfInteger.from_value(other).twice_value)

    def __neg__(self) -> "HalfInteger":
        return HalfInteger(-self.twice_value)

    def __str__(self) -> str:
        if self.twice_value % 2 == 0:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"

    def __repr__(self) -> str:
        return f"HalfInteger({self.twice_value})"


def halfint(x) -> HalfInteger:
    """Shorthand constructor accepting 1, 0.5, Fraction(3, 2) or a HalfInteger."""
    return HalfInteger.from_value(x)
