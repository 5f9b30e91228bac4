"""Fixed-length bit strings with flip-one-bit mutation.

Bits are packed into a Python ``int`` (position ``i`` lives in bit ``i``) and
the number of ones is cached, so values are immutable and cheap to copy.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BitString", "random_bitstring", "flip_one"]


@dataclass(frozen=True)
class BitString:
    n: int
    packed: int = 0
    ones: int = field(init=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"bit string length must be >= 1, got {self.n}")
        if self.packed < 0 or self.packed >> self.n:
            raise ValueError("packed value has bits outside the string length")
        object.__setattr__(self, "ones", self.packed.bit_count())

    @classmethod
    def from_string(cls, text: str) -> "BitString":
        """Parse a ``"0101"`` string; the first character is position 0."""
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {text!r}")
        packed = 0
        for i, ch in enumerate(text):
            if ch == "1":
                packed |= 1 << i
        return cls(len(text), packed)

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        packed = 0
        for i, b in enumerate(bits):
            packed |= b << i
        return cls(len(bits), packed)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.packed >> i) & 1 for i in range(self.n))

    def to_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not -self.n <= i < self.n:
            raise IndexError(i)
        return (self.packed >> (i % self.n)) & 1

    def flip(self, pos: int) -> "BitString":
        if not 0 <= pos < self.n:
            raise IndexError(pos)
        return BitString(self.n, self.packed ^ (1 << pos))

    def hamming(self, other: "BitString") -> int:
        return (self.packed ^ other.packed).bit_count()

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


def random_bitstring(n: int, rng: np.random.Generator) -> BitString:
    """Uniformly random string; consumes exactly ``n`` doubles from ``rng``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return BitString.from_bits(rng.random(n) < 0.5)


def flip_one(individual: BitString, rng: np.random.Generator) -> BitString:
    """Copy of ``individual`` with one uniformly chosen bit inverted."""
    return individual.flip(int(rng.random() * individual.n))
