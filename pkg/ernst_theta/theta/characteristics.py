"""
Theta Characteristics

A characteristic is a pair (p, q) of complex g-vectors. Half-integer
characteristics (entries in {0, ½}) have a parity 4⟨p, q⟩ mod 2; the odd ones
give the odd theta functions used for prime forms.
"""

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Characteristics:
    """Pair (p, q) stored as tuples so instances are hashable."""

    p: Tuple[complex, ...]
    q: Tuple[complex, ...]

    def __post_init__(self):
        if len(self.p) != len(self.q):
            raise ValueError(f"p and q differ in length: {len(self.p)} != {len(self.q)}")

    @classmethod
    def of(cls, p: Sequence[complex], q: Sequence[complex]) -> "Characteristics":
        return cls(tuple(complex(x) for x in p), tuple(complex(x) for x in q))

    @classmethod
    def zero(cls, genus: int) -> "Characteristics":
        return cls((0j,) * genus, (0j,) * genus)

    @classmethod
    def half(cls, p_bits: Sequence[int], q_bits: Sequence[int]) -> "Characteristics":
        """Half-integer characteristic from 0/1 bit vectors."""
        return cls.of([0.5 * b for b in p_bits], [0.5 * b for b in q_bits])

    @property
    def genus(self) -> int:
        return len(self.p)

    @property
    def p_vec(self) -> np.ndarray:
        return np.array(self.p, dtype=complex)

    @property
    def q_vec(self) -> np.ndarray:
        return np.array(self.q, dtype=complex)

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for x in self.p + self.q)

    @property
    def is_half_integer(self) -> bool:
        values = np.concatenate([self.p_vec, self.q_vec])
        return bool(np.all(np.abs(2.0 * values - np.round(2.0 * values.real)) < 1e-12))

    @property
    def parity(self) -> Optional[int]:
        """0 (even) or 1 (odd) for half-integer characteristics, else None."""
        if not self.is_half_integer:
            return None
        product = 4.0 * float(np.dot(self.p_vec.real, self.q_vec.real))
        return int(round(product)) % 2

    def shifted_q(self, delta: np.ndarray) -> "Characteristics":
        return Characteristics.of(self.p_vec, self.q_vec + delta)

    def label(self) -> str:
        def fmt(values):
            return ",".join(f"{v.real:g}" if v.imag == 0 else f"{v.real:g}{v.imag:+g}i" for v in values)

        return f"[{fmt(self.p)}|{fmt(self.q)}]"


def half_integer_characteristics(genus: int) -> Iterator[Characteristics]:
    """All 4^g half-integer characteristics in a fixed order."""
    for p_bits in itertools.product((0, 1), repeat=genus):
        for q_bits in itertools.product((0, 1), repeat=genus):
            yield Characteristics.half(p_bits, q_bits)


def odd_characteristics(genus: int) -> Iterator[Characteristics]:
    """The 2^{g-1}(2^g − 1) odd half-integer characteristics."""
    return (ch for ch in half_integer_characteristics(genus) if ch.parity == 1)
