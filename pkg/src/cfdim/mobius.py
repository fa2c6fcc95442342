"""Digit maps T_i(z) = 1/(z + i) as exact integer Mobius matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr

from .numerics import PrecisionContext


@dataclass(frozen=True)
class DigitSet:
    """The finite digit set A, stored strictly increasing."""

    digits: tuple[int, ...]

    def __init__(self, digits: Iterable[int]):
        ds = tuple(int(d) for d in digits)
        if not ds:
            raise ValueError("digit set must be nonempty")
        if any(d < 1 for d in ds):
            raise ValueError(f"digits must be positive integers, got {ds}")
        if len(set(ds)) != len(ds):
            raise ValueError(f"repeated digit in {ds}")
        object.__setattr__(self, "digits", tuple(sorted(ds)))

    @classmethod
    def parse(cls, text: str) -> "DigitSet":
        """Parse a comma list such as ``"1,2"``."""
        try:
            return cls(int(part) for part in text.split(",") if part.strip())
        except ValueError as exc:
            raise ValueError(f"bad digit set {text!r}: {exc}") from None

    def __iter__(self):
        return iter(self.digits)

    def __len__(self):
        return len(self.digits)

    def __contains__(self, i):
        return i in self.digits

    @property
    def smallest(self) -> int:
        return self.digits[0]

    @property
    def largest(self) -> int:
        return self.digits[-1]

    def label(self) -> str:
        return ",".join(map(str, self.digits))


@dataclass(frozen=True)
class MobiusMatrix:
    """z -> (a z + b) / (c z + d) with exact integer entries."""

    a: int
    b: int
    c: int
    d: int

    def __matmul__(self, other: "MobiusMatrix") -> "MobiusMatrix":
        return MobiusMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)


IDENTITY = MobiusMatrix(1, 0, 0, 1)


def digit_matrix(i: int) -> MobiusMatrix:
    if i < 1:
        raise ValueError(f"digit must be >= 1, got {i}")
    return MobiusMatrix(0, 1, 1, i)


def word_matrix(word: Sequence[int]) -> MobiusMatrix:
    """Matrix of T_{w_1} o ... o T_{w_n} (left-to-right product)."""
    if len(word) == 0:
        raise ValueError("word must be nonempty")
    a, b, c, d = 1, 0, 0, 1
    for i in word:
        if i < 1:
            raise ValueError(f"digit must be >= 1, got {i}")
        # (a b; c d) @ (0 1; 1 i)
        a, b, c, d = b, a + i * b, d, c + i * d
    return MobiusMatrix(a, b, c, d)


def check_word(word: Sequence[int], digit_set: DigitSet) -> None:
    bad = [i for i in word if i not in digit_set]
    if bad:
        raise ValueError(f"letters {bad} not in digit set {digit_set.digits}")


def fixed_point(word: Sequence[int], ctx: PrecisionContext) -> mpfr:
    """The fixed point in (0, 1) of T_w.

    It is the positive root of c z^2 + (d - a) z - b = 0; the square root of
    the exact integer discriminant is the only rounding step.
    """
    a, b, c, d = word_matrix(word).as_tuple()
    disc = (d - a) ** 2 + 4 * b * c
    with ctx.local():
        return ((a - d) + gmpy2.sqrt(mpfr(disc))) / (2 * c)


def orbit_multiplier(word: Sequence[int], ctx: PrecisionContext) -> mpfr:
    """|T_w'(z_w)| = 1/(c z_w + d)^2, the product of squared orbit points."""
    m = word_matrix(word)
    z = fixed_point(word, ctx)
    with ctx.local():
        return 1 / (m.c * z + m.d) ** 2


def log_multiplier_from_trace(trace: int, period: int, ctx: PrecisionContext) -> mpfr:
    """ln of the orbit multiplier, using only the trace of the word matrix.

    The eigenvalues of a word matrix are the roots of x^2 - tr x + (-1)^n,
    and c z_w + d is the one of larger modulus, so the multiplier is
    4 / (tr + sqrt(tr^2 - 4 (-1)^n))^2.
    """
    sign = -1 if period % 2 else 1
    with ctx.local():
        root = gmpy2.sqrt(mpfr(trace * trace - 4 * sign))
        return 2 * gmpy2.log(2 / (trace + root))
