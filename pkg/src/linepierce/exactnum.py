"""Exact scalar arithmetic: rationals and single-radical quadratic extensions.

Every geometric predicate in this package bottoms out in a sign evaluation
of a value of the form a + b*sqrt(d) with rational a, b and rational d >= 0.
Rationals are plain ``fractions.Fraction`` (always reduced, positive
denominator, canonical), re-exported as ``Rational``.  ``QuadExt`` adds the
single radical needed for roots of rational quadratics; it deliberately does
not support towers of distinct radicals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Union

Rational = Fraction

Scalar = Union[Fraction, "QuadExt"]


def parse_rational(text: str) -> Fraction:
    """Parse "num/den" (or a bare integer) into a Fraction."""
    return Fraction(text.strip())


def format_rational(x: Fraction) -> str:
    """Render a Fraction as "num/den", always with an explicit denominator."""
    return f"{x.numerator}/{x.denominator}"


def compare(x: Fraction, y: Fraction) -> int:
    """Total order on rationals: -1, 0 or +1."""
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


def rational_square_root(x: Fraction) -> Fraction | None:
    """Exact square root if x is the square of a rational, else None."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class QuadExt:
    """The exact value a + b*sqrt(d), with a, b, d rational and d >= 0.

    Canonical form: b == 0 implies d == 0, and d is never a rational square
    (square radicands fold into the rational part at construction).  Two
    values with distinct nonzero radicands cannot be combined; the quadratics
    solved here only ever produce both roots over one radicand.
    """

    a: Fraction
    b: Fraction
    d: Fraction

    def __post_init__(self) -> None:
        a, b, d = Fraction(self.a), Fraction(self.b), Fraction(self.d)
        if d < 0:
            raise ValueError("negative radicand")
        if b != 0:
            r = rational_square_root(d)
            if r is not None:
                a, b, d = a + b * r, Fraction(0), Fraction(0)
        if b == 0:
            d = Fraction(0)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @staticmethod
    def of(x: Scalar | int) -> QuadExt:
        if isinstance(x, QuadExt):
            return x
        return QuadExt(Fraction(x), Fraction(0), Fraction(0))

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.a

    def _common_radicand(self, other: QuadExt) -> Fraction:
        if self.b != 0 and other.b != 0 and self.d != other.d:
            raise ValueError(
                f"incompatible radicands sqrt({self.d}) and sqrt({other.d})"
            )
        return self.d if self.b != 0 else other.d

    def __add__(self, other: Scalar | int) -> QuadExt:
        o = QuadExt.of(other)
        d = self._common_radicand(o)
        return QuadExt(self.a + o.a, self.b + o.b, d)

    __radd__ = __add__

    def __neg__(self) -> QuadExt:
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other: Scalar | int) -> QuadExt:
        return self + (-QuadExt.of(other))

    def __rsub__(self, other: Scalar | int) -> QuadExt:
        return QuadExt.of(other) + (-self)

    def __mul__(self, other: Scalar | int) -> QuadExt:
        o = QuadExt.of(other)
        d = self._common_radicand(o)
        return QuadExt(
            self.a * o.a + self.b * o.b * d,
            self.a * o.b + self.b * o.a,
            d,
        )

    __rmul__ = __mul__

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d) in {-1, 0, +1}."""
        sa = compare(self.a, Fraction(0))
        if self.b == 0:
            return sa
        sb = compare(self.b, Fraction(0))
        if sa == 0:
            return sb
        if sa == sb:
            return sa
        # Opposite signs: |a| vs |b|*sqrt(d) decided by squaring.
        # d is not a rational square here, so the squares never tie.
        return sa * compare(self.a * self.a, self.b * self.b * self.d)

    def __bool__(self) -> bool:
        return self.sign() != 0

    def __abs__(self) -> QuadExt:
        return -self if self.sign() < 0 else self

    def _diff_sign(self, other: Scalar | int) -> int:
        return (self - QuadExt.of(other)).sign()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (QuadExt, Fraction, int)):
            return NotImplemented
        return self._diff_sign(other) == 0

    def __hash__(self) -> int:
        if self.is_rational:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other: Scalar | int) -> bool:
        return self._diff_sign(other) < 0

    def __le__(self, other: Scalar | int) -> bool:
        return self._diff_sign(other) <= 0

    def __gt__(self, other: Scalar | int) -> bool:
        return self._diff_sign(other) > 0

    def __ge__(self, other: Scalar | int) -> bool:
        return self._diff_sign(other) >= 0

    def __str__(self) -> str:
        return (
            f"{format_rational(self.a)} + "
            f"{format_rational(self.b)}*sqrt({format_rational(self.d)})"
        )


def parse_quadext(text: str) -> QuadExt:
    """Inverse of str(QuadExt): "a + b*sqrt(d)" with num/den parts."""
    head, _, tail = text.partition("+")
    if "*sqrt(" not in tail or not tail.rstrip().endswith(")"):
        raise ValueError(f"malformed quadratic extension literal: {text!r}")
    b_part, _, d_part = tail.partition("*sqrt(")
    return QuadExt(
        parse_rational(head),
        parse_rational(b_part),
        parse_rational(d_part.rstrip().rstrip(")")),
    )


def quad_sign(x: QuadExt) -> int:
    return x.sign()


def scalar_sign(x: Scalar | int) -> int:
    if isinstance(x, QuadExt):
        return x.sign()
    return compare(Fraction(x), Fraction(0))


def scalar_le(x: Scalar | int, y: Scalar | int) -> bool:
    return scalar_sign(_scalar_sub(y, x)) >= 0


def scalar_lt(x: Scalar | int, y: Scalar | int) -> bool:
    return scalar_sign(_scalar_sub(y, x)) > 0


def _scalar_sub(x: Scalar | int, y: Scalar | int) -> Scalar:
    if isinstance(x, QuadExt) or isinstance(y, QuadExt):
        return QuadExt.of(x) - QuadExt.of(y)
    return Fraction(x) - Fraction(y)


@dataclass(frozen=True)
class RootSet:
    """Real roots of a rational quadratic: none, one, two (sorted), or all."""

    kind: str  # "none" | "one" | "two" | "all"
    roots: tuple[QuadExt, ...] = ()


def solve_quadratic(
    a: Fraction,
    b: Fraction,
    c: Fraction,
    allow_identically_zero: bool = False,
) -> RootSet:
    """Exact real roots of a*x^2 + b*x + c = 0.

    Roots live in the extension by sqrt(b^2 - 4ac).  The identically-zero
    equation is an error unless the caller opts in, in which case it reports
    kind "all".
    """
    if a == 0 and b == 0 and c == 0:
        if allow_identically_zero:
            return RootSet("all")
        raise ValueError("degenerate equation: 0 = 0 has all reals as roots")
    if a == 0:
        if b == 0:
            return RootSet("none")
        return RootSet("one", (QuadExt.of(Fraction(-c, b)),))
    disc = b * b - 4 * a * c
    if disc < 0:
        return RootSet("none")
    if disc == 0:
        return RootSet("one", (QuadExt.of(Fraction(-b, 2 * a)),))
    lo = QuadExt(Fraction(-b, 2 * a), -abs(Fraction(1, 2 * a)), disc)
    hi = QuadExt(Fraction(-b, 2 * a), abs(Fraction(1, 2 * a)), disc)
    return RootSet("two", (lo, hi))


def quadratic_residual(a: Fraction, b: Fraction, c: Fraction, x: QuadExt) -> QuadExt:
    """a*x^2 + b*x + c evaluated exactly; zero iff x is a root."""
    return x * x * a + x * b + c
