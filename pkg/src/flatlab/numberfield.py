"""Exact arithmetic in real quadratic fields Q(sqrt d).

Every coordinate, length and predicate in the package is evaluated in one of
these fields, so signs are decided exactly and never by rounding.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

__all__ = ["QuadExt", "FieldMismatch", "is_squarefree", "parse_literal", "as_quad"]


class FieldMismatch(ValueError):
    """Two irrational values from different quadratic fields were combined."""


def is_squarefree(d: int) -> bool:
    if d < 1:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot read {value!r} as a rational number")


class QuadExt:
    """The number a + b*sqrt(d) with rational a, b and squarefree d >= 1.

    Values with b == 0 are plain rationals and combine with any field; two
    values with nonzero irrational parts must share d.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 1):
        a = _frac(a)
        b = _frac(b)
        if d == 1 or b == 0:
            a, b = a + b, Fraction(0)
        elif d < 1:
            raise ValueError(f"field parameter must be positive, got {d}")
        self.a = a
        self.b = b
        self.d = d if b else 1

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, d: int) -> "QuadExt":
        obj = object.__new__(cls)
        obj.a = a
        obj.b = b
        obj.d = d if b else 1
        return obj

    # -- coercion -----------------------------------------------------------

    def _common(self, other) -> tuple[Fraction, Fraction, Fraction, Fraction, int]:
        if not isinstance(other, QuadExt):
            other = QuadExt(other)
        if self.b and other.b and self.d != other.d:
            raise FieldMismatch(f"Q(sqrt {self.d}) and Q(sqrt {other.d}) cannot be mixed")
        d = self.d if self.b else other.d
        return self.a, self.b, other.a, other.b, d

    # -- field operations ---------------------------------------------------

    def __add__(self, other):
        try:
            a1, b1, a2, b2, d = self._common(other)
        except TypeError:
            return NotImplemented
        return QuadExt._raw(a1 + a2, b1 + b2, d)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            a1, b1, a2, b2, d = self._common(other)
        except TypeError:
            return NotImplemented
        return QuadExt._raw(a1 - a2, b1 - b2, d)

    def __rsub__(self, other):
        return QuadExt(other) - self

    def __mul__(self, other):
        try:
            a1, b1, a2, b2, d = self._common(other)
        except TypeError:
            return NotImplemented
        if not b1 and not b2:
            return QuadExt._raw(a1 * a2, Fraction(0), 1)
        return QuadExt._raw(a1 * a2 + d * b1 * b2, a1 * b2 + a2 * b1, d)

    __rmul__ = __mul__

    def __neg__(self):
        return QuadExt._raw(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def conjugate(self) -> "QuadExt":
        return QuadExt._raw(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        """a^2 - d*b^2, the product with the conjugate."""
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> "QuadExt":
        if not self:
            raise ZeroDivisionError("inverse of zero in a quadratic field")
        if not self.b:
            return QuadExt._raw(1 / self.a, Fraction(0), 1)
        n = self.norm()
        return QuadExt._raw(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if not isinstance(other, QuadExt):
            try:
                other = QuadExt(other)
            except TypeError:
                return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero in a quadratic field")
        if not other.b:
            if self.b and other.b == 0:
                return QuadExt._raw(self.a / other.a, self.b / other.a, self.d)
            return QuadExt._raw(self.a / other.a, Fraction(0), 1)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QuadExt(other) / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = QuadExt(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # -- order --------------------------------------------------------------

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: the larger of |a| and |b| sqrt d wins
        lhs = self.a * self.a
        rhs = self.d * self.b * self.b
        if lhs > rhs:
            return sa
        if lhs < rhs:
            return sb
        return 0

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            return self.a == other.a and self.b == other.b and (not self.b or self.d == other.d)
        if isinstance(other, (int, Fraction)):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- conversions --------------------------------------------------------

    def is_rational(self) -> bool:
        return not self.b

    def to_fraction(self) -> Fraction:
        if self.b:
            raise ValueError(f"{self} is irrational")
        return self.a

    def __float__(self):
        if not self.b:
            return float(self.a)
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def render(self) -> str:
        """Literal form ``num/den`` or ``num/den+num/den*r`` with r = sqrt d."""
        head = _render_fraction(self.a)
        if not self.b:
            return head
        tail = _render_fraction(abs(self.b))
        sep = "+" if self.b > 0 else "-"
        return f"{head}{sep}{tail}*r"

    def __str__(self):
        return self.render()

    def __repr__(self):
        if not self.b:
            return f"QuadExt({self.render()})"
        return f"QuadExt({self.render()}, d={self.d})"


def _render_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


_RAT = r"[0-9]+(?:/[0-9]+)?"
_LITERAL = re.compile(
    rf"^(?P<a>[+-]?{_RAT})?(?:(?P<sign>[+-])?(?:(?P<b>{_RAT})\*)?(?P<r>r))?$"
)


def parse_literal(text: str, d: int = 1) -> QuadExt:
    """Inverse of :meth:`QuadExt.render` for the field Q(sqrt d)."""
    text = text.strip()
    m = _LITERAL.match(text)
    if not text or m is None or (m.group("a") is None and m.group("r") is None):
        raise ValueError(f"malformed field literal {text!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    b = Fraction(0)
    if m.group("r"):
        if d == 1:
            raise ValueError(f"literal {text!r} uses r but the field is Q")
        if m.group("a") is not None and m.group("sign") is None:
            raise ValueError(f"malformed field literal {text!r}")
        b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
        if m.group("sign") == "-":
            b = -b
    return QuadExt(a, b, d)


def as_quad(value) -> QuadExt:
    if isinstance(value, QuadExt):
        return value
    return QuadExt(value)
