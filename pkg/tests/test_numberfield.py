import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatlab.numberfield import FieldMismatch, QuadExt, as_quad, is_squarefree, parse_literal

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=20)
fields = st.sampled_from([2, 3, 5, 7])


@st.composite
def elements(draw, d=None):
    d = draw(fields) if d is None else d
    return QuadExt(draw(rationals), draw(rationals), d)


def as_float(x: QuadExt) -> float:
    return float(x.a) + float(x.b) * math.sqrt(x.d)


def test_conjugate_product():
    x = QuadExt(1, 1, 2)
    assert x * x.conjugate() == QuadExt(-1)


def test_additive_identity_and_self_division():
    assert QuadExt(0, 0, 2) + QuadExt(Fraction(3, 2), 0, 2) == QuadExt(Fraction(3, 2))
    x = QuadExt(1, 2, 5)
    assert x / x == QuadExt(1)


@pytest.mark.parametrize(
    "x, sign",
    [(QuadExt(1, -1, 2), -1), (QuadExt(0, 0, 3), 0), (QuadExt(3, -2, 2), 1), (QuadExt(-3, 2, 2), -1)],
)
def test_sign(x, sign):
    assert x.sign() == sign


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        QuadExt(0, 1, 2) + QuadExt(0, 1, 3)
    # rationals mix with anything
    assert (QuadExt(0, 1, 2) + QuadExt(1, 0, 3)).d == 2


def test_zero_division():
    with pytest.raises(ZeroDivisionError):
        QuadExt(1, 1, 2) / QuadExt(0)


def test_parse_render_roundtrip():
    for text in ["3/2", "-1", "1+2*r", "1/2-3/4*r", "0"]:
        assert parse_literal(parse_literal(text, 5).render(), 5) == parse_literal(text, 5)
    assert parse_literal("2+2*r", 2) == QuadExt(2, 2, 2)


def test_squarefree():
    assert [d for d in range(1, 13) if is_squarefree(d)] == [1, 2, 3, 5, 6, 7, 10, 11]


@given(fields.flatmap(lambda d: st.tuples(elements(d), elements(d), elements(d))))
def test_ring_axioms(xyz):
    x, y, z = xyz
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == QuadExt(0)


@given(elements())
def test_inverse(x):
    if x:
        assert x * x.inverse() == QuadExt(1)


@given(elements())
def test_sign_matches_float(x):
    # floats decide the sign unless the value sits too close to zero
    f = as_float(x)
    if abs(f) > 1e-9:
        assert x.sign() == (1 if f > 0 else -1)


@given(elements(), elements())
def test_order_is_total_and_compatible(x, y):
    if x.d == y.d or not x.b or not y.b:
        assert (x < y) + (x == y) + (x > y) == 1
        assert (x < y) == ((y - x).sign() > 0)


def test_as_quad():
    assert as_quad(3) == QuadExt(3)
    assert as_quad(Fraction(1, 3)) == QuadExt(Fraction(1, 3))
