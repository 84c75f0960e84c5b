import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatlab import extremal as ex
from flatlab import flow
from flatlab.numberfield import QuadExt
from flatlab.surface import apply_linear

from conftest import surf


def q(x) -> QuadExt:
    return QuadExt(Fraction(x))


@pytest.mark.parametrize("slope, value", [((0, 1), 1), ((1, 0), 1), ((1, 1), 2)])
def test_square_torus_slopes(slope, value):
    assert ex.ext_torus_exact(surf("square_torus"), ex.TorusSlope(*slope)) == q(value)


def test_rectangle_torus_slope():
    s = flow.ray_point(surf("square_torus"), 2)
    assert ex.ext_torus_exact(s, ex.TorusSlope(0, 1)) == q(Fraction(1, 4))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(-3, 3), st.integers(1, 3), st.integers(-3, 3),
    st.integers(-4, 4), st.integers(-4, 4),
)
def test_torus_formula_matches_lattice_oracle(shear, stretch, shear2, p, r):
    if math.gcd(p, r) != 1:
        return
    m = ((stretch, shear), (shear2, Fraction(1 + shear * shear2, stretch)))  # det 1
    s = apply_linear(surf("square_torus"), m)
    # image of the lattice vector (p, r) under m, squared, over the unit area
    x = m[0][0] * p + m[0][1] * r
    y = m[1][0] * p + m[1][1] * r
    assert ex.ext_torus_exact(s, ex.TorusSlope(p, r)) == q(x * x + y * y)


def test_cylinder_upper_bounds():
    a = flow.make_ray(surf("lshape")).analysis
    ups = sorted(ex.ext_upper_cylinder(ex.DirectionalCore(i), a) for i in range(2))
    assert ups == [q(1), q(2)]
    ray = flow.make_ray(surf("lshape"))
    for lam in (2, 3):
        at = flow.analysis_at(ray, lam)
        for i, c in enumerate(at.cylinders):
            assert ex.ext_upper_cylinder(ex.DirectionalCore(i), at) == 1 / c.modulus


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["lshape", "column3", "separating2", "slit_torus"]),
    st.sampled_from(["core:0", "hcore:0", "hcore:1", "loop:0+"]),
    st.sampled_from([Fraction(1, 2), 1, 2, 3]),
)
def test_lower_never_exceeds_upper(name, curve, lam):
    s = flow.ray_point(surf(name), lam)
    try:
        b = ex.ext_bounds(ex.parse_curve(curve), s)
    except (ValueError, IndexError, LookupError):
        return
    assert b.lower.sign() >= 0
    if b.upper is not None:
        assert b.lower <= b.upper


def test_annulus_contribution():
    assert ex.ext_annulus_contribution(1, 0, 4) == q(4)
    assert ex.ext_annulus_contribution(2, 3, 1) == q(40)
    assert ex.ext_annulus_contribution(0, 5, 2) == q(0)


def test_combined_estimate():
    core = ex.ext_combined([(0, None, 8), (1, 0, 2)])
    assert core.value == q(2) and core.dominant == "cylinder 1"
    assert ex.ext_combined([(1, 0, 5)]).value == q(5)
    assert ex.ext_combined([(0, None, 1)], thick_intersections=[3]).value == q(9)


def test_kerckhoff_torus_flow():
    s = surf("square_torus")
    fam = [ex.TorusSlope(0, 1), ex.TorusSlope(1, 0)]
    kb = ex.kerckhoff_lower_bound(s, flow.ray_point(s, 2), fam)
    assert kb.ratio == q(4)
    assert kb.value == pytest.approx(math.log(2), abs=1e-15)


def test_kerckhoff_same_surface_is_zero():
    s = surf("lshape")
    fam = [ex.DirectionalCore(0), ex.DirectionalCore(1)]
    assert ex.kerckhoff_lower_bound(s, s, fam).value == 0.0


def test_kerckhoff_flowed_ray_approaches_log_lambda():
    ray = flow.make_ray(surf("lshape"))
    fam = [ex.DirectionalCore(0), ex.DirectionalCore(1)]
    gaps = []
    for lam in (2, 8, 32):
        kb = ex.kerckhoff_lower_bound(ray.base, flow.ray_point(ray, lam), fam)
        assert kb.value <= math.log(lam) + 1e-12
        gaps.append(math.log(lam) - kb.value)
    assert max(gaps) - min(gaps) < 1e-12


@pytest.mark.parametrize("text", ["core:x", "loop:3", "banana"])
def test_parse_curve_errors(text):
    with pytest.raises(ValueError):
        ex.parse_curve(text)


def test_parse_curve_forms():
    assert ex.parse_curve("2/3") == ex.TorusSlope(2, 3)
    assert ex.parse_curve("core:1") == ex.DirectionalCore(1)
    assert ex.parse_curve("loop:3+,5-") == ex.GraphLoop(((3, True), (5, False)))
