import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatlab import delaunay as dl
from flatlab import flow
from flatlab.numberfield import QuadExt
from flatlab.surface import apply_linear, parse_surface, render_surface
from flatlab.triangulation import TriangulationError, triangulate
from flatlab.vec import Vec2

from conftest import surf


def v(x, y) -> Vec2:
    return Vec2(QuadExt(Fraction(x)), QuadExt(Fraction(y)))


def circumcenter_oracle(a, b, c, d) -> str:
    """Compare |d - center| with the radius, all in floats."""
    (ax, ay), (bx, by), (cx, cy), (dx, dy) = [(float(p.x), float(p.y)) for p in (a, b, c, d)]
    den = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / den
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / den
    gap = math.hypot(dx - ux, dy - uy) - math.hypot(ax - ux, ay - uy)
    if abs(gap) < 1e-12:
        return dl.COCIRCULAR
    return dl.INSIDE if gap < 0 else dl.OUTSIDE


@pytest.mark.parametrize(
    "pts, expected",
    [
        ((v(0, 0), v(1, 0), v(1, 1), v(0, 1)), dl.COCIRCULAR),
        ((v(0, 0), v(1, 0), v(Fraction(1, 2), 3), v(Fraction(1, 2), Fraction(-1, 20))), dl.INSIDE),
        ((v(0, 0), v(1, 0), v(Fraction(1, 2), 1), v(Fraction(1, 2), -1)), dl.OUTSIDE),
    ],
)
def test_incircle_examples(pts, expected):
    assert dl.incircle_points(*pts) == expected
    assert circumcenter_oracle(*pts) == expected


coords = st.fractions(min_value=-5, max_value=5, max_denominator=8)


@settings(max_examples=200)
@given(coords, coords, coords, coords, coords, coords, coords, coords)
def test_incircle_matches_circumcenter_oracle(ax, ay, bx, by, cx, cy, dx, dy):
    a, b, c, d = v(ax, ay), v(bx, by), v(cx, cy), v(dx, dy)
    orient = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if orient <= 0:
        with pytest.raises(TriangulationError):
            dl.incircle_points(a, b, c, d)
        return
    got = dl.incircle_points(a, b, c, d)
    want = circumcenter_oracle(a, b, c, d)
    if want != dl.COCIRCULAR:
        assert got == want


def inside_edges(tri):
    return [(t, i) for t, i in tri.edges() if tri.glue[(t, i)][0] != t and dl.incircle(tri, t, i) == dl.INSIDE]


def test_rect_torus_keeps_short_sides():
    res = dl.delaunay_flip(surf("rect_torus"))
    lengths = sorted({e.norm2() for tv in res.triangulation.vecs for e in tv})
    assert QuadExt(Fraction(1, 4)) in lengths and QuadExt(4) in lengths
    assert max(lengths) <= QuadExt(4) + QuadExt(Fraction(1, 4))


def test_square_torus_cocircular_diagonal():
    res = dl.delaunay_flip(surf("square_torus"))
    assert res.flips == 0 and not inside_edges(res.triangulation)
    tri = res.triangulation
    assert any(dl.incircle(tri, t, i) == dl.COCIRCULAR for t, i in tri.edges())


def test_idempotent():
    once = dl.delaunay_flip(surf("lshape")).triangulation
    again = dl.delaunay_flip(once)
    assert again.flips == 0
    assert dl.triangulation_code(again.triangulation) == dl.triangulation_code(once)


@settings(max_examples=15, deadline=None)
@given(
    st.sampled_from(["lshape", "slit_torus", "octagon", "column3"]),
    st.integers(-2, 2),
    st.sampled_from([Fraction(1, 3), Fraction(1, 2), 1, 2, 3]),
)
def test_flip_terminates_delaunay_with_decreasing_potential(name, shear, lam):
    s = apply_linear(flow.ray_point(surf(name), lam), ((1, shear), (0, 1)))
    res = dl.delaunay_flip(s)
    assert not inside_edges(res.triangulation)
    assert all(a > b for a, b in zip(res.potentials, res.potentials[1:]))


def test_code_relabel_invariance():
    s = surf("octagon")
    text = render_surface(s)
    # relabel the chart and start its vertex list two corners later
    lines = text.splitlines()
    poly = [ln for ln in lines if ln.startswith("polygon")][0].split()
    verts = poly[2:]
    rotated = verts[4:] + verts[:4]
    body = [f"polygon P {' '.join(rotated)}"]
    for ln in lines:
        if ln.startswith("glue"):
            _, x, y, kind = ln.split()
            shift = lambda side: f"P.{(int(side.split('.')[1]) - 2) % 8}"  # noqa: E731
            body.append(f"glue {shift(x)} {shift(y)} {kind}")
    other = parse_surface("field d=2\n" + "\n".join(body) + "\n")
    assert dl.canonical_form(s) == dl.canonical_form(other)


def test_code_separates_square_and_rectangle():
    assert dl.canonical_form(surf("square_torus")) != dl.canonical_form(surf("rect_torus"))


@pytest.mark.parametrize("name", ["lshape", "octagon", "slit_torus", "separating2"])
def test_code_invariant_under_half_turn(name):
    s = surf(name)
    assert dl.isometry_equivalent(s, apply_linear(s, ((-1, 0), (0, -1))))


def test_code_is_single_token():
    text = dl.canonical_form(surf("lshape")).text
    assert text and not any(ch.isspace() for ch in text)


def test_square_torus_ray_vertical_edge():
    rows = dl.verify_delaunay_along_ray(flow.make_ray(surf("square_torus")), [1, 2, 4, 8])
    assert all(r.ok and r.critical_edges >= 1 for r in rows)


def test_mixed_ray_radius_ratio_decreases():
    rows = dl.verify_delaunay_along_ray(flow.make_ray(surf("slit_torus")), [2, 4, 8, 16])
    ratios = [r.radius_over_lambda for r in rows]
    assert all(a >= b - 1e-12 for a, b in zip(ratios, ratios[1:]))


def test_rejects_surface_without_marked_vertex():
    with pytest.raises(TriangulationError):
        triangulate(surf("square_torus_plain"))
