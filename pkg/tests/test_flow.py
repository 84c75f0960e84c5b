from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatlab import flow
from flatlab.numberfield import QuadExt
from flatlab.surface import apply_linear, render_surface
from flatlab.trajectories import vertical_decomposition

from conftest import surf

lams = st.fractions(min_value=Fraction(1, 4), max_value=8, max_denominator=6).filter(lambda x: x > 0)


def test_identity_time():
    s = surf("square_torus")
    assert render_surface(flow.ray_point(s, 1)) == render_surface(s)


def test_square_torus_at_two():
    s = flow.ray_point(surf("square_torus"), 2)
    assert render_surface(s) == render_surface(apply_linear(surf("square_torus"), ((2, 0), (0, Fraction(1, 2)))))


@settings(max_examples=20, deadline=None)
@given(lams, lams)
def test_flow_composition(l1, l2):
    s = surf("lshape")
    twice = flow.ray_point(flow.ray_point(s, l1), l2)
    assert render_surface(twice) == render_surface(flow.ray_point(s, l1 * l2))


@settings(max_examples=15, deadline=None)
@given(lams)
def test_moduli_law(lam):
    ray = flow.make_ray(surf("lshape"))
    base = ray.analysis.moduli
    got = flow.cylinder_moduli_at(ray, lam)
    assert got == [QuadExt(lam) * QuadExt(lam) * m for m in base]


def test_moduli_recomputed_on_flowed_surface():
    ray = flow.make_ray(surf("lshape"))
    fresh = vertical_decomposition(flow.ray_point(ray, 3), QuadExt(100))
    assert sorted(flow.cylinder_moduli_at(ray, 3)) == sorted(fresh.moduli)
    assert sorted(fresh.moduli) == [QuadExt(9, 0) / 2, QuadExt(9)]
    assert flow.cylinder_moduli_at(flow.make_ray(surf("square_torus")), 2) == [QuadExt(4)]


@pytest.mark.parametrize(
    "name, kind",
    [
        ("square_torus", flow.EDM),
        ("lshape", flow.EDM),
        ("column3", flow.EDM),
        ("separating2", flow.EDM),
        ("octagon", flow.EDM),
        ("slit_torus", flow.ADM_NOT_EDM),
        ("golden_torus", flow.UNKNOWN),
    ],
)
def test_classify(name, kind):
    assert flow.classify(surf(name)).kind == kind


def test_unknown_reports_bound():
    c = flow.classify(surf("golden_torus"), 100)
    assert c.render() == "Unknown(100) cylinders=0"


def test_classify_survives_regluing_shear():
    # a horizontal shear by a period of the cylinder reglues it without changing the decomposition
    s = apply_linear(surf("square_torus"), ((1, 0), (1, 1)))
    assert flow.classify(s).kind == flow.EDM


def test_witness_deficiency_is_constant_and_nonpositive():
    ray = flow.make_ray(surf("lshape"))
    rows = flow.adm_deficiency_witness(ray, [2, 4, 8, 16])
    defs = [r.deficiency for r in rows]
    assert all(d <= 1e-12 for d in defs)
    assert max(defs) - min(defs) < 1e-12


@pytest.mark.parametrize("stretch", [1, 4])
def test_witness_tight_on_tori(stretch):
    # a torus core has Ext = 1/M exactly, so the bound is log lambda with no deficiency
    s = apply_linear(surf("square_torus"), ((stretch, 0), (0, 1)))
    for row in flow.adm_deficiency_witness(flow.make_ray(s), [2, 8]):
        assert row.deficiency == pytest.approx(0.0, abs=1e-15)


def test_bad_lambda():
    with pytest.raises(ValueError):
        flow.parse_lambda("-1")
    with pytest.raises(ValueError):
        flow.flow_matrix(0)
