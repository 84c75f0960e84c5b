import math
from fractions import Fraction

import pytest

from flatlab import delaunay as dl
from flatlab import extremal as ex
from flatlab import flow
from flatlab import ray_geometry as rg
from flatlab.numberfield import QuadExt
from flatlab.surface import apply_linear, parse_surface

from conftest import surf

# the L-shape with its right column widened to 3/2: moduli 1/2 and 3/2
WIDE_L = """field d=1
polygon L 0 0 1 0 5/2 0 5/2 1 1 1 1 2 0 2 0 1
glue L.0 L.5 translation
glue L.1 L.3 translation
glue L.2 L.7 translation
glue L.4 L.6 translation
"""

R90 = ((0, -1), (1, 0))


def ray(name):
    return flow.make_ray(surf(name))


def test_square_torus_endpoint():
    e = rg.endpoint(ray("square_torus"))
    assert e.cylinders == 1
    assert list(e.circumferences) == [QuadExt(1)]
    [comp] = e.components()
    assert comp["genus"] == 0 and comp["boundaries"] == 2


def test_lshape_endpoint():
    e = rg.endpoint(ray("lshape"))
    assert e.cylinders == 2 and len(e.pairs()) == 2
    assert sorted(e.circumferences) == [QuadExt(1), QuadExt(2)]
    [comp] = e.components()
    assert comp["boundaries"] == 4


def test_endpoint_flow_rescales_circumferences():
    r = ray("lshape")
    base = rg.endpoint(r)
    later = rg.endpoint(r, 4)
    assert [c * 4 for c in later.circumferences] == list(base.circumferences)


def test_modular_equivalence():
    r = ray("lshape")
    assert rg.modular_equivalence(r, r).equivalent
    assert rg.modular_equivalence(r, r).lam == QuadExt(1)
    stretched = flow.make_ray(apply_linear(surf("lshape"), ((2, 0), (0, 1))))
    m = rg.modular_equivalence(stretched, r)
    assert m.equivalent and m.lam == QuadExt(2)
    wide = flow.make_ray(parse_surface(WIDE_L))
    assert not rg.modular_equivalence(r, wide).equivalent


def test_asymptotic_test():
    r = ray("lshape")
    assert rg.asymptotic_test(r, r) == rg.ASYMPTOTIC
    assert rg.asymptotic_test(r, flow.make_ray(parse_surface(WIDE_L))) == rg.NOT_ASYMPTOTIC
    # same moduli, different circumference ratio
    assert rg.asymptotic_test(r, ray("lshape_tall")) == rg.NOT_ASYMPTOTIC
    stretched = flow.make_ray(apply_linear(surf("lshape"), ((2, 0), (0, 1))))
    assert rg.asymptotic_test(r, stretched) == rg.ASYMPTOTIC


def test_phi_values():
    assert rg.phi(ray("square_torus")).moduli.render() == "1"
    p = rg.phi(ray("lshape"))
    assert p.moduli.render() == "1:2"
    assert p.render().startswith("code=") and " moduli=1:2" in p.render()


@pytest.mark.parametrize("name", ["square_torus", "lshape", "column3", "separating2", "octagon"])
def test_phi_flow_invariant(name):
    r = ray(name)
    assert rg.phi(r).render() == rg.phi(r, 3).render() == rg.phi(r, Fraction(7, 2)).render()


@pytest.mark.parametrize("name", ["square_torus", "lshape", "column3", "separating2", "octagon"])
def test_round_trip(name):
    r = ray(name)
    p = rg.phi(r)
    back = rg.phi_inverse(p.endpoint, p.moduli)
    assert rg.normalized_code(back) == rg.normalized_code(r)
    assert rg.phi(back).render() == p.render()


def test_scaled_moduli_give_flowed_surface():
    r = ray("lshape")
    e = rg.endpoint(r)
    a = rg.phi_inverse(e, [1, 2])
    b = rg.phi_inverse(e, [4, 8])
    assert rg.normalized_code(a) == rg.normalized_code(b)


def test_torus_reconstruction_is_square_torus():
    e = rg.endpoint(ray("square_torus"))
    back = rg.phi_inverse(e, [1])
    assert dl.isometry_equivalent(back.base, surf("square_torus"))


def test_phi_inverse_rejects_wrong_length():
    with pytest.raises(ValueError):
        rg.phi_inverse(rg.endpoint(ray("lshape")), [1])


def test_tits_trichotomy():
    assert rg.tits_angle(ray("lshape"), ray("lshape")).value == 0
    one = rg.tits_angle(ray("column3"), ray("separating2"))
    assert one.value == 1 and rg.tits_angle(ray("separating2"), ray("column3")).value == 1
    turned = flow.make_ray(apply_linear(surf("square_torus"), R90))
    assert rg.tits_angle(ray("square_torus"), turned).value == 2


def test_tits_needs_strebel():
    with pytest.raises(ValueError):
        rg.tits_angle(ray("slit_torus"), ray("slit_torus"))


def test_tits_oracle_used_outside_tables(monkeypatch):
    monkeypatch.setattr(rg, "disjointly_realizable", lambda a, b: (_ for _ in ()).throw(LookupError("none")))
    with pytest.raises(rg.Inconclusive):
        rg.tits_angle(ray("column3"), ray("separating2"))
    assert rg.tits_angle(ray("column3"), ray("separating2"), oracle=lambda a, b: True).value == 1


def torus_pair():
    r1 = ray("square_torus")
    r2 = flow.make_ray(apply_linear(surf("square_torus"), R90))
    return r1, r2, [ex.TorusSlope(0, 1), ex.TorusSlope(1, 0)]


def test_pre_tits_torus_exact():
    r1, r2, fam = torus_pair()
    rows = rg.pre_tits_estimate(r1, r2, [2, 4, 8, 16], fam)
    for row in rows:
        assert row.ratio == pytest.approx(2.0, abs=1e-12)
        assert row.bound == pytest.approx(2 * math.log(float(row.lam)), abs=1e-12)


def test_pre_tits_same_ray():
    r = ray("lshape")
    rows = rg.pre_tits_estimate(r, r, [2, 4, 8, 16], [ex.DirectionalCore(0), ex.DirectionalCore(1)])
    assert all(row.bound == 0.0 for row in rows)
