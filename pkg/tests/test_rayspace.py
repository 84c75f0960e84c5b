import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatlab import rayspace as rs

from conftest import FIXTURES
from tree_points import diagonal_pair_from, random_pair

QUADRANT = rs.ProductSpace((rs.HalfLine(), rs.HalfLine()))


def tripods():
    return rs.parse_product((FIXTURES / "tripods.prod").read_text(), "tripods.prod")


def test_asymptote_classes():
    assert len(rs.asy(rs.HalfLine())[0]) == 1
    assert rs.asy(rs.Interval(Fraction(5)))[0] == []
    tree = tripods().factors[0]
    classes, dist = rs.asy(tree)
    assert len(classes) == 2
    a, b = classes
    assert dist[(a.end, b.end)] == rs.INF and dist[(a.end, a.end)] == 0


def test_quadrant_strata():
    built = rs.build_iterated(QUADRANT, 3)
    assert built.counts() == {0: 1, 1: 2, 2: 1}
    assert built.raw_counts[2] == 2
    kinds = [s.kind for s in built.strata if s.level == 1]
    assert kinds == ["HalfLine", "HalfLine"]


def test_quadrant_boundary_is_square():
    cx = rs.boundary_complex(QUADRANT)
    assert cx.is_circle() and len(cx.edges) == 4 and len(cx.vertices) == 4
    assert cx.render()[-1] == "boundary cells=8 circle=true shape=square"


def test_halfline_single_point():
    built = rs.build_iterated(rs.ProductSpace((rs.HalfLine(),)), 3)
    assert built.counts() == {0: 1, 1: 1}
    assert built.strata[1].kind == "point"


def test_halfline_times_interval():
    built = rs.build_iterated(rs.ProductSpace((rs.HalfLine(), rs.Interval(Fraction(1)))), 3)
    assert built.counts() == {0: 1, 1: 1}
    assert built.strata[1].kind.startswith("Interval")


def test_closure_is_strict_subset_relation():
    built = rs.build_iterated(QUADRANT, 2)
    for i, j in built.closure:
        assert built.strata[i].ends < built.strata[j].ends


def test_convergence_into_corner():
    built = rs.build_iterated(QUADRANT, 2)
    corner = next(s for s in built.strata if s.level == 2)
    ok, rows = rs.convergence_certificate(QUADRANT, lambda n: (Fraction(n), Fraction(2 * n)), corner)
    assert ok and rows[-1][1] > rows[0][1]


def test_diagonal_pair_examples():
    z = Fraction(0)
    assert rs.diagonal_pair(QUADRANT, (z, z), (Fraction(3), Fraction(3)))
    assert not rs.diagonal_pair(QUADRANT, (z, z), (Fraction(3), Fraction(1)))


def test_quadrant_geodesics():
    z = Fraction(0)
    assert isinstance(rs.geodesic_multiplicity_witness(QUADRANT, (z, z), (Fraction(3), Fraction(3))), rs.Unique)
    w = rs.geodesic_multiplicity_witness(QUADRANT, (z, z), (Fraction(3), Fraction(1)))
    assert isinstance(w, rs.MultipleWitness)
    assert rs.witness_is_valid(QUADRANT, (z, z), (Fraction(3), Fraction(1)), w)
    assert w.first.length(QUADRANT) == w.second.length(QUADRANT) == 3


def test_stationary_factor_excursion():
    z = Fraction(0)
    p, q = (z, Fraction(2)), (Fraction(4), Fraction(2))
    w = rs.geodesic_multiplicity_witness(QUADRANT, p, q)
    assert isinstance(w, rs.MultipleWitness) and rs.witness_is_valid(QUADRANT, p, q, w)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_tree_witnesses(seed):
    rng = random.Random(seed)
    space = tripods()
    p, q = diagonal_pair_from(space, rng) if seed % 2 else random_pair(space, rng)
    if p == q:
        return
    w = rs.geodesic_multiplicity_witness(space, p, q)
    if rs.diagonal_pair(space, p, q):
        assert isinstance(w, rs.Unique)
        assert w.geodesic.length(space) == space.distance(p, q)
    else:
        assert isinstance(w, rs.MultipleWitness)
        assert rs.witness_is_valid(space, p, q, w)


def test_tree_distance_triangle_inequality():
    rng = random.Random(3)
    tree = tripods().factors[0]
    from tree_points import random_point

    for _ in range(200):
        a, b, c = (random_point(tree, rng) for _ in range(3))
        assert tree.distance(a, c) <= tree.distance(a, b) + tree.distance(b, c)
        assert tree.distance(a, b) == tree.distance(b, a)


def test_cone_diagonal_opposite_points():
    cone = rs.Cone(Fraction(3, 2), Fraction(5))
    space = rs.ProductSpace((cone, cone))
    p = ((Fraction(1), Fraction(0)), (Fraction(1), Fraction(0)))
    q = ((Fraction(1), Fraction(3, 4)), (Fraction(1), Fraction(3, 4)))
    w = rs.geodesic_multiplicity_witness(space, p, q)
    assert isinstance(w, rs.FiniteMultiple) and w.count == 4


def test_singular_scan():
    space = rs.ProductSpace((tripods().factors[0], rs.Interval(Fraction(2))))
    rows = rs.singular_locus_scan(space, [(("v", "c"), Fraction(1)), (("e", 0, Fraction(1, 2)), Fraction(1))])
    assert rows[0].designated and not rows[1].designated
    # a tree branch point is uniquely geodesic, so the metric criterion does not see it
    assert not rows[0].metric
    seg = rs.ProductSpace((rs.Interval(Fraction(1)), rs.Interval(Fraction(2))))
    assert not any(r.designated for r in rs.singular_locus_scan(seg, [(Fraction(1, 2), Fraction(1))]))


def test_cone_apex_scan_agrees():
    cone = rs.Cone(Fraction(1), Fraction(3))
    space = rs.ProductSpace((cone, rs.Interval(Fraction(1))))
    [row] = rs.singular_locus_scan(space, [((Fraction(0), Fraction(0)), Fraction(1, 2))])
    assert row.designated and row.metric and row.agrees


def test_parse_product_errors():
    with pytest.raises(ValueError, match="bad.prod:2"):
        rs.parse_product("factor halfline\nfactor banana\n", "bad.prod")


def test_dm_stratified_genus_two():
    built = rs.dm_stratified(2, 0)
    assert len(built.strata) == 6


def test_signature_is_relabel_invariant():
    a = rs.build_iterated(QUADRANT, 2)
    b = rs.build_iterated(rs.ProductSpace((rs.HalfLine(), rs.HalfLine())), 2)
    assert a.signature() == b.signature()
