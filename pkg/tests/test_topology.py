from collections import Counter

import pytest

from flatlab import topology as tp
from flatlab.trajectories import TopologicalType


def level_counts(g, n):
    return dict(sorted(Counter(len(t.curves) for t in tp.multicurve_types(g, n)).items()))


@pytest.mark.parametrize(
    "g, n, counts",
    [
        # boundary strata of the compactified moduli spaces, by codimension
        (1, 1, {1: 1}),
        (1, 2, {1: 2, 2: 2}),
        (2, 0, {1: 2, 2: 2, 3: 2}),
    ],
)
def test_stratum_counts(g, n, counts):
    assert level_counts(g, n) == counts


def test_pants_decomposition_counts():
    # genus 2: the theta graph and the dumbbell
    assert len(tp.pants_decompositions(2, 0)) == 2
    assert len(tp.pants_decompositions(1, 1)) == 1
    assert len(tp.pants_decompositions(2, 1)) == 3


def test_pants_counts_match_euler_characteristic():
    for g, n in [(1, 1), (1, 2), (2, 0), (2, 1)]:
        for pg in tp.pants_decompositions(g, n):
            assert len(pg.punct) == 2 * g - 2 + n
            assert len(pg.curves()) == 3 * g - 3 + n
            full = pg.subtype(tuple(range(len(pg.curves()))))
            assert all(c == (0, 3 - m, m) for c in full.components for m in [c[2]])


def test_genus_two_poset():
    p = tp.dm_poset(2, 0)
    assert len(p.types) == 6
    sep = next(i for i, t in enumerate(p.types) if len(t.components) == 2 and p.level(i) == 1)
    nonsep = next(i for i, t in enumerate(p.types) if len(t.components) == 1 and p.level(i) == 1)
    above_sep = {j for i, j in p.covers if i == sep}
    above_nonsep = {j for i, j in p.covers if i == nonsep}
    # the only codimension-two type below both one-curve types carries one curve of each kind
    assert len(above_sep) == 1 and len(above_nonsep) == 2
    assert above_sep <= above_nonsep
    for i, j in p.covers:
        assert p.level(j) == p.level(i) + 1


def test_render_lines():
    lines = tp.dm_poset(1, 1).render()
    assert lines[0] == "dmposet genus=1 punctures=1 types=1"
    assert lines[1].startswith("type id=0 level=1")


def test_disjoint_realisation_genus_two():
    types = {len(t.components): t for t in tp.multicurve_types(2, 0) if len(t.curves) == 1}
    sep, nonsep = types[2], types[1]
    assert tp.disjointly_realizable(sep, nonsep)
    assert tp.disjointly_realizable(nonsep, nonsep)


def test_torus_single_type():
    [t] = tp.multicurve_types(1, 0)
    assert t.genus == 1 and tp.disjointly_realizable(t, t)


def test_outside_table_raises():
    with pytest.raises(LookupError):
        tp.multicurve_types(3, 0)
    with pytest.raises(LookupError):
        tp.dm_poset(1, 3)


def test_mismatched_surfaces():
    a = tp.multicurve_types(2, 0)[0]
    b = tp.multicurve_types(1, 1)[0]
    with pytest.raises(ValueError):
        tp.disjointly_realizable(a, b)


def test_type_key_ignores_component_order():
    a = TopologicalType(((1, 1, 0), (0, 3, 0)), ((0, 1), (1, 1)))
    b = TopologicalType(((0, 3, 0), (1, 1, 0)), ((1, 0), (0, 0)))
    assert a.isomorphic(b)
