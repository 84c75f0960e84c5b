"""The twelve acceptance criteria, each under its runtime budget.

A summary with one PASS/FAIL line per criterion is printed at the end of the
pytest run (see the terminal-summary hook in conftest.py).
"""

import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from flatlab import delaunay as dl
from flatlab import extremal as ex
from flatlab import flow, qc
from flatlab import ray_geometry as rg
from flatlab import rayspace as rs
from flatlab.numberfield import QuadExt
from flatlab.surface import apply_linear
from flatlab.triangulation import TriangulationError, triangulate

from conftest import FIXTURES, surf
from tree_points import diagonal_pair_from, random_pair

pytestmark = pytest.mark.acceptance


@contextmanager
def budget(seconds: float):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.2f} s, budget {seconds} s"


def q(x) -> QuadExt:
    return QuadExt(Fraction(x))


def test_criterion_01_one_cylinder_modulus_law():
    with budget(1):
        ray = flow.make_ray(surf("square_torus"))
        for lam in (2, 3, 4, 8):
            expected = 1 / q(lam * lam)
            assert ex.ext_upper_cylinder(ex.DirectionalCore(0), flow.analysis_at(ray, lam)) == expected
            assert ex.ext_torus_exact(flow.ray_point(ray, lam), ex.TorusSlope(0, 1)) == expected


def test_criterion_02_multi_cylinder_asymptotics():
    with budget(5):
        ray = flow.make_ray(surf("lshape"))
        base = ray.analysis.moduli
        assert sorted(base) == [q(Fraction(1, 2)), q(1)]
        for lam in (2, 4, 8, 16, 32):
            at = flow.analysis_at(ray, lam)
            for i, m in enumerate(base):
                b = ex.bounds_from_analysis(ex.DirectionalCore(i), at)
                assert q(lam * lam) * m * b.upper == q(1)
                if lam >= 8:
                    assert float(q(lam * lam) * m * b.lower) >= 0.9


def test_criterion_03_crossing_curve_growth():
    with budget(10):
        ray = flow.make_ray(surf("lshape"))
        curve = ex.parse_curve("hcore:0")
        ratios = [float(ex.ext_bounds(curve, flow.ray_point(ray, lam)).lower) / lam**2 for lam in (2, 4, 8, 16)]
        assert min(ratios) > 0
        assert all(a >= b for a, b in zip(ratios, ratios[1:]))
        assert (max(ratios) - min(ratios)) / max(ratios) < 0.05


def test_criterion_04_torus_kerckhoff_exact():
    with budget(1):
        s = surf("square_torus")
        fam = [ex.TorusSlope(0, 1), ex.TorusSlope(1, 0)]
        for lam in (2, 3, Fraction(5, 2)):
            kb = ex.kerckhoff_lower_bound(s, flow.ray_point(s, lam), fam)
            assert kb.ratio == q(lam) * q(lam)
            assert kb.value == pytest.approx(math.log(lam), rel=1e-15, abs=0)


def small_fixtures():
    out = []
    for path in sorted(FIXTURES.glob("*.surf")):
        try:
            tri = triangulate(surf(path.stem))
        except TriangulationError:
            continue  # regular vertices without a mark cannot be triangulated
        if len(tri) <= 6:
            out.append((path.stem, tri))
    return out


def test_criterion_05_delaunay_matches_exhaustive_search():
    with budget(30):
        fixtures = small_fixtures()
        assert len(fixtures) >= 6
        for name, tri in fixtures:
            res = dl.delaunay_flip(tri)
            out = res.triangulation
            assert not [e for e in out.edges() if out.glue[e][0] != e[0] and dl.incircle(out, *e) == dl.INSIDE], name
            assert all(a > b for a, b in zip(res.potentials, res.potentials[1:])), name
            reach = 4 * max(max(v.norm2() for tv in t.vecs for v in tv) for t in (tri, out))
            _, states = dl.exhaustive_delaunay_states(tri, reach)
            assert states, name
            codes = {dl._code(t, merge=True) for t in states}
            assert codes == {dl._code(out, merge=True)}, name


def test_criterion_06_critical_graph_is_delaunay():
    with budget(30):
        for name in ("lshape", "column3", "separating2"):
            rows = dl.verify_delaunay_along_ray(flow.make_ray(surf(name)), [2, 3, 4, 8, 16])
            for row in rows:
                assert row.critical_edges > 0 and row.ok, (name, row.lam, row.missing)


def test_criterion_07_qc_bounds():
    with budget(30):
        rep = qc.close_map_dilatation(100, 400, 0, 0)
        assert abs(rep.max_dilatation - 4.0) <= 0.01 * 4.0
        assert math.exp(2 * rep.d0) == pytest.approx(4.0, rel=1e-12)
        ks, eps, rad, bound = qc.triangle_sweep(1000, np.random.default_rng(20240601))
        assert np.all(ks <= bound)


def angle_one_pair():
    x = flow.make_ray(apply_linear(surf("column3"), ((12, 0), (0, 1))))
    y = flow.make_ray(surf("separating2"))
    loop = next(
        k
        for k, c in enumerate(y.analysis.critical_graph.connections)
        if c.start == c.end and abs(c.holonomy.y) == q(1)
    )
    return x, y, [(ex.DirectionalCore(0), ex.GraphLoop(((loop, True),)))]


def test_criterion_08_tits_trichotomy():
    with budget(60):
        same = flow.make_ray(surf("lshape"))
        x, y, fam1 = angle_one_pair()
        torus = flow.make_ray(surf("square_torus"))
        turned = flow.make_ray(apply_linear(surf("square_torus"), ((0, -1), (1, 0))))
        cases = [
            (same, same, [ex.DirectionalCore(0), ex.DirectionalCore(1)], 0),
            (x, y, fam1, 1),
            (torus, turned, [ex.TorusSlope(0, 1), ex.TorusSlope(1, 0)], 2),
        ]
        for r1, r2, fam, angle in cases:
            assert rg.tits_angle(r1, r2).value == angle
            rows = rg.pre_tits_estimate(r1, r2, [2, 4, 8, 16], fam)
            assert all(row.ratio <= 2.01 for row in rows)
            assert abs(rows[-1].ratio - angle) <= 0.15


def test_criterion_09_phi_round_trip():
    with budget(10):
        for name in ("lshape", "column3", "separating2"):
            ray = flow.make_ray(surf(name))
            point = rg.phi(ray)
            assert rg.phi(ray, 3).render() == point.render() == rg.phi(ray, Fraction(5, 2)).render()
            back = rg.phi_inverse(point.endpoint, point.moduli)
            assert rg.normalized_code(back) == rg.normalized_code(ray)


def test_criterion_10_quadrant_compactification():
    with budget(1):
        space = rs.ProductSpace((rs.HalfLine(), rs.HalfLine()))
        built = rs.build_iterated(space, 3)
        assert [s.kind for s in built.strata if s.level == 1] == ["HalfLine", "HalfLine"]
        assert built.raw_counts[2] == 2 and built.counts()[2] == 1
        cx = rs.boundary_complex(space)
        assert cx.is_circle() and cx.render()[-1].endswith("shape=square")


def test_criterion_11_tree_product_geodesics():
    with budget(10):
        space = rs.parse_product((FIXTURES / "tripods.prod").read_text())
        rng = random.Random(11)
        pairs = [diagonal_pair_from(space, rng) for _ in range(30)]
        while len(pairs) < 100:
            p, q_ = random_pair(space, rng)
            if p != q_:
                pairs.append((p, q_))
        diagonal = unique = 0
        for p, q_ in pairs:
            w = rs.geodesic_multiplicity_witness(space, p, q_)
            if rs.diagonal_pair(space, p, q_):
                diagonal += 1
                assert isinstance(w, rs.Unique)
                assert w.geodesic.length(space) == space.distance(p, q_)
                unique += 1
            else:
                assert isinstance(w, rs.MultipleWitness)
                assert rs.witness_is_valid(space, p, q_, w)
                assert w.first.length(space) == w.second.length(space) == space.distance(p, q_)
        assert diagonal >= 30 and unique == diagonal


def test_criterion_12_classification():
    with budget(10):
        for name in ("square_torus", "rect_torus", "lshape", "lshape_tall", "column3", "separating2", "octagon"):
            assert flow.classify(surf(name)).kind == flow.EDM, name
        assert flow.classify(surf("slit_torus")).kind == flow.ADM_NOT_EDM
        unknown = flow.classify(surf("golden_torus"), 100)
        assert unknown.kind == flow.UNKNOWN and unknown.bound == q(100) and unknown.cylinders == 0
