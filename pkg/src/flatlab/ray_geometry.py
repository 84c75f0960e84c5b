"""Endpoints of Strebel rays, modular equivalence, the simplex-bundle map and Tits angles.

An endpoint keeps the critical graph of the vertical foliation together with
the boundary words of every cylinder side; the cylinder interiors are gone.
Its metric ribbon graph, normalised to total length 1, is what the code of
:func:`phi` reads.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .delaunay import canonical_form
from .extremal import DirectionalCore, GraphLoop, TorusSlope, bounds_from_analysis, ext_torus_exact, ExtBound
from .flow import TeichRay, analysis_at, make_ray, ray_point
from .numberfield import QuadExt, as_quad
from .surface import FlatSurface, Gluing, PolygonChart, apply_linear
from .topology import disjointly_realizable
from .trajectories import STREBEL, DirectionAnalysis, TopologicalType, multicurve_type
from .vec import Vec2

__all__ = [
    "EndpointSurface",
    "CircleWord",
    "ModuliVector",
    "PhiPoint",
    "ModularMatch",
    "TitsAngle",
    "Inconclusive",
    "ASYMPTOTIC",
    "NOT_ASYMPTOTIC",
    "INCONCLUSIVE",
    "endpoint",
    "modular_equivalence",
    "asymptotic_test",
    "phi",
    "phi_inverse",
    "normalized_code",
    "tits_angle",
    "pre_tits_estimate",
    "PreTitsRow",
    "linear_relation",
]

ASYMPTOTIC = "Asymptotic"
NOT_ASYMPTOTIC = "NotAsymptotic"
INCONCLUSIVE = "Inconclusive"


class Inconclusive(Exception):
    """The Tits angle needs a disjointness decision that no table or oracle provides."""


def _ray(obj, bound=None) -> TeichRay:
    if isinstance(obj, TeichRay):
        return obj
    if isinstance(obj, FlatSurface):
        return make_ray(obj, bound)
    raise TypeError(f"expected a ray or a surface, got {type(obj).__name__}")


def _require_strebel(ray: TeichRay) -> None:
    if ray.status != STREBEL:
        raise ValueError(f"ray direction is not Strebel ({ray.analysis.status_text()})")


# -- endpoint ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircleWord:
    """One side of a cut cylinder: its saddle connections bottom to top.

    ``offsets`` are the heights of the lower ends along the core, measured
    from the cylinder's reference height, in [0, circumference).
    """

    cylinder: int
    side: str  # "L" or "R"
    steps: tuple[tuple[int, bool], ...]
    offsets: tuple[QuadExt, ...]
    lower_vertices: tuple[int, ...]
    component: int


@dataclass(frozen=True)
class EndpointSurface:
    d: int
    connection_lengths: tuple[QuadExt, ...]
    connection_ends: tuple[tuple[int, int], ...]
    vertex_angles: tuple[int, ...]
    vertex_marked: tuple[bool, ...]
    circumferences: tuple[QuadExt, ...]
    collars: tuple[QuadExt, ...]  # height kept on each side of the mid-height cut
    circles: tuple[CircleWord, ...]  # 2i is the left side of cylinder i, 2i+1 the right
    topology: TopologicalType

    @property
    def cylinders(self) -> int:
        return len(self.circumferences)

    def pairs(self) -> list[tuple[int, int]]:
        return [(2 * i, 2 * i + 1) for i in range(self.cylinders)]

    def components(self) -> list[dict]:
        out = []
        for k, (g, b, n) in enumerate(self.topology.components):
            circles = [c for c in range(len(self.circles)) if self.circles[c].component == k]
            out.append({"genus": g, "boundaries": b, "punctures": n, "circles": circles})
        return out

    def scaled(self, c) -> "EndpointSurface":
        c = as_quad(c)
        circles = tuple(
            CircleWord(w.cylinder, w.side, w.steps, tuple(h * c for h in w.offsets), w.lower_vertices, w.component)
            for w in self.circles
        )
        return EndpointSurface(
            self.d,
            tuple(x * c for x in self.connection_lengths),
            self.connection_ends,
            self.vertex_angles,
            self.vertex_marked,
            tuple(x * c for x in self.circumferences),
            tuple(x * c for x in self.collars),
            circles,
            self.topology,
        )

    def render(self) -> list[str]:
        lines = [f"endpoint components={len(self.topology.components)} pairs={self.cylinders}"]
        for comp_id, comp in enumerate(self.components()):
            lines.append(
                f"component {comp_id} genus={comp['genus']} boundaries={comp['boundaries']} punctures={comp['punctures']}"
            )
        for i, a in enumerate(self.circumferences):
            left, right = self.circles[2 * i], self.circles[2 * i + 1]
            lines.append(
                f"pair {i} a={a} collar={self.collars[i]} left={_word(left)} right={_word(right)}"
            )
        return lines


def _word(w: CircleWord) -> str:
    return ",".join(f"{k}{'+' if fwd else '-'}" for k, fwd in w.steps)


def _endpoint_from_analysis(analysis: DirectionAnalysis, d: int) -> EndpointSurface:
    if analysis.status != STREBEL:
        raise ValueError(f"endpoint needs a Strebel direction, got {analysis.status_text()}")
    tri = analysis.triangulation
    conns = analysis.critical_graph.connections
    circles = []
    for cyl in analysis.cylinders:
        ref = cyl.left[0].height
        for side, segs, comp in (("L", cyl.left, cyl.left_component), ("R", cyl.right, cyl.right_component)):
            offsets = tuple(_mod(s.height - ref, cyl.circumference) for s in segs)
            circles.append(
                CircleWord(
                    cyl.index,
                    side,
                    tuple((s.connection, s.forward) for s in segs),
                    offsets,
                    tuple(s.vertex for s in segs),
                    comp,
                )
            )
    return EndpointSurface(
        d,
        tuple(abs(c.holonomy.y) for c in conns),
        tuple((c.start, c.end) for c in conns),
        tuple(tri.vertex_angle),
        tuple(tri.vertex_marked),
        tuple(c.circumference for c in analysis.cylinders),
        tuple(c.height / 2 for c in analysis.cylinders),
        tuple(circles),
        multicurve_type(analysis),
    )


def _mod(x: QuadExt, a: QuadExt) -> QuadExt:
    while x.sign() < 0:
        x = x + a
    while x >= a:
        x = x - a
    return x


def endpoint(ray, lam=None, bound=None) -> EndpointSurface:
    """Cut every vertical cylinder at mid-height and keep the critical graph with its boundary words."""
    ray = _ray(ray, bound)
    _require_strebel(ray)
    analysis = ray.analysis if lam is None else analysis_at(ray, lam)
    return _endpoint_from_analysis(analysis, ray.base.d)


# -- modular equivalence ----------------------------------------------------------------


@dataclass(frozen=True)
class ModularMatch:
    equivalent: bool
    matching: tuple[int, ...] | None  # cylinder i of the first ray <-> matching[i] of the second
    lam: QuadExt | None

    def render(self) -> str:
        if not self.equivalent:
            return "modular_equivalent=false"
        m = ",".join(str(j) for j in self.matching)
        return f"modular_equivalent=true lambda={self.lam} matching={m}"


def _type_matchings(t1: TopologicalType, t2: TopologicalType):
    """Cylinder bijections induced by isomorphisms of the complement incidence data."""
    if len(t1.components) != len(t2.components) or len(t1.curves) != len(t2.curves):
        return
    n = len(t1.components)
    seen = set()
    for sigma in itertools.permutations(range(n)):
        if any(t1.components[i] != t2.components[sigma[i]] for i in range(n)):
            continue
        for pi in itertools.permutations(range(len(t1.curves))):
            ok = True
            for i, (a, b) in enumerate(t1.curves):
                c, d = t2.curves[pi[i]]
                if sorted((sigma[a], sigma[b])) != sorted((c, d)):
                    ok = False
                    break
            if ok and pi not in seen:
                seen.add(pi)
                yield pi


def modular_equivalence(r1, r2, bound=None) -> ModularMatch:
    """Cylinder matching respecting the curve-system type with M_i = lam M'_{matching[i]}."""
    r1, r2 = _ray(r1, bound), _ray(r2, bound)
    _require_strebel(r1)
    _require_strebel(r2)
    m1, m2 = r1.analysis.moduli, r2.analysis.moduli
    if len(m1) != len(m2):
        return ModularMatch(False, None, None)
    t1, t2 = multicurve_type(r1.analysis), multicurve_type(r2.analysis)
    for pi in sorted(_type_matchings(t1, t2)):
        lam = m1[0] / m2[pi[0]]
        if all(m1[i] == lam * m2[pi[i]] for i in range(len(m1))):
            return ModularMatch(True, tuple(pi), lam)
    return ModularMatch(False, None, None)


# -- simplex-bundle coordinates ---------------------------------------------------------


@dataclass(frozen=True)
class ModuliVector:
    """Projective class of positive moduli, stored with entries summing to 1."""

    values: tuple[QuadExt, ...]

    def __post_init__(self):
        if not self.values or any(v.sign() <= 0 for v in self.values):
            raise ValueError("moduli must be positive")

    @classmethod
    def of(cls, moduli) -> "ModuliVector":
        vals = [as_quad(m) for m in moduli]
        if not vals or any(v.sign() <= 0 for v in vals):
            raise ValueError("moduli must be positive")
        total = sum(vals[1:], vals[0])
        return cls(tuple(v / total for v in vals))

    def render(self) -> str:
        smallest = min(self.values)
        return ":".join((v / smallest).render() for v in self.values)


@dataclass(frozen=True)
class PhiPoint:
    code: tuple
    moduli: ModuliVector  # in endpoint cylinder order
    endpoint: EndpointSurface

    @property
    def token(self) -> str:
        return hashlib.sha256(repr(self.code).encode()).hexdigest()[:16]

    def render(self) -> str:
        return f"code={self.token} moduli={self.moduli.render()}"


def _qtok(x: QuadExt) -> tuple[Fraction, Fraction]:
    return (x.a, x.b)


def _ribbon_code(e: EndpointSurface, moduli: tuple[QuadExt, ...] | None):
    """Least reading of the normalised metric ribbon graph over roots and orientations.

    A reading starts at one segment of one circle and walks circles in order
    of discovery. A circle reached through a shared connection is entered at
    that segment; one reached only through its partner is entered at each
    rotation with the least local word, and the least result is kept.
    Connections are named and oriented by first traversal, which pins down
    the gluing.
    """
    total = _gamma_total(e)
    lengths = [_qtok(x / total) for x in e.connection_lengths]
    occ: dict[int, list[tuple[int, int]]] = {}
    for ci, w in enumerate(e.circles):
        for k, (c, _) in enumerate(w.steps):
            occ.setdefault(c, []).append((ci, k))

    def local(ci, start, sigma):
        w = e.circles[ci]
        n = len(w.steps)
        out = []
        for r in range(n):
            k = (start + sigma * r) % n
            c, fwd = w.steps[k]
            first = w.lower_vertices[k] if sigma == 1 else _upper_vertex(e, c, fwd)
            out.append((lengths[c], e.vertex_angles[first], e.vertex_marked[first]))
        return tuple(out)

    def explore(disc, entry, labels, out):
        pos = len(out)
        if pos == len(disc):
            yield out, disc
            return
        ci = disc[pos]
        if ci not in entry:
            sigma = entry[ci ^ 1][1]
            words = [(local(ci, s, sigma), s) for s in range(len(e.circles[ci].steps))]
            least = min(wd for wd, _ in words)
            for wd, s in words:
                if wd == least:
                    yield from explore(disc, {**entry, ci: (s, sigma)}, labels, out)
            return
        start, sigma = entry[ci]
        w = e.circles[ci]
        n = len(w.steps)
        disc, entry, labels = list(disc), dict(entry), dict(labels)
        names = []
        for r in range(n):
            k = (start + sigma * r) % n
            c, fwd = w.steps[k]
            along = fwd == (sigma == 1)
            if c not in labels:
                # a connection is oriented by its first traversal
                labels[c] = (len(labels), along)
            names.append((labels[c][0], labels[c][1] == along))
            for oc, ok in occ[c]:
                if (oc, ok) == (ci, k):
                    continue
                if oc not in disc:
                    disc.append(oc)
                if oc not in entry:
                    same = fwd == e.circles[oc].steps[ok][1]
                    entry[oc] = (ok, sigma if same else -sigma)
        if ci ^ 1 not in disc:
            disc.append(ci ^ 1)
        is_left = (w.side == "L") == (sigma == 1)
        block = (n, is_left, disc.index(ci ^ 1), local(ci, start, sigma), tuple(names))
        yield from explore(disc, entry, labels, out + [block])

    best = None
    for ci, w in enumerate(e.circles):
        for k in range(len(w.steps)):
            for sigma in (1, -1):
                for blocks, disc in explore([ci], {ci: (k, sigma)}, {}, []):
                    code = tuple(blocks)
                    if moduli is not None:
                        cyls = list(dict.fromkeys(x // 2 for x in disc))
                        code = code + (tuple(_qtok(moduli[c]) for c in cyls),)
                    if best is None or code < best:
                        best = code
    return best


def _upper_vertex(e: EndpointSurface, c: int, fwd: bool) -> int:
    start, end = e.connection_ends[c]
    return end if fwd else start


def _gamma_total(e: EndpointSurface) -> QuadExt:
    return sum(e.connection_lengths[1:], e.connection_lengths[0])


def phi(ray, lam=None, bound=None) -> PhiPoint:
    """Normalised ribbon-graph code of the endpoint and the projective moduli."""
    ray = _ray(ray, bound)
    _require_strebel(ray)
    analysis = ray.analysis if lam is None else analysis_at(ray, lam)
    e = _endpoint_from_analysis(analysis, ray.base.d)
    v = ModuliVector.of(analysis.moduli)
    return PhiPoint(_ribbon_code(e, v.values), v, e)


def _check_circles(e: EndpointSurface) -> None:
    for i, a in enumerate(e.circumferences):
        for ci in (2 * i, 2 * i + 1):
            w = e.circles[ci]
            s = QuadExt(0)
            for c, _ in w.steps:
                s = s + e.connection_lengths[c]
            if s != a:
                raise ValueError(f"boundary circle {ci} has length {s}, its pair needs circumference {a}")


def phi_inverse(e: EndpointSurface, moduli, twists=None, bound=None) -> TeichRay:
    """Glue a flat cylinder of circumference a_i and height a_i M_i into pair i.

    Each cylinder is one parallelogram chart with its left side up the
    y-axis; ``twists`` shift the right side (default: the recorded offsets).
    """
    v = moduli if isinstance(moduli, ModuliVector) else ModuliVector.of(moduli)
    if len(v.values) != e.cylinders:
        raise ValueError(f"{len(v.values)} moduli for {e.cylinders} cylinders")
    _check_circles(e)
    twists = [QuadExt(0)] * e.cylinders if twists is None else [as_quad(t) for t in twists]
    charts = []
    edge_of: dict[tuple[int, int], int] = {}
    marks = set()
    for i, a in enumerate(e.circumferences):
        left, right = e.circles[2 * i], e.circles[2 * i + 1]
        w = a * v.values[i]
        delta = right.offsets[0] + twists[i]
        verts = [Vec2(0, 0)]
        corner_vertex = [left.lower_vertices[0]]
        y = delta
        for k, (c, _) in enumerate(right.steps):
            verts.append(Vec2(w, y))
            corner_vertex.append(right.lower_vertices[k])
            edge_of[(2 * i + 1, k)] = len(verts) - 1
            y = y + e.connection_lengths[c]
        top_edge = len(verts)
        verts.append(Vec2(w, y))
        corner_vertex.append(right.lower_vertices[0])
        verts.append(Vec2(0, a))
        corner_vertex.append(left.lower_vertices[0])
        for k in range(len(left.steps) - 1, 0, -1):
            edge_of[(2 * i, k)] = len(verts) - 1
            verts.append(Vec2(0, left.offsets[k]))
            corner_vertex.append(left.lower_vertices[k])
        edge_of[(2 * i, 0)] = len(verts) - 1
        chart = len(charts)
        charts.append(PolygonChart(f"C{i}", tuple(verts)))
        edge_of[("bottom", i)] = (chart, 0)
        edge_of[("top", i)] = (chart, top_edge)
        for corner, vert in enumerate(corner_vertex):
            if e.vertex_marked[vert]:
                marks.add((chart, corner))
    gluings = [Gluing(edge_of[("bottom", i)], edge_of[("top", i)], False) for i in range(e.cylinders)]
    occ: dict[int, list[tuple[int, int]]] = {}
    for ci, w in enumerate(e.circles):
        for k, (c, _) in enumerate(w.steps):
            occ.setdefault(c, []).append((ci, k))
    for c in sorted(occ):
        if len(occ[c]) != 2:
            raise ValueError(f"connection {c} bounds {len(occ[c])} cylinder sides, expected 2")
        (c1, k1), (c2, k2) = occ[c]
        f1, f2 = e.circles[c1].steps[k1][1], e.circles[c2].steps[k2][1]
        same_side = e.circles[c1].side == e.circles[c2].side
        if same_side == (f1 == f2):
            raise ValueError(f"connection {c} has inconsistent orientations on its two sides")
        gluings.append(Gluing((c1 // 2, edge_of[(c1, k1)]), (c2 // 2, edge_of[(c2, k2)]), same_side))
    surface = FlatSurface(e.d, tuple(charts), tuple(gluings), frozenset(marks))
    return make_ray(surface, bound)


def _flow_normal(ray: TeichRay) -> FlatSurface:
    """Representative of the diagonal-and-scaling orbit: total width 1 and total circumference 1."""
    cyls = ray.analysis.cylinders
    sb = sum((c.height for c in cyls[1:]), cyls[0].height)
    sa = sum((c.circumference for c in cyls[1:]), cyls[0].circumference)
    return apply_linear(ray.base, ((1 / sb, QuadExt(0)), (QuadExt(0), 1 / sa)))


def normalized_code(ray, bound=None):
    """Flat canonical code after normalising away the vertical flow and homotheties."""
    ray = _ray(ray, bound)
    _require_strebel(ray)
    return canonical_form(_flow_normal(ray))


# -- asymptotes ---------------------------------------------------------------------------


def _projective(values) -> tuple:
    vals = list(values)
    total = sum(vals[1:], vals[0])
    return tuple(sorted(_qtok(v / total) for v in vals))


def _invariants(e: EndpointSurface) -> tuple:
    used = sorted({v for ends in e.connection_ends for v in ends})
    return (
        e.topology.key,
        tuple(sorted((e.vertex_angles[v], e.vertex_marked[v]) for v in used)),
        _projective(e.circumferences),
        _projective(e.connection_lengths),
    )


def asymptotic_test(r1, r2, bound=None) -> str:
    r1, r2 = _ray(r1, bound), _ray(r2, bound)
    if not modular_equivalence(r1, r2).equivalent:
        return NOT_ASYMPTOTIC
    p1, p2 = phi(r1), phi(r2)
    if _invariants(p1.endpoint) != _invariants(p2.endpoint):
        return NOT_ASYMPTOTIC
    if _ribbon_code(p1.endpoint, None) == _ribbon_code(p2.endpoint, None):
        return ASYMPTOTIC
    return INCONCLUSIVE


# -- Tits angle ------------------------------------------------------------------------------


@dataclass(frozen=True)
class TitsAngle:
    value: int
    mode: str  # "marked" when one surface is a linear image of the other, else "moduli"
    reason: str

    def __post_init__(self):
        if self.value not in (0, 1, 2):
            raise ValueError("Tits angles between Strebel rays are 0, 1 or 2")


def linear_relation(s1: FlatSurface, s2: FlatSurface):
    """The orientation-preserving matrix m with s2 = m s1 chart by chart, if there is one."""
    if (
        s1.d != s2.d
        or len(s1.charts) != len(s2.charts)
        or s1.gluings != s2.gluings
        or s1.marks != s2.marks
        or any(len(p) != len(q) for p, q in zip(s1.charts, s2.charts))
    ):
        return None
    pairs = [(p.edge(k), q.edge(k)) for p, q in zip(s1.charts, s2.charts) for k in range(len(p))]
    # two independent edges fix the matrix
    for (u1, w1), (u2, w2) in itertools.combinations(pairs, 2):
        det = u1.x * u2.y - u1.y * u2.x
        if det:
            break
    else:
        return None
    # m [u1 u2] = [w1 w2]
    a = (w1.x * u2.y - w2.x * u1.y) / det
    b = (w2.x * u1.x - w1.x * u2.x) / det
    c = (w1.y * u2.y - w2.y * u1.y) / det
    dd = (w2.y * u1.x - w1.y * u2.x) / det
    m = ((a, b), (c, dd))
    for u, w in pairs:
        if Vec2(a * u.x + b * u.y, c * u.x + dd * u.y) != w:
            return None
    if (a * dd - b * c).sign() <= 0:
        return None
    return m


def tits_angle(r1, r2, oracle=None, bound=None) -> TitsAngle:
    """0, 1 or 2 from the two vertical curve systems.

    When the second surface is a linear image of the first, the linear map
    is the marking and the two systems are compared through it: equal
    directions give 0, distinct directions give 2 since every cylinder of
    one direction is crossed by the cores of the other. Otherwise the
    systems are compared up to homeomorphism; ``oracle(t1, t2)`` may answer
    the disjointness question outside the built-in tables.
    """
    r1, r2 = _ray(r1, bound), _ray(r2, bound)
    _require_strebel(r1)
    _require_strebel(r2)
    t1, t2 = multicurve_type(r1.analysis), multicurve_type(r2.analysis)
    if (t1.genus, t1.punctures) != (t2.genus, t2.punctures):
        raise ValueError(
            f"surfaces differ: genus {t1.genus} with {t1.punctures} punctures vs genus {t2.genus} with {t2.punctures}"
        )
    m = linear_relation(r1.base, r2.base)
    if m is not None:
        # pulled-back vertical direction of r2 is m^-1 (0, 1), parallel to (0, 1) iff b = 0
        (_, b), _ = m
        if not b:
            return TitsAngle(0, "marked", "same vertical foliation under the marking")
        return TitsAngle(2, "marked", "distinct periodic directions: every core crosses the other system")
    if t1.isomorphic(t2):
        return TitsAngle(0, "moduli", "curve systems of the same type")
    try:
        disjoint = disjointly_realizable(t1, t2)
    except LookupError:
        if oracle is None:
            raise Inconclusive(
                f"no disjointness table for genus {t1.genus} with {t1.punctures} punctures and no oracle supplied"
            ) from None
        disjoint = oracle(t1, t2)
        if disjoint is None:
            raise Inconclusive("the supplied oracle did not decide disjointness") from None
    if disjoint:
        return TitsAngle(1, "moduli", "the two systems have disjoint realisations")
    return TitsAngle(2, "moduli", "no disjoint realisation of the two systems")


@dataclass(frozen=True)
class PreTitsRow:
    lam: QuadExt
    log_lambda: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.bound / self.log_lambda


def _ray_bounds(ray: TeichRay, lam):
    def bounds(curve) -> ExtBound:
        if isinstance(curve, TorusSlope):
            exact = ext_torus_exact(ray_point(ray, lam), curve)
            return ExtBound(exact, exact, "flat torus", "flat torus")
        if isinstance(curve, (DirectionalCore, GraphLoop)) and Vec2(*curve.direction) == Vec2(0, 1):
            return bounds_from_analysis(curve, analysis_at(ray, lam))
        from .extremal import ext_bounds

        return ext_bounds(curve, ray_point(ray, lam), ray.bound)

    return bounds


def pre_tits_estimate(r1, r2, lams, family, bound=None) -> list[PreTitsRow]:
    """Kerckhoff lower bound on d(r1(lam), r2(lam)) over log lam, per lam > 1."""
    from .extremal import kerckhoff_lower_bound

    r1, r2 = _ray(r1, bound), _ray(r2, bound)
    _require_strebel(r1)
    _require_strebel(r2)
    rows = []
    for lam in lams:
        lam = as_quad(lam)
        if lam <= 1:
            raise ValueError("pre-Tits ratios need lambda > 1")
        kb = kerckhoff_lower_bound(
            None, None, family, bounds_x=_ray_bounds(r1, lam), bounds_y=_ray_bounds(r2, lam)
        )
        rows.append(PreTitsRow(lam, math.log(float(lam)), kb.value))
    return rows
