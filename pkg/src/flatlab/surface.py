"""Half-translation surfaces presented as polygons with glued edges.

Edge ``i`` of a polygon runs from vertex ``i`` to vertex ``i + 1``. A gluing
identifies two edges either by a translation (the edge vectors are opposite)
or by a half-turn ``z -> -z + c`` (the edge vectors are equal).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .numberfield import QuadExt, as_quad, is_squarefree, parse_literal
from .vec import Vec2, cross, dot, half_turns, orient

__all__ = [
    "PolygonChart",
    "Gluing",
    "FlatSurface",
    "ConePoint",
    "ValidationReport",
    "SurfaceParseError",
    "parse_surface",
    "render_surface",
    "load_surface",
    "validate",
    "total_area",
    "apply_linear",
]


class SurfaceParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class PolygonChart:
    id: str
    vertices: tuple[Vec2, ...]

    def __len__(self):
        return len(self.vertices)

    def edge(self, i: int) -> Vec2:
        n = len(self.vertices)
        return self.vertices[(i + 1) % n] - self.vertices[i % n]

    def twice_area(self) -> QuadExt:
        total = QuadExt(0)
        n = len(self.vertices)
        for i in range(n):
            total = total + cross(self.vertices[i], self.vertices[(i + 1) % n])
        return total


@dataclass(frozen=True)
class Gluing:
    first: tuple[int, int]
    second: tuple[int, int]
    halfturn: bool = False

    @property
    def kind(self) -> str:
        return "halfturn" if self.halfturn else "translation"


@dataclass(frozen=True)
class ConePoint:
    orbit: int
    angle: int  # in units of pi
    marked: bool = False

    @property
    def order(self) -> int:
        return self.angle - 2


@dataclass(frozen=True)
class FlatSurface:
    d: int
    charts: tuple[PolygonChart, ...]
    gluings: tuple[Gluing, ...]
    marks: frozenset = field(default_factory=frozenset)

    # -- combinatorics ------------------------------------------------------

    @cached_property
    def partners(self) -> dict[tuple[int, int], tuple[int, int, int]]:
        """(chart, edge) -> (chart, edge, sign); sign -1 marks a half-turn."""
        table: dict[tuple[int, int], tuple[int, int, int]] = {}
        for g in self.gluings:
            s = -1 if g.halfturn else 1
            table[g.first] = (*g.second, s)
            table[g.second] = (*g.first, s)
        return table

    def edge_vector(self, chart: int, edge: int) -> Vec2:
        return self.charts[chart].edge(edge)

    @cached_property
    def _orbits(self) -> tuple[list[list[tuple[int, int]]], dict[tuple[int, int], int]]:
        parent: dict[tuple[int, int], tuple[int, int]] = {}

        def find(x):
            root = x
            while parent[root] != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        for c, chart in enumerate(self.charts):
            for v in range(len(chart)):
                parent[(c, v)] = (c, v)
        for g in self.gluings:
            (p, i), (q, j) = g.first, g.second
            np_, nq = len(self.charts[p]), len(self.charts[q])
            for a, b in (((p, i), (q, (j + 1) % nq)), ((p, (i + 1) % np_), (q, j))):
                if a in parent and b in parent:
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        roots: dict[tuple[int, int], int] = {}
        orbits: list[list[tuple[int, int]]] = []
        index: dict[tuple[int, int], int] = {}
        for corner in sorted(parent):
            r = find(corner)
            if r not in roots:
                roots[r] = len(orbits)
                orbits.append([])
            orbits[roots[r]].append(corner)
            index[corner] = roots[r]
        return orbits, index

    @property
    def vertex_orbits(self) -> list[list[tuple[int, int]]]:
        return self._orbits[0]

    def orbit_of(self, chart: int, vertex: int) -> int:
        n = len(self.charts[chart])
        return self._orbits[1][(chart, vertex % n)]

    def corner_half_turns(self, chart: int, vertex: int) -> int:
        poly = self.charts[chart]
        n = len(poly)
        here = poly.vertices[vertex % n]
        out = poly.vertices[(vertex + 1) % n] - here
        back = poly.vertices[(vertex - 1) % n] - here
        return half_turns(out, back)

    @cached_property
    def orbit_angles(self) -> tuple[int, ...]:
        """Total angle of each vertex orbit in units of pi."""
        return tuple(
            sum(self.corner_half_turns(c, v) for c, v in orbit) for orbit in self.vertex_orbits
        )

    @cached_property
    def marked_orbits(self) -> frozenset[int]:
        return frozenset(self.orbit_of(c, v) for c, v in self.marks)

    @property
    def cone_points(self) -> list[ConePoint]:
        return [
            ConePoint(i, k, i in self.marked_orbits)
            for i, k in enumerate(self.orbit_angles)
            if k != 2
        ]

    @property
    def euler_characteristic(self) -> int:
        return len(self.vertex_orbits) - len(self.gluings) + len(self.charts)

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    def is_singular_or_marked(self, orbit: int) -> bool:
        return self.orbit_angles[orbit] != 2 or orbit in self.marked_orbits

    def is_translation_surface(self) -> bool:
        return not any(g.halfturn for g in self.gluings)

    def chart_index(self, chart_id: str) -> int:
        for i, c in enumerate(self.charts):
            if c.id == chart_id:
                return i
        raise KeyError(chart_id)

    def render(self) -> str:
        return render_surface(self)


# -- validation ---------------------------------------------------------------


@dataclass
class ValidationReport:
    valid: bool
    problems: list[str]
    genus: int | None = None
    area: QuadExt | None = None
    cone_points: list[ConePoint] = field(default_factory=list)
    marked: list[int] = field(default_factory=list)

    def summary(self) -> str:
        if not self.valid:
            return "invalid: " + "; ".join(self.problems)
        cones = ",".join(f"{c.angle}pi" for c in self.cone_points) or "none"
        return f"valid genus={self.genus} area={self.area} cone_angles={cones} marked={len(self.marked)}"


def _segments_touch(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool:
    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    def on_segment(a, b, c):
        # c collinear with a, b; inside the closed segment?
        return dot(c - a, c - b).sign() <= 0

    return (
        (o1 == 0 and on_segment(p1, p2, q1))
        or (o2 == 0 and on_segment(p1, p2, q2))
        or (o3 == 0 and on_segment(q1, q2, p1))
        or (o4 == 0 and on_segment(q1, q2, p2))
    )


def _polygon_problems(poly: PolygonChart) -> list[str]:
    out: list[str] = []
    n = len(poly)
    if n < 3:
        return [f"polygon {poly.id}: fewer than 3 vertices"]
    vs = poly.vertices
    for i in range(n):
        if poly.edge(i).is_zero():
            out.append(f"polygon {poly.id}: edge {i} has zero length")
    if out:
        return out
    if poly.twice_area().sign() <= 0:
        out.append(f"polygon {poly.id}: not counterclockwise (signed area <= 0)")
    for i in range(n):
        prev, here, nxt = vs[i - 1], vs[i], vs[(i + 1) % n]
        if orient(prev, here, nxt) == 0 and dot(here - prev, nxt - here).sign() < 0:
            out.append(f"polygon {poly.id}: spike at vertex {i}")
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_touch(vs[i], vs[(i + 1) % n], vs[j], vs[(j + 1) % n]):
                out.append(f"polygon {poly.id}: edges {i} and {j} intersect")
    return out


def validate(surface: FlatSurface) -> ValidationReport:
    problems: list[str] = []
    if not is_squarefree(surface.d):
        problems.append(f"field parameter d={surface.d} is not squarefree")
    if not surface.charts:
        problems.append("no polygons")
        return ValidationReport(False, problems)
    for poly in surface.charts:
        for v in poly.vertices:
            for coord in (v.x, v.y):
                if coord.b and coord.d != surface.d:
                    problems.append(f"polygon {poly.id}: coordinate outside Q(sqrt {surface.d})")
        problems.extend(_polygon_problems(poly))

    seen: dict[tuple[int, int], int] = {}
    for k, g in enumerate(surface.gluings):
        for side in (g.first, g.second):
            c, e = side
            if not (0 <= c < len(surface.charts)) or not (0 <= e < len(surface.charts[c])):
                problems.append(f"gluing {k}: edge {side} does not exist")
                continue
            if side in seen:
                problems.append(f"edge {surface.charts[c].id}.{e} glued more than once")
            seen[side] = k
        if g.first == g.second:
            problems.append(f"gluing {k}: edge glued to itself")
    for c, poly in enumerate(surface.charts):
        for e in range(len(poly)):
            if (c, e) not in seen:
                problems.append(f"edge {poly.id}.{e} is unglued")
    for c, v in surface.marks:
        if not (0 <= c < len(surface.charts)) or not (0 <= v < len(surface.charts[c])):
            problems.append(f"mark {c}.{v} does not name a vertex")
    if problems:
        return ValidationReport(False, problems)

    for g in surface.gluings:
        u = surface.edge_vector(*g.first)
        w = surface.edge_vector(*g.second)
        expected = u if g.halfturn else -u
        if w != expected:
            a = f"{surface.charts[g.first[0]].id}.{g.first[1]}"
            b = f"{surface.charts[g.second[0]].id}.{g.second[1]}"
            problems.append(f"gluing {a} {b} {g.kind}: edge vectors do not match")

    # connectivity of the chart adjacency graph
    reach = {0}
    stack = [0]
    while stack:
        c = stack.pop()
        for e in range(len(surface.charts[c])):
            q = surface.partners[(c, e)][0]
            if q not in reach:
                reach.add(q)
                stack.append(q)
    if len(reach) != len(surface.charts):
        problems.append("surface is disconnected")
    if problems:
        return ValidationReport(False, problems)

    chi = surface.euler_characteristic
    if chi % 2:
        problems.append(f"odd Euler characteristic {chi}")
        return ValidationReport(False, problems)
    genus = (2 - chi) // 2
    order_sum = sum(k - 2 for k in surface.orbit_angles)
    if order_sum != 4 * genus - 4:
        problems.append(f"Gauss-Bonnet fails: sum of orders {order_sum} != {4 * genus - 4}")
    area = total_area(surface)
    if area.sign() <= 0:
        problems.append("total area is not positive")
    return ValidationReport(
        not problems,
        problems,
        genus=genus,
        area=area,
        cone_points=surface.cone_points,
        marked=sorted(surface.marked_orbits),
    )


def total_area(surface: FlatSurface) -> QuadExt:
    twice = QuadExt(0)
    for poly in surface.charts:
        twice = twice + poly.twice_area()
    return twice / 2


def apply_linear(surface: FlatSurface, m) -> FlatSurface:
    """Image of the surface under the real-linear map with matrix ``m``.

    A map reversing orientation is followed by reversing every polygon so the
    charts stay counterclockwise.
    """
    (a, b), (c, d) = m
    a, b, c, d = as_quad(a), as_quad(b), as_quad(c), as_quad(d)
    det = a * d - b * c
    if not det:
        raise ValueError("apply_linear needs an invertible matrix")
    mm = ((a, b), (c, d))
    if det.sign() > 0:
        charts = tuple(
            PolygonChart(p.id, tuple(v.transform(mm) for v in p.vertices)) for p in surface.charts
        )
        return FlatSurface(surface.d, charts, surface.gluings, surface.marks)
    charts = []
    for p in surface.charts:
        n = len(p)
        charts.append(PolygonChart(p.id, tuple(p.vertices[(-k) % n].transform(mm) for k in range(n))))

    def edge_map(side):
        ch, e = side
        return (ch, (-e - 1) % len(surface.charts[ch]))

    gluings = tuple(Gluing(edge_map(g.first), edge_map(g.second), g.halfturn) for g in surface.gluings)
    marks = frozenset((ch, (-v) % len(surface.charts[ch])) for ch, v in surface.marks)
    return FlatSurface(surface.d, tuple(charts), gluings, marks)


# -- text format ----------------------------------------------------------------

_SIDE = re.compile(r"^(?P<id>[^.\s]+)\.(?P<k>[0-9]+)$")


def parse_surface(text: str, source: str | None = None) -> FlatSurface:
    d = 1
    seen_field = False
    charts: list[PolygonChart] = []
    ids: dict[str, int] = {}
    pending_glue: list[tuple[int, str, str, str]] = []
    pending_mark: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "field":
            if seen_field or charts:
                raise SurfaceParseError("field must come first and only once", lineno, source)
            if len(words) != 2 or not words[1].startswith("d="):
                raise SurfaceParseError("expected 'field d=<int>'", lineno, source)
            try:
                d = int(words[1][2:])
            except ValueError:
                raise SurfaceParseError(f"bad field parameter {words[1]!r}", lineno, source) from None
            if not is_squarefree(d):
                raise SurfaceParseError(f"field parameter {d} is not squarefree", lineno, source)
            seen_field = True
        elif head == "polygon":
            if len(words) < 2:
                raise SurfaceParseError("polygon needs an id", lineno, source)
            pid, coords = words[1], words[2:]
            if pid in ids:
                raise SurfaceParseError(f"duplicate polygon id {pid!r}", lineno, source)
            if len(coords) % 2:
                raise SurfaceParseError("odd number of coordinates", lineno, source)
            try:
                values = [parse_literal(t, d) for t in coords]
            except ValueError as exc:
                raise SurfaceParseError(str(exc), lineno, source) from None
            verts = tuple(Vec2(values[k], values[k + 1]) for k in range(0, len(values), 2))
            ids[pid] = len(charts)
            charts.append(PolygonChart(pid, verts))
        elif head == "glue":
            if len(words) != 4 or words[3] not in ("translation", "halfturn"):
                raise SurfaceParseError("expected 'glue <id>.<edge> <id>.<edge> <translation|halfturn>'", lineno, source)
            pending_glue.append((lineno, words[1], words[2], words[3]))
        elif head == "mark":
            if len(words) != 2:
                raise SurfaceParseError("expected 'mark <id>.<vertex>'", lineno, source)
            pending_mark.append((lineno, words[1]))
        else:
            raise SurfaceParseError(f"unknown statement {head!r}", lineno, source)

    def side(token: str, lineno: int) -> tuple[int, int]:
        m = _SIDE.match(token)
        if m is None or m.group("id") not in ids:
            raise SurfaceParseError(f"unknown polygon side {token!r}", lineno, source)
        return ids[m.group("id")], int(m.group("k"))

    gluings = tuple(
        Gluing(side(a, ln), side(b, ln), kind == "halfturn") for ln, a, b, kind in pending_glue
    )
    marks = frozenset(side(t, ln) for ln, t in pending_mark)
    return FlatSurface(d, tuple(charts), gluings, marks)


def render_surface(surface: FlatSurface) -> str:
    lines = [f"field d={surface.d}"]
    for p in surface.charts:
        coords = " ".join(f"{v.x.render()} {v.y.render()}" for v in p.vertices)
        lines.append(f"polygon {p.id} {coords}")
    for g in surface.gluings:
        a = f"{surface.charts[g.first[0]].id}.{g.first[1]}"
        b = f"{surface.charts[g.second[0]].id}.{g.second[1]}"
        lines.append(f"glue {a} {b} {g.kind}")
    for c, v in sorted(surface.marks):
        lines.append(f"mark {surface.charts[c].id}.{v}")
    return "\n".join(lines) + "\n"


def load_surface(path) -> FlatSurface:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SurfaceParseError(f"cannot read file: {exc.strerror}", None, str(path)) from None
    return parse_surface(text, source=str(path))
