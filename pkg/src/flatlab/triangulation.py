"""Triangulated flat surfaces and exact straight-line marching.

Each triangle stores its three edge vectors in counterclockwise order, so its
corners sit at ``0``, ``e0`` and ``e0 + e1`` in the triangle's own frame. Edge
``(t, i)`` runs from corner ``i`` to corner ``i + 1``. ``glue[(t, i)]`` is
``(t2, j, s)``: the twin edge and the frame sign ``s`` (``+1`` translation,
``-1`` half-turn), so a vector ``w`` in frame ``t`` reads ``s * w`` in frame
``t2`` and the twin edge vector is ``-s * e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .numberfield import QuadExt
from .surface import FlatSurface, total_area
from .vec import Vec2, cross, dot, orient

__all__ = [
    "TriangulationError",
    "Triangulation",
    "triangulate",
    "MarchHit",
    "Piece",
    "march",
]

ZERO = QuadExt(0)
ORIGIN = Vec2(0, 0)


class TriangulationError(ValueError):
    pass


@dataclass
class Triangulation:
    d: int
    vecs: list[tuple[Vec2, Vec2, Vec2]]
    glue: dict[tuple[int, int], tuple[int, int, int]]
    corner_vertex: list[tuple[int, int, int]]
    vertex_angle: list[int]
    vertex_marked: list[bool]
    area: QuadExt = field(default_factory=lambda: QuadExt(0))

    def __len__(self):
        return len(self.vecs)

    def copy(self) -> "Triangulation":
        return Triangulation(
            self.d,
            list(self.vecs),
            dict(self.glue),
            list(self.corner_vertex),
            list(self.vertex_angle),
            list(self.vertex_marked),
            self.area,
        )

    # -- geometry of one triangle -------------------------------------------

    def corners(self, t: int) -> tuple[Vec2, Vec2, Vec2]:
        e0, e1, _ = self.vecs[t]
        return ORIGIN, e0, e0 + e1

    def edge(self, t: int, i: int) -> Vec2:
        return self.vecs[t][i % 3]

    def twin(self, t: int, i: int) -> tuple[int, int, int]:
        return self.glue[(t, i % 3)]

    def edge_id(self, t: int, i: int) -> tuple[int, int]:
        t2, j, _ = self.glue[(t, i % 3)]
        return min((t, i % 3), (t2, j))

    def edges(self) -> list[tuple[int, int]]:
        """One representative (t, i) per undirected edge, sorted."""
        return sorted({self.edge_id(t, i) for t in range(len(self)) for i in range(3)})

    def num_vertices(self) -> int:
        return len(self.vertex_angle)

    # -- corner wedges --------------------------------------------------------

    def in_wedge(self, t: int, c: int, u: Vec2) -> bool:
        """Is direction u in the half-open wedge [e_c, -e_{c-1}) at corner c?"""
        start = self.vecs[t][c % 3]
        end = -self.vecs[t][(c + 2) % 3]
        cs = cross(start, u).sign()
        if cs < 0:
            return False
        if cs == 0:
            return dot(start, u).sign() > 0
        return cross(u, end).sign() > 0

    def next_corner_ccw(self, t: int, c: int) -> tuple[int, int, int]:
        t2, j, s = self.glue[(t, (c + 2) % 3)]
        return t2, j, s

    def next_corner_cw(self, t: int, c: int) -> tuple[int, int, int]:
        t2, j, s = self.glue[(t, c % 3)]
        return t2, (j + 1) % 3, s

    def corners_around(self, t: int, c: int) -> list[tuple[int, int, int]]:
        """Corners at the vertex of (t, c) in counterclockwise order with frame signs."""
        out = [(t, c % 3, 1)]
        sign = 1
        t2, c2 = t, c % 3
        while True:
            t2, c2, s = self.next_corner_ccw(t2, c2)
            sign *= s
            if (t2, c2) == (t, c % 3):
                return out
            out.append((t2, c2, sign))

    def locate(self, t: int, c: int, u: Vec2, ccw: bool = True) -> tuple[int, int, Vec2]:
        """Corner around the vertex of (t, c) whose wedge holds direction u.

        The walk starts at (t, c) and turns counterclockwise (or clockwise),
        carrying u into each frame. It stops at the first wedge containing u,
        which is the right one whenever the wanted direction lies less than a
        half turn away in the walking sense.
        """
        c %= 3
        limit = 3 * len(self.vecs) + 3
        for _ in range(limit):
            if self.in_wedge(t, c, u):
                return t, c, u
            if ccw:
                t, c, s = self.next_corner_ccw(t, c)
            else:
                t, c, s = self.next_corner_cw(t, c)
            u = u.signed(s)
        raise TriangulationError("direction not found around vertex")

    def directions_at_vertices(self, u: Vec2) -> list[tuple[int, int, Vec2]]:
        """All (t, c, local direction) where +u or -u leaves a vertex.

        Only vertices that are singular or marked are considered, which is
        every vertex of a triangulation built by :func:`triangulate`.
        """
        out = []
        for t in range(len(self)):
            for c in range(3):
                for w in (u, -u):
                    if self.in_wedge(t, c, w):
                        out.append((t, c, w))
        return out

    def vertex_of(self, t: int, c: int) -> int:
        return self.corner_vertex[t][c % 3]

    def transformed(self, m) -> "Triangulation":
        """Same combinatorics with every edge vector pushed through ``m`` (det > 0)."""
        (a, b), (c, d) = m
        det = a * d - b * c
        if det.sign() <= 0:
            raise TriangulationError("triangulations only follow orientation-preserving maps")
        vecs = [tuple(v.transform(m) for v in tri) for tri in self.vecs]
        return Triangulation(
            self.d,
            vecs,
            dict(self.glue),
            list(self.corner_vertex),
            list(self.vertex_angle),
            list(self.vertex_marked),
            self.area * det,
        )

    def check(self) -> None:
        """Raise if a structural invariant fails."""
        for t, (e0, e1, e2) in enumerate(self.vecs):
            if not (e0 + e1 + e2).is_zero():
                raise TriangulationError(f"triangle {t} does not close")
            if cross(e0, e1).sign() <= 0:
                raise TriangulationError(f"triangle {t} is not positively oriented")
        for (t, i), (t2, j, s) in self.glue.items():
            if self.glue[(t2, j)] != (t, i, s):
                raise TriangulationError(f"edge pairing not an involution at {(t, i)}")
            if (t2, j) == (t, i):
                raise TriangulationError(f"edge {(t, i)} glued to itself")
            if self.vecs[t2][j] != self.vecs[t][i].signed(-s):
                raise TriangulationError(f"edge vectors disagree across {(t, i)}")


def _ear_clip(vertices) -> list[tuple[int, int, int]]:
    ring = list(range(len(vertices)))
    out: list[tuple[int, int, int]] = []
    while len(ring) > 3:
        n = len(ring)
        for k in range(n):
            a, b, c = ring[k - 1], ring[k], ring[(k + 1) % n]
            pa, pb, pc = vertices[a], vertices[b], vertices[c]
            if orient(pa, pb, pc) <= 0:
                continue
            blocked = False
            for m in ring:
                if m in (a, b, c):
                    continue
                pm = vertices[m]
                if orient(pa, pb, pm) >= 0 and orient(pb, pc, pm) >= 0 and orient(pc, pa, pm) >= 0:
                    blocked = True
                    break
            if not blocked:
                out.append((a, b, c))
                ring.pop(k)
                break
        else:
            raise TriangulationError("no ear found; polygon is not simple")
    out.append(tuple(ring))
    return out


def triangulate(surface: FlatSurface) -> Triangulation:
    """Split every chart into triangles whose corners are chart vertices.

    Every vertex orbit must be a cone point or marked: a regular unmarked
    vertex would become a fake vertex of the triangulation.
    """
    for orbit, angle in enumerate(surface.orbit_angles):
        if angle == 2 and orbit not in surface.marked_orbits:
            raise TriangulationError(
                "every chart vertex must be a cone point or marked; "
                "mark a vertex of the torus (or other regular vertices) first"
            )
    vecs: list[tuple[Vec2, Vec2, Vec2]] = []
    corner_vertex: list[tuple[int, int, int]] = []
    glue: dict[tuple[int, int], tuple[int, int, int]] = {}
    side_of_edge: dict[tuple[int, int], tuple[int, int]] = {}
    for c, poly in enumerate(surface.charts):
        n = len(poly)
        diagonals: dict[tuple[int, int], tuple[int, int]] = {}
        for a, b, cc in _ear_clip(poly.vertices):
            t = len(vecs)
            pa, pb, pc = poly.vertices[a], poly.vertices[b], poly.vertices[cc]
            vecs.append((pb - pa, pc - pb, pa - pc))
            corner_vertex.append(tuple(surface.orbit_of(c, v) for v in (a, b, cc)))
            for i, (u, w) in enumerate(((a, b), (b, cc), (cc, a))):
                if (u + 1) % n == w:
                    side_of_edge[(c, u)] = (t, i)
                else:
                    key = (min(u, w), max(u, w))
                    if key in diagonals:
                        t2, j = diagonals.pop(key)
                        glue[(t, i)] = (t2, j, 1)
                        glue[(t2, j)] = (t, i, 1)
                    else:
                        diagonals[key] = (t, i)
        if diagonals:
            raise TriangulationError(f"unpaired diagonal in chart {poly.id}")
    for g in surface.gluings:
        s = -1 if g.halfturn else 1
        ta, ia = side_of_edge[g.first]
        tb, ib = side_of_edge[g.second]
        glue[(ta, ia)] = (tb, ib, s)
        glue[(tb, ib)] = (ta, ia, s)
    tri = Triangulation(
        surface.d,
        vecs,
        glue,
        corner_vertex,
        list(surface.orbit_angles),
        [v in surface.marked_orbits for v in range(len(surface.orbit_angles))],
        total_area(surface),
    )
    tri.check()
    return tri


# -- straight-line marching --------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    """A straight segment inside one triangle, in that triangle's frame.

    ``s0`` is the march parameter at ``p``; ``sign`` is the frame sign of the
    triangle relative to the march's starting frame.
    """

    t: int
    p: Vec2
    q: Vec2
    u: Vec2
    s0: QuadExt
    sign: int


@dataclass
class MarchHit:
    kind: str  # "vertex", "stop", "bound", "closed"
    t: int
    point: Vec2
    u: Vec2
    length: QuadExt
    sign: int
    corner: int | None = None
    tag: object = None
    pieces: list[Piece] = field(default_factory=list)


def _exit(tri: Triangulation, t: int, p: Vec2, u: Vec2, entry: int | None):
    """Smallest positive parameter at which p + s u leaves triangle t."""
    corners = tri.corners(t)
    best = None
    best_edge = None
    for k in range(3):
        if k == entry:
            continue
        ek = tri.vecs[t][k]
        den = cross(ek, u)
        if den.sign() >= 0:
            continue
        s = cross(ek, p - corners[k]) / (-den)
        if s.sign() < 0:
            continue
        if best is None or s < best:
            best, best_edge = s, k
    if best is None:
        raise TriangulationError("march direction does not leave the triangle")
    return best, best_edge


def march(
    tri: Triangulation,
    t: int,
    p: Vec2,
    u: Vec2,
    bound: QuadExt | None,
    entry: int | None = None,
    stopper=None,
    close_at: tuple[int, Vec2, Vec2] | None = None,
    max_steps: int = 200000,
) -> MarchHit:
    """Follow the straight line p + s u across triangles.

    Stops at the first vertex, at the first stop reported by ``stopper``, when
    the parameter would exceed ``bound`` or, with ``close_at = (t, point,
    direction)``, when the line comes back through that point heading the
    same way. ``stopper(piece_t, p, q, u)`` returns ``(s, tag)`` for the first
    blocking parameter ``0 < s <= |q - p|`` along the segment, or None.
    """
    total = QuadExt(0)
    sign = 1
    pieces: list[Piece] = []
    for _ in range(max_steps):
        s, k = _exit(tri, t, p, u, entry)
        q = p + u.scale(s)
        hit_stop = None
        if stopper is not None:
            hit_stop = stopper(t, p, q, u)
        hit_close = None
        if close_at is not None and close_at[0] == t and close_at[2] == u and pieces:
            target = close_at[1]
            w = target - p
            if not cross(u, w) and dot(u, w).sign() >= 0:
                sc = dot(u, w) / dot(u, u)
                if sc <= s:
                    hit_close = sc
        candidates = []
        if hit_stop is not None:
            candidates.append((hit_stop[0], 0, "stop", hit_stop[1]))
        if hit_close is not None:
            candidates.append((hit_close, 1, "closed", None))
        if candidates:
            candidates.sort(key=lambda c: (c[0], c[1]))
            sc, _, kind, tag = candidates[0]
            if bound is not None and total + sc > bound:
                end = p + u.scale(bound - total)
                pieces.append(Piece(t, p, end, u, total, sign))
                return MarchHit("bound", t, end, u, bound, sign, pieces=pieces)
            end = p + u.scale(sc)
            pieces.append(Piece(t, p, end, u, total, sign))
            return MarchHit(kind, t, end, u, total + sc, sign, tag=tag, pieces=pieces)
        if bound is not None and total + s > bound:
            end = p + u.scale(bound - total)
            pieces.append(Piece(t, p, end, u, total, sign))
            return MarchHit("bound", t, end, u, bound, sign, pieces=pieces)
        pieces.append(Piece(t, p, q, u, total, sign))
        total = total + s
        corners = tri.corners(t)
        for c in (k, (k + 1) % 3):
            if q == corners[c]:
                return MarchHit("vertex", t, q, u, total, sign, corner=c, pieces=pieces)
        t2, j, sg = tri.glue[(t, k)]
        corners2 = tri.corners(t2)
        p = corners2[(j + 1) % 3] + (q - corners[k]).signed(sg)
        u = u.signed(sg)
        sign *= sg
        t, entry = t2, j
    raise TriangulationError("march exceeded the step limit")
