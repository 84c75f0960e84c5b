"""Delaunay triangulations of flat surfaces by exact edge flips, and canonical codes.

A canonical code is computed from the Delaunay cell decomposition (triangles
sharing a cocircular edge merged into one cell), read off by breadth-first
search from every starting edge and frame sign; the lexicographically least
reading is the code. Equal codes mean the surfaces differ by a relabeling
and a map with derivative +1 or -1.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .numberfield import QuadExt
from .surface import FlatSurface
from .triangulation import Triangulation, TriangulationError, triangulate
from .vec import Vec2, cross, dot

__all__ = [
    "INSIDE",
    "OUTSIDE",
    "COCIRCULAR",
    "incircle",
    "incircle_points",
    "flip_edge",
    "is_flippable",
    "flip_potential",
    "DelaunayResult",
    "delaunay_flip",
    "CanonicalCode",
    "canonical_form",
    "triangulation_code",
    "isometry_equivalent",
    "exhaustive_delaunay_states",
    "max_circumradius2",
    "verify_delaunay_along_ray",
]

INSIDE = "Inside"
OUTSIDE = "Outside"
COCIRCULAR = "Cocircular"


def _as_tri(obj) -> Triangulation:
    if isinstance(obj, Triangulation):
        return obj.copy()
    return triangulate(obj)


def incircle_points(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> str:
    """Position of d against the circle through the counterclockwise triangle abc."""
    if cross(b - a, c - a).sign() <= 0:
        raise TriangulationError("incircle needs a positively oriented triangle")
    rows = [p - d for p in (a, b, c)]
    m = [(r.x, r.y, r.norm2()) for r in rows]
    det = (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
    s = det.sign()
    return INSIDE if s > 0 else OUTSIDE if s < 0 else COCIRCULAR


def _quad(tri: Triangulation, t: int, i: int):
    """Corners A, B, C of t (edge i is AB) and the far apex D, all in frame t."""
    t2, j, s = tri.glue[(t, i)]
    cs = tri.corners(t)
    a, b, c = cs[i], cs[(i + 1) % 3], cs[(i + 2) % 3]
    d = a + tri.vecs[t2][(j + 1) % 3].signed(s)
    return a, b, c, d


def incircle(tri: Triangulation, t: int, i: int) -> str:
    t2, _, _ = tri.glue[(t, i)]
    if t2 == t:
        raise TriangulationError("edge bounds the same triangle on both sides")
    a, b, c, d = _quad(tri, t, i)
    return incircle_points(a, b, c, d)


def is_flippable(tri: Triangulation, t: int, i: int) -> bool:
    t2, _, _ = tri.glue[(t, i)]
    if t2 == t:
        return False
    a, b, c, d = _quad(tri, t, i)
    cd = d - c
    return cross(cd, a - c).sign() * cross(cd, b - c).sign() < 0


def flip_edge(tri: Triangulation, t: int, i: int) -> None:
    """Replace the diagonal (t, i) of its quadrilateral by the other diagonal, in place.

    Afterwards triangle t is (A, D, C) and the partner triangle is (D, B, C),
    both in the old frame of t; the new diagonal is edge 1 of t.
    """
    t2, j, s = tri.glue[(t, i)]
    if t2 == t or not is_flippable(tri, t, i):
        raise TriangulationError("edge is not flippable")
    a, b, c, d = _quad(tri, t, i)
    va, vb, vc = tri.vertex_of(t, i), tri.vertex_of(t, i + 1), tri.vertex_of(t, i + 2)
    vd = tri.vertex_of(t2, j + 2)
    moved = {
        (t2, (j + 1) % 3): (t, 0, s),
        (t, (i + 2) % 3): (t, 2, 1),
        (t2, (j + 2) % 3): (t2, 0, s),
        (t, (i + 1) % 3): (t2, 1, 1),
    }
    old = {e: tri.glue[e] for e in moved}
    for k in range(3):
        tri.glue.pop((t, k), None)
        tri.glue.pop((t2, k), None)
    tri.vecs[t] = (d - a, c - d, a - c)
    tri.vecs[t2] = (b - d, c - b, d - c)
    tri.corner_vertex[t] = (va, vd, vc)
    tri.corner_vertex[t2] = (vd, vb, vc)
    for e, (nt, ni, r1) in moved.items():
        pt, pj, sg = old[e]
        if (pt, pj) in moved:
            qt, qj, r2 = moved[(pt, pj)]
            tri.glue[(nt, ni)] = (qt, qj, r1 * sg * r2)
        else:
            tri.glue[(nt, ni)] = (pt, pj, r1 * sg)
            tri.glue[(pt, pj)] = (nt, ni, r1 * sg)
    tri.glue[(t, 1)] = (t2, 2, 1)
    tri.glue[(t2, 2)] = (t, 1, 1)


def flip_potential(tri: Triangulation) -> QuadExt:
    """Sum over triangles of (sum of squared sides) / (twice the area)."""
    total = QuadExt(0)
    for e0, e1, e2 in tri.vecs:
        total = total + (e0.norm2() + e1.norm2() + e2.norm2()) / cross(e0, e1)
    return total


def _normalized(v: Vec2) -> Vec2:
    s = v.y.sign()
    if s < 0 or (s == 0 and v.x.sign() < 0):
        return -v
    return v


def _key_less(u: Vec2, w: Vec2) -> bool:
    u, w = _normalized(u), _normalized(w)
    if u.x != w.x:
        return u.x < w.x
    return u.y < w.y


@dataclass
class DelaunayResult:
    triangulation: Triangulation
    flips: int
    tie_flips: int
    potentials: list[QuadExt] = field(default_factory=list)


def _find_inside(tri: Triangulation):
    for t, i in tri.edges():
        if tri.glue[(t, i)][0] != t and incircle(tri, t, i) == INSIDE:
            return t, i
    return None


def delaunay_flip(obj, tie_break: bool = True, max_flips: int = 100000) -> DelaunayResult:
    """Flip Inside edges until every edge is locally Delaunay.

    With ``tie_break`` the cocircular edges are then flipped while the new
    diagonal has the smaller sign-normalized holonomy, so symmetric ties end
    in a fixed triangulation.
    """
    tri = _as_tri(obj)
    potentials = [flip_potential(tri)]
    flips = 0
    while True:
        edge = _find_inside(tri)
        if edge is None:
            break
        flip_edge(tri, *edge)
        flips += 1
        potentials.append(flip_potential(tri))
        if not potentials[-1] < potentials[-2]:
            raise TriangulationError("flip potential failed to decrease")
        if flips > max_flips:
            raise TriangulationError("flip limit exceeded")
    ties = 0
    if tie_break:
        changed = True
        while changed:
            changed = False
            for t, i in tri.edges():
                if tri.glue[(t, i)][0] == t or incircle(tri, t, i) != COCIRCULAR:
                    continue
                if not is_flippable(tri, t, i):
                    continue
                a, b, c, d = _quad(tri, t, i)
                if _key_less(d - c, b - a):
                    flip_edge(tri, t, i)
                    ties += 1
                    changed = True
                    break
            if ties > max_flips:
                raise TriangulationError("tie-break flip limit exceeded")
        if _find_inside(tri) is not None:
            raise TriangulationError("tie-break flips produced a non-Delaunay edge")
    tri.check()
    return DelaunayResult(tri, flips, ties, potentials)


# -- canonical codes -------------------------------------------------------------------


def _cells(tri: Triangulation, merge: bool):
    internal = set()
    if merge:
        for t, i in tri.edges():
            t2, j, _ = tri.glue[(t, i)]
            if t2 != t and incircle(tri, t, i) == COCIRCULAR:
                internal.add((t, i))
                internal.add((t2, j))
    seen = {}
    walks = []
    for t in range(len(tri)):
        for i in range(3):
            if (t, i) in internal or (t, i) in seen:
                continue
            walk = []
            sign = 1
            ct, ci = t, i
            for _ in range(3 * len(tri) + 3):
                walk.append((ct, ci, sign))
                k = (ci + 1) % 3
                while (ct, k) in internal:
                    t2, j, s = tri.glue[(ct, k)]
                    sign *= s
                    ct, k = t2, (j + 1) % 3
                ci = k
                if (ct, ci) == (t, i):
                    break
            else:
                raise TriangulationError("cell boundary walk did not close")
            cid = len(walks)
            for pos, (wt, wi, ws) in enumerate(walk):
                seen[(wt, wi)] = (cid, pos, ws)
            walks.append(walk)
    return walks, seen


def _quad_tokens(x: QuadExt) -> tuple[int, int, int, int]:
    return (x.a.numerator, x.a.denominator, x.b.numerator, x.b.denominator)


def _edge_tokens(tri: Triangulation) -> dict:
    """Per (triangle, side, frame): the side vector's tokens and its start vertex data."""
    out = {}
    for t in range(len(tri)):
        for i in range(3):
            vert = tri.vertex_of(t, i)
            tail = (tri.vertex_angle[vert], 1 if tri.vertex_marked[vert] else 0)
            for rel in (1, -1):
                v = tri.vecs[t][i].signed(rel)
                out[(t, i, rel)] = _quad_tokens(v.x) + _quad_tokens(v.y) + tail
    return out


def _reading(tri: Triangulation, walks, where, start, sigma, tokens):
    cell0, pos0, ref0 = where[start]
    order = {cell0: 0}
    entry = {cell0: (pos0, sigma * ref0)}
    queue = deque([cell0])
    out: list[int] = []
    while queue:
        cell = queue.popleft()
        pos_e, frame = entry[cell]
        walk = walks[cell]
        n = len(walk)
        out.append(n)
        for k in range(n):
            t, i, ref = walk[(pos_e + k) % n]
            rel = frame * ref
            out.extend(tokens[(t, i, rel)])
            t2, j, s = tri.glue[(t, i)]
            cell2, pos2, ref2 = where[(t2, j)]
            frame2 = rel * s * ref2
            if cell2 not in order:
                order[cell2] = len(order)
                entry[cell2] = (pos2, frame2)
                queue.append(cell2)
            e_pos, e_frame = entry[cell2]
            out.append(order[cell2])
            out.append((pos2 - e_pos) % len(walks[cell2]))
            out.append(1 if frame2 == e_frame else 0)
    return tuple(out)


@dataclass(frozen=True)
class CanonicalCode:
    tokens: tuple[int, ...]
    cells: int

    @property
    def text(self) -> str:
        return f"c{self.cells}:" + ".".join(str(x) for x in self.tokens)

    def __str__(self):
        return self.text


def _code(tri: Triangulation, merge: bool) -> CanonicalCode:
    walks, where = _cells(tri, merge)
    tokens = _edge_tokens(tri)
    # a reading opens with its first cell's size and first side, so only minimal openers can win
    openers = {}
    for start, (cell, _, _) in where.items():
        for sigma in (1, -1):
            head = (len(walks[cell]),) + tokens[start + (sigma,)]
            openers.setdefault(head, []).append((start, sigma))
    best = None
    for start, sigma in openers[min(openers)]:
        r = _reading(tri, walks, where, start, sigma, tokens)
        if best is None or r < best:
            best = r
    return CanonicalCode(best, len(walks))


def triangulation_code(tri: Triangulation) -> CanonicalCode:
    """Code of the triangulation itself, every triangle its own cell."""
    return _code(tri, merge=False)


def canonical_form(obj) -> CanonicalCode:
    return _code(delaunay_flip(obj).triangulation, merge=True)


def isometry_equivalent(s1, s2) -> bool:
    return canonical_form(s1) == canonical_form(s2)


def max_circumradius2(tri: Triangulation) -> QuadExt:
    best = QuadExt(0)
    for e0, e1, e2 in tri.vecs:
        c = cross(e0, e1)
        r2 = e0.norm2() * e1.norm2() * e2.norm2() / (4 * c * c)
        if r2 > best:
            best = r2
    return best


def exhaustive_delaunay_states(obj, bound2, max_states: int = 20000):
    """Every triangulation reachable by flips with all squared edge lengths <= bound2.

    States are taken up to relabeling (keyed by :func:`triangulation_code`).
    Returns (all state count, locally Delaunay states as triangulations).
    """
    start = _as_tri(obj)
    bound2 = QuadExt(0) + bound2

    def fits(tri):
        return all(v.norm2() <= bound2 for tv in tri.vecs for v in tv)

    if not fits(start):
        raise ValueError("starting triangulation has an edge beyond the bound")
    seen = {triangulation_code(start)}
    queue = deque([start])
    delaunay_states = []
    while queue:
        tri = queue.popleft()
        if _find_inside(tri) is None:
            delaunay_states.append(tri)
        for t, i in tri.edges():
            if not is_flippable(tri, t, i):
                continue
            nxt = tri.copy()
            flip_edge(nxt, t, i)
            if not fits(nxt):
                continue
            key = triangulation_code(nxt)
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > max_states:
                raise RuntimeError("flip graph exploration exceeded its state budget")
            queue.append(nxt)
    return len(seen), delaunay_states


# -- along a ray ----------------------------------------------------------------------


@dataclass(frozen=True)
class RayDelaunayRow:
    lam: QuadExt
    critical_edges: int
    missing: tuple
    max_circumradius: float

    @property
    def ok(self) -> bool:
        return not self.missing

    @property
    def radius_over_lambda(self) -> float:
        return self.max_circumradius / float(self.lam)


def _vertical_edges(tri: Triangulation):
    out = {}
    for t, i in tri.edges():
        v = tri.vecs[t][i]
        if not v.x:
            key = (*sorted((tri.vertex_of(t, i), tri.vertex_of(t, i + 1))), abs(v.y))
            out[key] = out.get(key, 0) + 1
    return out


def verify_delaunay_along_ray(ray, lams) -> list[RayDelaunayRow]:
    """At each lambda, check every vertical saddle connection is a Delaunay edge.

    Also records the largest circumradius of the Delaunay triangulation, whose
    ratio to lambda is the monitored proxy for sublinear thick-part growth.
    """
    from .flow import analysis_at, flow_matrix

    if ray.status not in ("Strebel", "MixedStrebel"):
        raise ValueError("ray must be Strebel or mixed Strebel")
    rows = []
    for lam in lams:
        lam = QuadExt(0) + lam
        analysis = analysis_at(ray, lam)
        flowed = ray.triangulation.transformed(flow_matrix(lam))
        tri = delaunay_flip(flowed).triangulation
        have = _vertical_edges(tri)
        want = {}
        for conn in analysis.critical_graph.connections:
            key = (*sorted((conn.start, conn.end)), abs(conn.holonomy.y))
            want[key] = want.get(key, 0) + 1
        missing = tuple(k for k, n in want.items() if have.get(k, 0) < n)
        radius = math.sqrt(float(max_circumradius2(tri)))
        rows.append(RayDelaunayRow(lam, len(analysis.critical_graph.connections), missing, radius))
    return rows
