"""Vertical separatrices, saddle connections and the vertical cylinder decomposition."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .numberfield import QuadExt, as_quad
from .surface import FlatSurface
from .triangulation import Piece, Triangulation, TriangulationError, march, triangulate
from .vec import Vec2, cross, dot

__all__ = [
    "Prong",
    "SaddleConnection",
    "Terminated",
    "Exceeded",
    "BoundarySegment",
    "Cylinder",
    "CriticalGraph",
    "DirectionAnalysis",
    "TopologicalType",
    "vertical_prongs",
    "trace_separatrix",
    "enumerate_saddle_connections",
    "vertical_decomposition",
    "multicurve_type",
    "STREBEL",
    "MIXED",
    "NO_CLOSURE",
]

STREBEL = "Strebel"
MIXED = "MixedStrebel"
NO_CLOSURE = "NoClosureUpToBound"

UP = Vec2(0, 1)
RIGHT = Vec2(1, 0)


@dataclass(frozen=True)
class Prong:
    """A direction leaving the vertex at corner ``c`` of triangle ``t``."""

    t: int
    c: int
    u: Vec2

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.t, self.c, self.u.x.sign(), self.u.y.sign())


@dataclass
class SaddleConnection:
    start: int
    end: int
    holonomy: Vec2
    witness: tuple = ()
    start_prong: tuple | None = None
    end_prong: tuple | None = None

    @property
    def length2(self) -> QuadExt:
        return self.holonomy.norm2()


@dataclass
class Terminated:
    connection: SaddleConnection
    end_corner: tuple[int, int]


@dataclass
class Exceeded:
    prong: Prong
    bound: QuadExt


def _as_triangulation(obj) -> Triangulation:
    if isinstance(obj, Triangulation):
        return obj
    return triangulate(obj)


def vertical_prongs(tri: Triangulation) -> list[Prong]:
    """Both vertical directions at every vertex, one entry per prong."""
    return [Prong(t, c, u) for t, c, u in tri.directions_at_vertices(UP)]


def _trace(tri: Triangulation, prong: Prong, bound: QuadExt):
    corner = tri.corners(prong.t)[prong.c]
    hit = march(tri, prong.t, corner, prong.u, bound)
    if hit.kind != "vertex":
        return Exceeded(prong, bound), hit
    t_end, c_end, back = tri.locate(hit.t, hit.corner, -hit.u, ccw=True)
    end_prong = Prong(t_end, c_end, back)
    conn = SaddleConnection(
        start=tri.vertex_of(prong.t, prong.c),
        end=tri.vertex_of(hit.t, hit.corner),
        holonomy=prong.u.scale(hit.length),
        witness=tuple(hit.pieces),
        start_prong=prong.key,
        end_prong=end_prong.key,
    )
    return Terminated(conn, (hit.t, hit.corner)), hit


def trace_separatrix(surface, prong: Prong | int, bound) -> Terminated | Exceeded:
    """Follow one vertical prong until it reaches a vertex or runs past ``bound``.

    ``prong`` is either a :class:`Prong` of the surface's triangulation or an
    index into :func:`vertical_prongs`.
    """
    tri = _as_triangulation(surface)
    if isinstance(prong, int):
        prong = vertical_prongs(tri)[prong]
    bound = as_quad(bound)
    if bound.sign() <= 0:
        raise ValueError("length bound must be positive")
    return _trace(tri, prong, bound)[0]


# -- saddle connection enumeration ----------------------------------------------


def _clip_to_wedge(a: Vec2, b: Vec2, right: Vec2, left: Vec2):
    """Part of segment ab inside the closed wedge between right and left."""
    lo, hi = QuadExt(0), QuadExt(1)
    ab = b - a
    for f0, f1 in ((cross(right, a), cross(right, ab)), (cross(a, left), cross(ab, left))):
        # need f0 + tau * f1 >= 0
        if not f1:
            if f0.sign() < 0:
                return None
            continue
        root = -f0 / f1
        if f1.sign() > 0:
            lo = max(lo, root)
        else:
            hi = min(hi, root)
    if lo > hi:
        return None
    return a + ab.scale(lo), a + ab.scale(hi)


def _segment_dist2(a: Vec2, b: Vec2) -> QuadExt:
    ab = b - a
    n2 = ab.norm2()
    if not n2:
        return a.norm2()
    tau = -dot(a, ab) / n2
    if tau.sign() <= 0:
        return a.norm2()
    if tau >= 1:
        return b.norm2()
    c = cross(a, b)
    return c * c / n2


def enumerate_saddle_connections(surface, bound=None, bound2=None) -> list[SaddleConnection]:
    """Every saddle connection of length at most the bound, once per direction.

    Each connection is reported from its starting vertex with holonomy in the
    frame of the triangle it leaves; the reverse connection is reported too.
    Give either ``bound`` (a length) or ``bound2`` (its square).
    """
    tri = _as_triangulation(surface)
    if bound2 is None:
        if bound is None:
            raise ValueError("give a length bound")
        b = as_quad(bound)
        bound2 = b * b
    bound2 = as_quad(bound2)
    out: list[SaddleConnection] = []
    for t in range(len(tri)):
        for c in range(3):
            start = tri.vertex_of(t, c)
            e = tri.vecs[t][c]
            if e.norm2() <= bound2:
                out.append(SaddleConnection(start, tri.vertex_of(t, c + 1), e, ((t, c),)))
            a = e
            bvec = -tri.vecs[t][(c + 2) % 3]
            stack = [(t, (c + 1) % 3, a, bvec, 1, a, bvec, ((t, c),))]
            while stack:
                tt, k, pa, pb, sign, right, left, path = stack.pop()
                clipped = _clip_to_wedge(pa, pb, right, left)
                if clipped is None or _segment_dist2(*clipped) > bound2:
                    continue
                t2, j, s = tri.glue[(tt, k)]
                sign2 = sign * s
                x = pa + tri.vecs[t2][(j + 1) % 3].signed(sign2)
                inside_r = cross(right, x).sign()
                inside_l = cross(x, left).sign()
                path2 = path + ((t2, j),)
                if inside_r > 0 and inside_l > 0:
                    if x.norm2() <= bound2:
                        out.append(SaddleConnection(start, tri.vertex_of(t2, j + 2), x, path2))
                    stack.append((t2, (j + 1) % 3, pa, x, sign2, right, x, path2))
                    stack.append((t2, (j + 2) % 3, x, pb, sign2, x, left, path2))
                elif inside_r <= 0:
                    stack.append((t2, (j + 2) % 3, x, pb, sign2, right, left, path2))
                else:
                    stack.append((t2, (j + 1) % 3, pa, x, sign2, right, left, path2))
    return out


# -- cylinder decomposition ------------------------------------------------------------


@dataclass(frozen=True)
class BoundarySegment:
    """A vertical saddle connection on one side of a cylinder.

    ``height`` is where its lower end sits along the core, ``forward`` says
    whether the connection runs from its start to its end going up the core.
    """

    height: QuadExt
    connection: int
    forward: bool
    vertex: int


@dataclass
class Cylinder:
    index: int
    circumference: QuadExt
    height: QuadExt
    left: tuple[BoundarySegment, ...]
    right: tuple[BoundarySegment, ...]
    core_key: tuple
    core_word: tuple[int, ...]
    core_pieces: tuple[Piece, ...] = ()
    left_component: int = -1
    right_component: int = -1

    @property
    def modulus(self) -> QuadExt:
        return self.height / self.circumference

    @property
    def area(self) -> QuadExt:
        return self.circumference * self.height

    def word_text(self) -> str:
        return ".".join(f"e{k}" for k in self.core_word)


@dataclass
class CriticalGraph:
    connections: list[SaddleConnection]
    vertices: list[int]
    component_of_vertex: dict[int, int] = field(default_factory=dict)

    def lengths(self) -> list[QuadExt]:
        out = []
        for conn in self.connections:
            out.append(abs(conn.holonomy.y))
        return out


@dataclass
class DirectionAnalysis:
    status: str
    bound: QuadExt
    cylinders: list[Cylinder]
    critical_graph: CriticalGraph
    uncovered_area: QuadExt
    total_area: QuadExt
    triangulation: Triangulation
    exceeded: list[Prong] = field(default_factory=list)

    @property
    def moduli(self) -> list[QuadExt]:
        return [c.modulus for c in self.cylinders]

    def status_text(self) -> str:
        if self.status == STREBEL:
            return "Strebel"
        if self.status == MIXED:
            return "Mixed"
        return f"NoClosure {self.bound}"


def _point_on_piece(piece: Piece, x: Vec2) -> bool:
    ab = piece.q - piece.p
    w = x - piece.p
    if cross(ab, w):
        return False
    t = dot(w, ab)
    return t.sign() >= 0 and t <= ab.norm2()


def _edge_crossing(tri: Triangulation, t: int, x: Vec2):
    corners = tri.corners(t)
    for k in range(3):
        e = tri.vecs[t][k]
        w = x - corners[k]
        if not cross(e, w):
            tau = dot(w, e) / e.norm2()
            if tau.sign() > 0 and tau < 1:
                rep = tri.edge_id(t, k)
                if rep != (t, k):
                    tau = 1 - tau
                return rep, tau
    return None


def _sort_token(x: QuadExt) -> tuple[Fraction, Fraction]:
    return (x.a, x.b)


def _core_key(tri: Triangulation, pieces) -> tuple[tuple, tuple[int, ...]]:
    labels = {e: i for i, e in enumerate(tri.edges())}
    crossings = []
    for pc in pieces:
        if pc.p == pc.q:
            continue
        hit = _edge_crossing(tri, pc.t, pc.q)
        if hit is not None:
            crossings.append(hit)
    key = tuple(sorted((labels[e], _sort_token(tau)) for e, tau in crossings))
    word = [labels[e] for e, _ in crossings]
    if word:
        rotations = [tuple(word[i:] + word[:i]) for i in range(len(word))]
        word = list(min(rotations))
    return key, tuple(word)


def _gamma_stopper(gamma_pieces: dict[int, list[tuple[Vec2, Vec2]]]):
    def stop(t, p, q, u):
        best = None
        seg = dot(q - p, u) / dot(u, u)
        for a, b in gamma_pieces.get(t, ()):
            ab = b - a
            den = cross(ab, u)
            if not den:
                continue
            s = cross(ab, a - p) / den
            if s.sign() <= 0 or s > seg:
                continue
            x = p + u.scale(s)
            tau = dot(x - a, ab)
            if tau.sign() < 0 or tau > ab.norm2():
                continue
            if best is None or s < best:
                best = s
        return None if best is None else (best, "gamma")

    return stop


def vertical_decomposition(surface, bound, triangulation: Triangulation | None = None) -> DirectionAnalysis:
    """Trace every vertical prong and split the surface into vertical cylinders.

    Cylinders are found by marching horizontally from each vertex into the
    neighbouring strip, stopping at the critical graph; the leaf through the
    midpoint of that march is the core, and its return length is the
    circumference.
    """
    tri = triangulation if triangulation is not None else _as_triangulation(surface)
    L = as_quad(bound)
    if L.sign() <= 0:
        raise ValueError("length bound must be positive")

    connections: list[SaddleConnection] = []
    prong_conn: dict[tuple, tuple[int, bool]] = {}
    exceeded: list[Prong] = []
    gamma_pieces: dict[int, list[tuple[Vec2, Vec2]]] = {}
    for prong in vertical_prongs(tri):
        if prong.key in prong_conn:
            continue
        result, hit = _trace(tri, prong, L)
        if isinstance(result, Exceeded):
            exceeded.append(prong)
            continue
        idx = len(connections)
        connections.append(result.connection)
        prong_conn[prong.key] = (idx, True)
        prong_conn[result.connection.end_prong] = (idx, False)
        for pc in hit.pieces:
            gamma_pieces.setdefault(pc.t, []).append((pc.p, pc.q))

    gamma_length = QuadExt(0)
    shortest = None
    for conn in connections:
        ell = abs(conn.holonomy.y)
        gamma_length = gamma_length + ell
        if shortest is None or ell < shortest:
            shortest = ell

    cylinders_raw: list[dict] = []
    if connections:
        width_bound = tri.area / shortest
        stopper = _gamma_stopper(gamma_pieces)
        for t0, c0, h0 in tri.directions_at_vertices(RIGHT):
            start = tri.corners(t0)[c0]
            hit = march(tri, t0, start, h0, width_bound, stopper=stopper)
            if hit.kind not in ("stop", "vertex"):
                continue
            width = hit.length
            mid = march(tri, t0, start, h0, width / 2)
            tm, pm, hm, sm = mid.t, mid.point, mid.u, mid.sign
            found = None
            for cyl in cylinders_raw:
                for pc in cyl["pieces"]:
                    if pc.t == tm and _point_on_piece(pc, pm):
                        found = (cyl, pc)
                        break
                if found:
                    break
            if found is None:
                up_local = UP.signed(sm)
                leaf = march(tri, tm, pm, up_local, gamma_length, close_at=(tm, pm, up_local))
                if leaf.kind != "closed":
                    continue
                cyl = {
                    "a": leaf.length,
                    "b": width,
                    "pieces": leaf.pieces,
                    "sides": {1: [], -1: []},
                }
                cylinders_raw.append(cyl)
                found = (cyl, leaf.pieces[0])
            cyl, pc = found
            if cyl["b"] != width:
                raise TriangulationError("horizontal widths disagree inside one cylinder")
            height = pc.s0 + dot(pm - pc.p, pc.u)
            height = _mod(height, cyl["a"])
            side = cross(hm, pc.u).sign()
            up_vertex_frame = pc.u.signed(sm)
            ccw = cross(h0, up_vertex_frame).sign() > 0
            tb, cb, ub = tri.locate(t0, c0, up_vertex_frame, ccw=ccw)
            bkey = (tb, cb, ub.x.sign(), ub.y.sign())
            if bkey not in prong_conn:
                raise TriangulationError("cylinder boundary prong was not a saddle connection")
            conn_idx, is_start = prong_conn[bkey]
            cyl["sides"][side].append(BoundarySegment(height, conn_idx, is_start, tri.vertex_of(t0, c0)))

    cylinders: list[Cylinder] = []
    for raw in cylinders_raw:
        key, word = _core_key(tri, raw["pieces"])
        sides = {}
        for sd in (1, -1):
            segs = sorted(raw["sides"][sd], key=lambda s: _OrderedQuad(s.height))
            _check_side(segs, connections, raw["a"])
            sides[sd] = tuple(segs)
        cylinders.append(
            Cylinder(-1, raw["a"], raw["b"], sides[1], sides[-1], key, word, tuple(raw["pieces"]))
        )
    cylinders.sort(key=lambda c: c.core_key)
    for i, cyl in enumerate(cylinders):
        cyl.index = i

    covered = QuadExt(0)
    for cyl in cylinders:
        covered = covered + cyl.area
    uncovered = tri.area - covered

    vertices = sorted({v for conn in connections for v in (conn.start, conn.end)})
    graph = CriticalGraph(connections, vertices)
    _assign_components(tri, graph, cylinders, exceeded)

    if not exceeded:
        status = STREBEL
        if uncovered:
            raise TriangulationError("all separatrices closed but cylinders do not fill the surface")
    elif cylinders:
        status = MIXED
        if uncovered.sign() <= 0:
            raise TriangulationError("mixed decomposition without uncovered area")
    else:
        status = NO_CLOSURE
    return DirectionAnalysis(status, L, cylinders, graph, uncovered, tri.area, tri, exceeded)


class _OrderedQuad:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v < other.v


def _mod(x: QuadExt, a: QuadExt) -> QuadExt:
    while x.sign() < 0:
        x = x + a
    while x >= a:
        x = x - a
    return x


def _check_side(segs, connections, a):
    total = QuadExt(0)
    for k, seg in enumerate(segs):
        ell = abs(connections[seg.connection].holonomy.y)
        total = total + ell
        nxt = segs[(k + 1) % len(segs)].height
        gap = _mod(nxt - seg.height, a) if len(segs) > 1 else a
        if gap != ell:
            raise TriangulationError("cylinder boundary heights do not match saddle connection lengths")
    if total != a:
        raise TriangulationError("cylinder boundary length differs from circumference")


def _assign_components(tri, graph: CriticalGraph, cylinders, exceeded) -> None:
    parent = {v: v for v in range(tri.num_vertices())}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for conn in graph.connections:
        union(conn.start, conn.end)
    if exceeded:
        # vertices reached through a minimal region lie in one complementary piece
        _link_minimal_regions(tri, graph, exceeded, union)
    roots = sorted({find(v) for v in range(tri.num_vertices())})
    label = {r: i for i, r in enumerate(roots)}
    graph.component_of_vertex = {v: label[find(v)] for v in range(tri.num_vertices())}
    for cyl in cylinders:
        cyl.left_component = graph.component_of_vertex[cyl.left[0].vertex]
        cyl.right_component = graph.component_of_vertex[cyl.right[0].vertex]


def _link_minimal_regions(tri, graph, exceeded, union) -> None:
    gamma = {}
    for conn in graph.connections:
        for pc in conn.witness:
            gamma.setdefault(pc.t, []).append((pc.p, pc.q))
    stopper = _gamma_stopper(gamma)
    bound = tri.area
    for prong in exceeded:
        v = tri.vertex_of(prong.t, prong.c)
        for w in (Vec2(prong.u.y, -prong.u.x), Vec2(-prong.u.y, prong.u.x)):
            t, c, u = tri.locate(prong.t, prong.c, w, ccw=cross(prong.u, w).sign() > 0)
            hit = march(tri, t, tri.corners(t)[c], u, bound, stopper=stopper)
            if hit.kind == "vertex":
                union(v, tri.vertex_of(hit.t, hit.corner))
            elif hit.kind == "stop":
                for conn in graph.connections:
                    for pc in conn.witness:
                        if pc.t == hit.t and _point_on_piece(pc, hit.point):
                            union(v, conn.start)


# -- topology of the cylinder core system ---------------------------------------------


@dataclass(frozen=True)
class TopologicalType:
    """Complement of a multicurve up to homeomorphism.

    ``components`` lists (genus, boundary circles, marked points) per
    complementary piece; ``curves`` lists, per curve, the two pieces on its
    sides. Equality of :attr:`key` is equality of types.
    """

    components: tuple[tuple[int, int, int], ...]
    curves: tuple[tuple[int, int], ...]

    @property
    def key(self) -> tuple:
        n = len(self.components)
        best = None
        for perm in itertools.permutations(range(n)):
            inv = {old: new for new, old in enumerate(perm)}
            comps = tuple(self.components[old] for old in perm)
            curves = tuple(sorted(tuple(sorted((inv[a], inv[b]))) for a, b in self.curves))
            cand = (comps, curves)
            if best is None or cand < best:
                best = cand
        return best

    def isomorphic(self, other: "TopologicalType") -> bool:
        return self.key == other.key

    @property
    def genus(self) -> int:
        """Genus of the whole surface."""
        n_comp = len(self.components)
        loops = len(self.curves) - n_comp + 1
        return sum(g for g, _, _ in self.components) + loops

    @property
    def punctures(self) -> int:
        return sum(m for _, _, m in self.components)

    def describe(self) -> str:
        comps = " ".join(f"(g={g},b={b},n={m})" for g, b, m in self.components)
        curves = " ".join(f"{a}-{b}" for a, b in self.curves)
        return f"components {comps} curves {curves}"


def multicurve_type(analysis: DirectionAnalysis, surface: FlatSurface | None = None) -> TopologicalType:
    """Homeomorphism type of the complement of the cylinder cores."""
    if analysis.status == NO_CLOSURE:
        raise ValueError("no cylinder system: the direction did not close up to the bound")
    if not analysis.cylinders:
        raise ValueError("empty cylinder list")
    tri = analysis.triangulation
    comp = analysis.critical_graph.component_of_vertex
    n = max(comp.values()) + 1
    verts = [0] * n
    marked = [0] * n
    for v in range(tri.num_vertices()):
        verts[comp[v]] += 1
        # simple poles count as punctures alongside marked points
        if tri.vertex_marked[v] or tri.vertex_angle[v] == 1:
            marked[comp[v]] += 1
    edges = [0] * n
    for conn in analysis.critical_graph.connections:
        edges[comp[conn.start]] += 1
    boundaries = [0] * n
    for cyl in analysis.cylinders:
        boundaries[cyl.left_component] += 1
        boundaries[cyl.right_component] += 1
    minimal = {comp[tri.vertex_of(p.t, p.c)] for p in analysis.exceeded}
    chi = [verts[i] - edges[i] for i in range(n)]
    if minimal:
        if len(minimal) > 1:
            raise ValueError("several complementary pieces contain minimal regions; their topology is not resolved")
        (m,) = minimal
        euler_total = tri.num_vertices() - len(tri.edges()) + len(tri)
        chi[m] = euler_total - sum(chi[i] for i in range(n) if i != m)
    comps = []
    for i in range(n):
        twice_genus = 2 - chi[i] - boundaries[i]
        if twice_genus < 0 or twice_genus % 2:
            raise ValueError("inconsistent Euler characteristic for a complementary piece")
        comps.append((twice_genus // 2, boundaries[i], marked[i]))
    curves = tuple((c.left_component, c.right_component) for c in analysis.cylinders)
    return TopologicalType(tuple(comps), curves)
