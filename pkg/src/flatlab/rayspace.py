"""Iterated ray spaces of toy sup-metric products and their geodesic combinatorics.

Factors are half-lines, closed intervals, finite metric trees (possibly with
infinite legs) and bounded cones of angle less than 2 pi. All lengths are
exact fractions except cone distances, which need a cosine.

A stratum is named by the set of (factor, end) choices made so far: taking
Asy of factor j replaces it by one of its ends, which is a point and drops
out of the product. Strata reached by taking the same ends in different
orders are identified, which is where the closed square comes from.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

__all__ = [
    "HalfLine",
    "Interval",
    "MetricTree",
    "Cone",
    "ProductSpace",
    "Stratum",
    "StratifiedSpace",
    "AsyClass",
    "asy",
    "build_iterated",
    "boundary_complex",
    "BoundaryComplex",
    "diagonal_pair",
    "Geodesic",
    "Unique",
    "MultipleWitness",
    "FiniteMultiple",
    "geodesic_multiplicity_witness",
    "witness_is_valid",
    "ScanRow",
    "singular_locus_scan",
    "convergence_certificate",
    "parse_product",
    "dm_stratified",
]

INF = math.inf


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, float) else Fraction(x)


# -- factors --------------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfLine:
    kind = "HalfLine"

    def contains(self, x) -> bool:
        return isinstance(x, (int, Fraction)) and x >= 0

    def distance(self, x, y) -> Fraction:
        return abs(_frac(x) - _frac(y))

    def along(self, x, y, s) -> Fraction:
        x, y = _frac(x), _frac(y)
        return x + s if y >= x else x - s

    def ends(self) -> tuple[str, ...]:
        return ("+inf",)

    def excursion(self, x, room):
        """A point at distance ``room`` from x (the factor is never a point)."""
        return _frac(x) + room

    def branch_points(self) -> tuple:
        return ()

    def describe(self) -> str:
        return "HalfLine"


@dataclass(frozen=True)
class Interval:
    length: Fraction
    kind = "Interval"

    def __post_init__(self):
        if _frac(self.length) <= 0:
            raise ValueError("interval length must be positive")

    def contains(self, x) -> bool:
        return 0 <= _frac(x) <= _frac(self.length)

    def distance(self, x, y) -> Fraction:
        return abs(_frac(x) - _frac(y))

    def along(self, x, y, s) -> Fraction:
        x, y = _frac(x), _frac(y)
        return x + s if y >= x else x - s

    def ends(self) -> tuple[str, ...]:
        return ()

    def excursion(self, x, room):
        x, length = _frac(x), _frac(self.length)
        return x + room if x + room <= length else x - room

    def branch_points(self) -> tuple:
        return ()

    def describe(self) -> str:
        return f"Interval({self.length})"


TreePoint = Union[tuple[str, str], tuple[str, int, Fraction]]


@dataclass(frozen=True)
class MetricTree:
    """Edges (u, v, length); ``legs`` are infinite rays attached at a vertex.

    Points are ("v", name) or ("e", edge index, offset from u), offsets
    strictly inside the edge; leg points are ("l", leg index, distance).
    """

    edges: tuple[tuple[str, str, Fraction], ...]
    legs: tuple[str, ...] = ()
    kind = "MetricTree"

    def __post_init__(self):
        names = self.vertices()
        if not names:
            raise ValueError("a tree needs at least one vertex")
        for u, v, ell in self.edges:
            if _frac(ell) <= 0:
                raise ValueError(f"edge {u}-{v} has nonpositive length")
        if len(self.edges) != len(names) - 1:
            raise ValueError("edge count does not match a tree on these vertices")
        if len(self._dist_from(next(iter(sorted(names))))) != len(names):
            raise ValueError("tree is disconnected")

    def vertices(self) -> set[str]:
        out = set(self.legs)
        for u, v, _ in self.edges:
            out.update((u, v))
        return out

    def degree(self, name: str) -> int:
        return sum((u == name) + (v == name) for u, v, _ in self.edges) + self.legs.count(name)

    def _adj(self):
        adj: dict[str, list[tuple[str, Fraction]]] = {}
        for u, v, ell in self.edges:
            adj.setdefault(u, []).append((v, _frac(ell)))
            adj.setdefault(v, []).append((u, _frac(ell)))
        return adj

    def _dist_from(self, root: str) -> dict[str, tuple[Fraction, list[str]]]:
        adj = self._adj()
        out = {root: (Fraction(0), [root])}
        stack = [root]
        while stack:
            x = stack.pop()
            for y, ell in adj.get(x, []):
                if y not in out:
                    out[y] = (out[x][0] + ell, out[x][1] + [y])
                    stack.append(y)
        return out

    def _anchors(self, p) -> list[tuple[str, Fraction]]:
        """Vertices bounding the edge or leg carrying p, with distances to them."""
        if p[0] == "v":
            return [(p[1], Fraction(0))]
        if p[0] == "e":
            u, v, ell = self.edges[p[1]]
            return [(u, _frac(p[2])), (v, _frac(ell) - _frac(p[2]))]
        return [(self.legs[p[1]], _frac(p[2]))]

    def contains(self, p) -> bool:
        if p[0] == "v":
            return p[1] in self.vertices()
        if p[0] == "e":
            return 0 <= p[1] < len(self.edges) and 0 < _frac(p[2]) < _frac(self.edges[p[1]][2])
        return p[0] == "l" and 0 <= p[1] < len(self.legs) and _frac(p[2]) > 0

    def normalize(self, p):
        if p[0] == "e" and p[2] == 0:
            return ("v", self.edges[p[1]][0])
        if p[0] == "e" and p[2] == self.edges[p[1]][2]:
            return ("v", self.edges[p[1]][1])
        if p[0] == "l" and p[2] == 0:
            return ("v", self.legs[p[1]])
        return p

    def _same_carrier(self, p, q) -> bool:
        return p[0] == q[0] and p[0] in ("e", "l") and p[1] == q[1]

    def distance(self, p, q) -> Fraction:
        return self._route(p, q)[0]

    def _route(self, p, q):
        """(length, waypoints) of the unique geodesic, waypoints being vertex names."""
        p, q = self.normalize(p), self.normalize(q)
        if p == q:
            return Fraction(0), []
        if self._same_carrier(p, q):
            return abs(_frac(p[2]) - _frac(q[2])), []
        best = None
        for a, da in self._anchors(p):
            table = self._dist_from(a)
            for b, db in self._anchors(q):
                mid, path = table[b]
                cand = da + mid + db
                if best is None or cand < best[0]:
                    best = (cand, path)
        return best

    def along(self, p, q, s):
        """The point at distance s from p on the geodesic to q."""
        s = _frac(s)
        p, q = self.normalize(p), self.normalize(q)
        total, path = self._route(p, q)
        if s <= 0:
            return p
        if s >= total:
            return q
        if self._same_carrier(p, q):
            sign = 1 if q[2] > p[2] else -1
            return self.normalize((p[0], p[1], _frac(p[2]) + sign * s))
        # walk p -> path[0] -> ... -> path[-1] -> q
        pts = [p] + [("v", name) for name in path] + [q]
        for a, b in zip(pts, pts[1:]):
            step = self._local_distance(a, b)
            if s <= step:
                return self._local_point(a, b, s)
            s -= step
        return q

    def _local_distance(self, a, b) -> Fraction:
        if a == b:
            return Fraction(0)
        if a[0] == "v" and b[0] == "v":
            for u, v, ell in self.edges:
                if {u, v} == {a[1], b[1]}:
                    return _frac(ell)
            raise ValueError("waypoints are not adjacent")
        if a[0] == "v":
            a, b = b, a
        return dict(self._anchors(a))[b[1]]

    def _local_point(self, a, b, s):
        """Point at distance s from a towards b, where a and b share an edge or leg."""
        if s == 0:
            return a
        if a[0] == "v" and b[0] == "v":
            for k, (u, v, _) in enumerate(self.edges):
                if (u, v) == (a[1], b[1]):
                    return self.normalize(("e", k, s))
                if (v, u) == (a[1], b[1]):
                    return self.normalize(("e", k, _frac(self.edges[k][2]) - s))
        if a[0] == "v":
            # moving from a vertex into the carrier of b
            if b[0] == "l":
                return self.normalize(("l", b[1], s))
            u, _, ell = self.edges[b[1]]
            return self.normalize(("e", b[1], s if u == a[1] else _frac(ell) - s))
        # moving from inside a carrier to its vertex b
        if a[0] == "l":
            return self.normalize(("l", a[1], _frac(a[2]) - s))
        u, _, _ = self.edges[a[1]]
        return self.normalize(("e", a[1], _frac(a[2]) - s if u == b[1] else _frac(a[2]) + s))

    def ends(self) -> tuple[str, ...]:
        return tuple(f"leg{k}@{v}" for k, v in enumerate(self.legs))

    def excursion(self, p, room):
        """A point at distance ``room`` from p, if the tree is long enough somewhere."""
        p = self.normalize(p)
        room = _frac(room)
        for a, da in self._anchors(p):
            # try heading into each edge or leg at the anchor
            for k in range(len(self.legs)):
                cand = self.along(p, ("l", k, da + room + 1), room)
                if self.distance(p, cand) == room:
                    return cand
            for k, (u, v, ell) in enumerate(self.edges):
                for target in (("v", u), ("v", v)):
                    cand = self.along(p, target, room)
                    if self.distance(p, cand) == room:
                        return cand
        raise ValueError("tree has no room for an excursion of this length")

    def branch_points(self) -> tuple:
        return tuple(("v", name) for name in sorted(self.vertices()) if self.degree(name) >= 3)

    def describe(self) -> str:
        return f"MetricTree(edges={len(self.edges)},legs={len(self.legs)})"


@dataclass(frozen=True)
class Cone:
    """Euclidean cone of angle ``angle`` * pi (0 < angle < 2) truncated at ``radius``.

    Points are (r, theta) with theta a fraction of pi in [0, angle).
    """

    angle: Fraction
    radius: Fraction
    kind = "Cone"

    def __post_init__(self):
        if not 0 < _frac(self.angle) < 2:
            raise ValueError("cone angle must lie strictly between 0 and 2 pi")

    def contains(self, p) -> bool:
        r, th = p
        return 0 <= _frac(r) <= _frac(self.radius) and 0 <= _frac(th) < _frac(self.angle)

    def _gap(self, p, q) -> Fraction:
        d = abs(_frac(p[1]) - _frac(q[1]))
        return min(d, _frac(self.angle) - d)

    def distance(self, p, q) -> float:
        r1, r2 = float(p[0]), float(q[0])
        gap = self._gap(p, q)
        if r1 == 0 or r2 == 0 or gap >= 1:
            return r1 + r2
        return math.sqrt(max(r1 * r1 + r2 * r2 - 2 * r1 * r2 * math.cos(math.pi * gap), 0.0))

    def geodesic_count(self, p, q) -> int:
        """Exact count: two when both ways round the apex are equal and shorter than pi."""
        if p == q or _frac(p[0]) == 0 or _frac(q[0]) == 0:
            return 1
        d = abs(_frac(p[1]) - _frac(q[1]))
        other = _frac(self.angle) - d
        if d == other and d < 1:
            return 2
        return 1

    def ends(self) -> tuple[str, ...]:
        return ()

    def branch_points(self) -> tuple:
        return ((Fraction(0), Fraction(0)),)

    def is_apex(self, p) -> bool:
        return _frac(p[0]) == 0

    def describe(self) -> str:
        return f"Cone(angle={self.angle}pi,radius={self.radius})"


Factor = Union[HalfLine, Interval, MetricTree, Cone]


@dataclass(frozen=True)
class ProductSpace:
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a product needs at least one factor")

    def check_point(self, p) -> None:
        if len(p) != len(self.factors):
            raise ValueError(f"point has {len(p)} coordinates, space has {len(self.factors)} factors")
        for f, x in zip(self.factors, p):
            if not f.contains(x):
                raise ValueError(f"coordinate {x!r} is not in {f.describe()}")

    def factor_distances(self, p, q) -> list:
        self.check_point(p)
        self.check_point(q)
        return [f.distance(x, y) for f, x, y in zip(self.factors, p, q)]

    def distance(self, p, q):
        return max(self.factor_distances(p, q))

    def describe(self) -> str:
        return "*".join(f.describe() for f in self.factors)


# -- asymptote classes and strata -----------------------------------------------------------


@dataclass(frozen=True)
class AsyClass:
    factor: int
    end: str


def asy(factor, index: int = 0) -> tuple[list[AsyClass], dict]:
    """Asymptote classes of rays in one factor, with their limiting distances.

    Rays to distinct ends of a tree drift apart linearly, so distinct
    classes sit at infinite distance; a class is at distance 0 from itself.
    """
    classes = [AsyClass(index, e) for e in factor.ends()]
    dist = {}
    for a in classes:
        for b in classes:
            dist[(a.end, b.end)] = 0 if a == b else INF
    return classes, dist


@dataclass(frozen=True)
class Stratum:
    ends: frozenset  # of AsyClass
    remaining: tuple[int, ...]  # factor indices still present
    kind: str

    @property
    def level(self) -> int:
        return len(self.ends)

    def label(self) -> str:
        if not self.ends:
            return "X"
        return "+".join(f"{c.factor}:{c.end}" for c in sorted(self.ends, key=lambda c: (c.factor, c.end)))


@dataclass
class StratifiedSpace:
    space: ProductSpace
    depth: int
    strata: list[Stratum]
    raw_counts: dict[int, int]  # strata per level before identification
    closure: list[tuple[int, int]] = field(default_factory=list)  # (i, j): stratum j lies in the closure of i

    def at_level(self, k: int) -> list[int]:
        return [i for i, s in enumerate(self.strata) if s.level == k]

    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.strata:
            out[s.level] = out.get(s.level, 0) + 1
        return out

    def signature(self) -> tuple:
        """Isomorphism invariant: levels and kinds with the closure relation, up to relabelling."""
        n = len(self.strata)
        kinds = [(s.level, s.kind) for s in self.strata]
        rel = set(self.closure)
        best = None
        for perm in itertools.permutations(range(n)):
            cand = (
                tuple(kinds[p] for p in perm),
                tuple(sorted((perm.index(i), perm.index(j)) for i, j in rel)),
            )
            if best is None or cand < best:
                best = cand
        return best

    def render(self) -> list[str]:
        lines = []
        for i, s in enumerate(self.strata):
            lines.append(f"stratum level={s.level} component={i} kind={s.kind} ends={s.label()}")
        for k in sorted(self.raw_counts):
            if k == 0:
                continue
            lines.append(f"level {k} raw={self.raw_counts[k]} identified={self.counts().get(k, 0)}")
        return lines


def _stratum_kind(space: ProductSpace, remaining: tuple[int, ...]) -> str:
    if not remaining:
        return "point"
    return "*".join(space.factors[i].describe() for i in remaining)


def build_iterated(space: ProductSpace, depth: int) -> StratifiedSpace:
    """Level-by-level Asy of one factor at a time, then identification of equal end sets."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    n = len(space.factors)
    classes = [asy(f, i)[0] for i, f in enumerate(space.factors)]
    level = [(frozenset(), tuple(range(n)))]
    seen = {frozenset(): Stratum(frozenset(), tuple(range(n)), _stratum_kind(space, tuple(range(n))))}
    raw_counts = {0: 1}
    for k in range(1, depth + 1):
        produced = []
        for ends, remaining in level:
            for j in remaining:
                rest = tuple(i for i in remaining if i != j)
                for c in classes[j]:
                    produced.append((ends | {c}, rest))
        if not produced:
            break
        raw_counts[k] = len(produced)
        nxt = []
        for ends, rest in produced:
            if ends not in seen:
                seen[ends] = Stratum(ends, rest, _stratum_kind(space, rest))
                nxt.append((ends, rest))
        level = nxt
    strata = sorted(seen.values(), key=lambda s: (s.level, s.label()))
    closure = [
        (i, j)
        for i, a in enumerate(strata)
        for j, b in enumerate(strata)
        if i != j and a.ends < b.ends
    ]
    return StratifiedSpace(space, depth, strata, raw_counts, closure)


@dataclass(frozen=True)
class BoundaryComplex:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]  # (name, endpoint, endpoint)

    def is_circle(self) -> bool:
        """Connected, every vertex of degree 2, as many edges as vertices."""
        if len(self.vertices) != len(self.edges) or not self.vertices:
            return False
        deg = {v: 0 for v in self.vertices}
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for _, a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
            adj[a].add(b)
            adj[b].add(a)
        if any(d != 2 for d in deg.values()):
            return False
        start = self.vertices[0]
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x] - seen:
                seen.add(y)
                stack.append(y)
        return len(seen) == len(self.vertices)

    def render(self) -> list[str]:
        lines = [f"cell dim=0 name={v}" for v in self.vertices]
        lines += [f"cell dim=1 name={e} from={a} to={b}" for e, a, b in self.edges]
        shape = "square" if self.is_circle() and len(self.edges) == 4 else "other"
        lines.append(f"boundary cells={len(self.vertices) + len(self.edges)} circle={str(self.is_circle()).lower()} shape={shape}")
        return lines


def boundary_complex(space: ProductSpace) -> BoundaryComplex:
    """Boundary of the compactified product of two one-dimensional factors.

    Each factor closes up to a segment whose two ends are either finite
    endpoints or asymptote classes; the product is a rectangle.
    """
    if len(space.factors) != 2 or not all(isinstance(f, (HalfLine, Interval)) for f in space.factors):
        raise ValueError("the boundary complex is assembled for two half-line or interval factors")

    def ends(f):
        return ("0", "inf") if isinstance(f, HalfLine) else ("0", str(f.length))

    e1, e2 = ends(space.factors[0]), ends(space.factors[1])
    verts = tuple(f"({a},{b})" for a in e1 for b in e2)
    edges = []
    for a in e1:
        edges.append((f"{{{a}}}xY2", f"({a},{e2[0]})", f"({a},{e2[1]})"))
    for b in e2:
        edges.append((f"Y1x{{{b}}}", f"({e1[0]},{b})", f"({e1[1]},{b})"))
    return BoundaryComplex(verts, tuple(edges))


def convergence_certificate(space: ProductSpace, sequence, target: Stratum, terms=(10, 100, 1000, 10000)):
    """Tail evidence that x_n converges into ``target``.

    For factors replaced by an end the coordinate must escape (its distance
    from the start of the sequence grows past every sampled bound); the
    remaining coordinates must settle. Returns rows (n, escape, spread) where
    escape is the least escaping distance and spread the largest distance of
    a remaining coordinate from its value at the last term.
    """
    points = [sequence(n) for n in terms]
    for p in points:
        space.check_point(p)
    first = sequence(terms[0])
    last = points[-1]
    escaping = sorted({c.factor for c in target.ends})
    rows = []
    for n, p in zip(terms, points):
        esc = min((space.factors[i].distance(first[i], p[i]) for i in escaping), default=0)
        spread = max((space.factors[i].distance(p[i], last[i]) for i in target.remaining), default=0)
        rows.append((n, esc, spread))
    ok = all(rows[k][1] < rows[k + 1][1] for k in range(len(rows) - 1)) if escaping else True
    ok = ok and all(rows[k][2] >= rows[k + 1][2] for k in range(len(rows) - 1))
    return ok, rows


# -- geodesics in sup products ----------------------------------------------------------------


def _exact(space: ProductSpace) -> None:
    for f in space.factors:
        if isinstance(f, Cone):
            raise ValueError("explicit geodesics are built only on factors with exact distances")


def diagonal_pair(space: ProductSpace, p, q) -> bool:
    ds = space.factor_distances(p, q)
    return all(d == ds[0] for d in ds)


@dataclass(frozen=True)
class Geodesic:
    """Breakpoints (t, point); between breakpoints each factor moves along its own geodesic."""

    breakpoints: tuple

    def length(self, space: ProductSpace) -> Fraction:
        total = Fraction(0)
        for (t0, a), (t1, b) in zip(self.breakpoints, self.breakpoints[1:]):
            step = max(f.distance(x, y) for f, x, y in zip(space.factors, a, b))
            if step > t1 - t0:
                raise ValueError("path moves faster than unit speed")
            total += step
        return total


@dataclass(frozen=True)
class Unique:
    geodesic: Geodesic


@dataclass(frozen=True)
class MultipleWitness:
    first: Geodesic
    second: Geodesic
    slack_factor: int


@dataclass(frozen=True)
class FiniteMultiple:
    count: int


def _factor_path(f, x, y, d, total, mode):
    """Breakpoints for one factor over [0, total]."""
    if mode == "sync":
        return [(Fraction(0), x), (total, y)]
    if mode == "move-first":
        return [(Fraction(0), x), (d, y), (total, y)]
    if mode == "dawdle-first":
        return [(Fraction(0), x), (total - d, x), (total, y)]
    raise ValueError(mode)


def _position(f, path, t):
    for (t0, a), (t1, b) in zip(path, path[1:]):
        if t0 <= t <= t1:
            if t1 == t0:
                return b
            ell = f.distance(a, b)
            return f.along(a, b, ell * (t - t0) / (t1 - t0))
    return path[-1][1]


def _assemble(space, paths) -> Geodesic:
    times = sorted({t for path in paths for t, _ in path})
    return Geodesic(tuple((t, tuple(_position(f, path, t) for f, path in zip(space.factors, paths))) for t in times))


def geodesic_multiplicity_witness(space: ProductSpace, p, q):
    """Unique for diagonal pairs of uniquely geodesic factors; otherwise two explicit geodesics."""
    if len(space.factors) < 2:
        raise ValueError("needs at least two factors")
    if tuple(p) == tuple(q):
        raise ValueError("endpoints coincide")
    if any(isinstance(f, Cone) for f in space.factors):
        if not diagonal_pair(space, p, q):
            raise ValueError("cone factors are handled only for diagonal pairs")
        count = 1
        for f, x, y in zip(space.factors, p, q):
            if isinstance(f, Cone):
                count *= f.geodesic_count(x, y)
        return Unique(None) if count == 1 else FiniteMultiple(count)
    ds = space.factor_distances(p, q)
    total = max(ds)
    sync = [_factor_path(f, x, y, d, total, "sync") for f, x, y, d in zip(space.factors, p, q, ds)]
    if all(d == total for d in ds):
        return Unique(_assemble(space, sync))
    j = min(range(len(ds)), key=lambda i: (ds[i], i))
    f, x, y, d = space.factors[j], p[j], q[j], ds[j]
    if d > 0:
        a = _factor_path(f, x, y, d, total, "move-first")
        b = _factor_path(f, x, y, d, total, "dawdle-first")
    else:
        # stationary factor: stay put, or step out and back
        half = total / 2
        out = f.excursion(x, half)
        a = [(Fraction(0), x), (total, x)]
        b = [(Fraction(0), x), (half, out), (total, x)]
    first = _assemble(space, sync[:j] + [a] + sync[j + 1 :])
    second = _assemble(space, sync[:j] + [b] + sync[j + 1 :])
    return MultipleWitness(first, second, j)


def witness_is_valid(space: ProductSpace, p, q, w: MultipleWitness) -> bool:
    """Both paths run p to q at sup-length d(p, q) and differ somewhere."""
    d = space.distance(p, q)
    for g in (w.first, w.second):
        if tuple(g.breakpoints[0][1]) != tuple(p):
            return False
        if tuple(g.breakpoints[-1][1]) != tuple(q) or g.length(space) != d:
            return False
    times = sorted({t for t, _ in w.first.breakpoints} | {t for t, _ in w.second.breakpoints})
    return any(_at(space, w.first, t) != _at(space, w.second, t) for t in times)


def _at(space, g: Geodesic, t):
    paths = [[(s, pt[i]) for s, pt in g.breakpoints] for i in range(len(space.factors))]
    return tuple(_position(f, path, t) for f, path in zip(space.factors, paths))



# -- singular locus ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    point: tuple
    designated: bool  # some coordinate lies in its factor's designated subset
    metric: bool  # pairs with finitely many but several geodesics exist arbitrarily close

    @property
    def agrees(self) -> bool:
        return self.designated == self.metric


def _metric_singular(f, x) -> bool:
    # near a cone apex two points at half-angle separation have exactly two geodesics;
    # trees, half-lines and intervals are uniquely geodesic everywhere
    return isinstance(f, Cone) and f.is_apex(x)


def singular_locus_scan(space: ProductSpace, samples, designated=None) -> list[ScanRow]:
    """Classify samples against the union of (... x S_i x ...) and against the metric criterion.

    ``designated`` maps factor index to its subset S_i; by default S_i is the
    factor's branch points (tree vertices of degree >= 3, cone apexes).
    """
    sets = {}
    for i, f in enumerate(space.factors):
        chosen = designated.get(i, ()) if designated is not None else f.branch_points()
        sets[i] = {_norm(f, s) for s in chosen}
    rows = []
    for p in samples:
        space.check_point(p)
        des = any(_norm(f, x) in sets[i] for i, (f, x) in enumerate(zip(space.factors, p)))
        met = any(_metric_singular(f, x) for f, x in zip(space.factors, p))
        rows.append(ScanRow(tuple(p), des, met))
    return rows


def _norm(f, x):
    if isinstance(f, MetricTree):
        return f.normalize(x)
    if isinstance(f, Cone):
        return (Fraction(0), Fraction(0)) if f.is_apex(x) else (_frac(x[0]), _frac(x[1]))
    return _frac(x)


# -- text format and the moduli-space bookkeeping ------------------------------------------------


def parse_product(text: str, source: str = "<product>") -> ProductSpace:
    """Lines: ``factor halfline``, ``factor interval L``, ``factor cone A R``, or
    ``factor tree`` followed by ``edge u v L`` and ``leg u`` lines."""
    factors = []
    tree_edges: list | None = None
    tree_legs: list | None = None

    def close_tree():
        nonlocal tree_edges, tree_legs
        if tree_edges is not None:
            factors.append(MetricTree(tuple(tree_edges), tuple(tree_legs)))
        tree_edges = tree_legs = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        try:
            if words[0] == "factor":
                close_tree()
                kind = words[1]
                if kind == "halfline" and len(words) == 2:
                    factors.append(HalfLine())
                elif kind == "interval" and len(words) == 3:
                    factors.append(Interval(Fraction(words[2])))
                elif kind == "cone" and len(words) == 4:
                    factors.append(Cone(Fraction(words[2]), Fraction(words[3])))
                elif kind == "tree" and len(words) == 2:
                    tree_edges, tree_legs = [], []
                else:
                    raise ValueError(f"bad factor line {line!r}")
            elif words[0] == "edge" and tree_edges is not None and len(words) == 4:
                tree_edges.append((words[1], words[2], Fraction(words[3])))
            elif words[0] == "leg" and tree_legs is not None and len(words) == 2:
                tree_legs.append(words[1])
            else:
                raise ValueError(f"unexpected line {line!r}")
        except (ValueError, ZeroDivisionError, IndexError) as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    close_tree()
    return ProductSpace(tuple(factors))


def dm_stratified(genus: int, punctures: int) -> StratifiedSpace:
    """Strata of the Deligne-Mumford boundary as multicurve types, level = curve count."""
    from .topology import dm_poset

    poset = dm_poset(genus, punctures)
    strata = [
        Stratum(frozenset(AsyClass(k, "curve") for k in range(len(t.curves))), (), t.describe())
        for t in poset.types
    ]
    # transitive closure of the covering relation
    rel = set(poset.covers)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    counts: dict[int, int] = {}
    for s in strata:
        counts[s.level] = counts.get(s.level, 0) + 1
    return StratifiedSpace(ProductSpace((HalfLine(),)), max(counts, default=0), strata, counts, sorted(rel))
