"""Pants decompositions of small surfaces and the multicurve types they contain.

A pants decomposition of S_{g,n} is stored as a multigraph on its pairs of
pants: ``loops[i]`` curves with both sides on pants i, ``edges[(i, j)]``
curves between distinct pants, ``punct[i]`` punctures on pants i. Every
multicurve on S_{g,n} extends to a pants decomposition, so the types of
sub-multicurves of all decompositions are all multicurve types, and two
types admit disjoint realisations exactly when one decomposition contains
both.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .trajectories import TopologicalType

__all__ = [
    "PantsGraph",
    "TABLE_LIMITS",
    "pants_decompositions",
    "multicurve_types",
    "disjointly_realizable",
    "DMPoset",
    "dm_poset",
    "surface_signature",
]

# built-in tables cover genus <= 2 with at most 2 punctures
TABLE_LIMITS = (2, 2)


@dataclass(frozen=True)
class PantsGraph:
    punct: tuple[int, ...]
    loops: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]  # (i, j, multiplicity) with i < j

    def curves(self) -> list[tuple[int, int]]:
        out = []
        for i, k in enumerate(self.loops):
            out.extend([(i, i)] * k)
        for i, j, k in self.edges:
            out.extend([(i, j)] * k)
        return out

    def subtype(self, chosen: tuple[int, ...]) -> TopologicalType:
        """Complement type of the curves with indices in ``chosen``."""
        curves = self.curves()
        picked = set(chosen)
        n = len(self.punct)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for idx, (i, j) in enumerate(curves):
            if idx not in picked:
                parent[find(i)] = find(j)
        roots = sorted({find(i) for i in range(n)})
        label = {r: k for k, r in enumerate(roots)}
        pants = [0] * len(roots)
        punct = [0] * len(roots)
        bnd = [0] * len(roots)
        for i in range(n):
            c = label[find(i)]
            pants[c] += 1
            punct[c] += self.punct[i]
        sides = []
        for idx in sorted(picked):
            i, j = curves[idx]
            a, b = label[find(i)], label[find(j)]
            bnd[a] += 1
            bnd[b] += 1
            sides.append((a, b))
        comps = []
        for c in range(len(roots)):
            # chi = -(pants) = 2 - 2g - boundaries - punctures
            twice_g = 2 + pants[c] - bnd[c] - punct[c]
            comps.append((twice_g // 2, bnd[c], punct[c]))
        return TopologicalType(tuple(comps), tuple(sides))


def _canonical(punct, loops, adj) -> tuple:
    n = len(punct)
    best = None
    for perm in itertools.permutations(range(n)):
        cand = (
            tuple(punct[p] for p in perm),
            tuple(loops[p] for p in perm),
            tuple(adj[perm[a]][perm[b]] for a in range(n) for b in range(a + 1, n)),
        )
        if best is None or cand < best:
            best = cand
    return best


def _connected(adj) -> bool:
    n = len(adj)
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if adj[i][j] and j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


@lru_cache(maxsize=None)
def pants_decompositions(genus: int, punctures: int) -> tuple[PantsGraph, ...]:
    """All pants decompositions of S_{g,n} up to homeomorphism."""
    n_pants = 2 * genus - 2 + punctures
    if genus < 0 or punctures < 0:
        raise ValueError("genus and puncture count must be nonnegative")
    if n_pants <= 0:
        return ()
    pairs = [(i, j) for i in range(n_pants) for j in range(i + 1, n_pants)]
    found: dict[tuple, PantsGraph] = {}
    for punct in itertools.product(range(4), repeat=n_pants):
        if sum(punct) != punctures:
            continue
        for loops in itertools.product(range(2), repeat=n_pants):
            free = [3 - punct[i] - 2 * loops[i] for i in range(n_pants)]
            if min(free) < 0:
                continue
            for mult in itertools.product(range(4), repeat=len(pairs)):
                deg = [0] * n_pants
                adj = [[0] * n_pants for _ in range(n_pants)]
                for (i, j), k in zip(pairs, mult):
                    deg[i] += k
                    deg[j] += k
                    adj[i][j] = adj[j][i] = k
                if deg != free or not _connected(adj):
                    continue
                key = _canonical(punct, loops, adj)
                if key not in found:
                    p, lp, flat = key
                    it = iter(flat)
                    edges = tuple(
                        (i, j, k) for (i, j), k in ((pr, next(it)) for pr in pairs) if k
                    )
                    found[key] = PantsGraph(p, lp, edges)
    return tuple(found[k] for k in sorted(found))


def _check_limits(genus: int, punctures: int) -> None:
    if genus > TABLE_LIMITS[0] or punctures > TABLE_LIMITS[1]:
        raise LookupError(f"no built-in table for genus {genus} with {punctures} punctures")


def _is_torus(genus: int, punctures: int) -> bool:
    return genus == 1 and punctures == 0


_TORUS_CURVE = TopologicalType(((0, 2, 0),), ((0, 0),))


@lru_cache(maxsize=None)
def _subtype_table(genus: int, punctures: int):
    """Per decomposition: the set of type keys of its nonempty sub-multicurves."""
    _check_limits(genus, punctures)
    if _is_torus(genus, punctures):
        return ({_TORUS_CURVE.key: _TORUS_CURVE},)
    table = []
    for pg in pants_decompositions(genus, punctures):
        m = len(pg.curves())
        keys = {}
        for size in range(1, m + 1):
            for chosen in itertools.combinations(range(m), size):
                t = pg.subtype(chosen)
                keys.setdefault(t.key, t)
        table.append(keys)
    return tuple(table)


def multicurve_types(genus: int, punctures: int) -> list[TopologicalType]:
    """Every multicurve type on S_{g,n}, ordered by curve count then key."""
    seen = {}
    for keys in _subtype_table(genus, punctures):
        seen.update(keys)
    return [seen[k] for k in sorted(seen, key=lambda k: (len(k[1]), k))]


def surface_signature(t: TopologicalType) -> tuple[int, int]:
    return t.genus, t.punctures


def disjointly_realizable(t1: TopologicalType, t2: TopologicalType) -> bool:
    """Whether some homeomorphic copies of the two multicurves are disjoint (or share curves)."""
    sig = surface_signature(t1)
    if sig != surface_signature(t2):
        raise ValueError("multicurve types live on different surfaces")
    k1, k2 = t1.key, t2.key
    for keys in _subtype_table(*sig):
        if k1 in keys and k2 in keys:
            return True
    known = {k for keys in _subtype_table(*sig) for k in keys}
    for k in (k1, k2):
        if k not in known:
            raise ValueError(f"not a multicurve type on S_{sig}: {k}")
    return False


@dataclass(frozen=True)
class DMPoset:
    """Multicurve types of S_{g,n} ordered by degeneration (adding curves)."""

    genus: int
    punctures: int
    types: tuple[TopologicalType, ...]
    covers: tuple[tuple[int, int], ...]  # (i, j): type j refines type i by one curve

    def level(self, i: int) -> int:
        return len(self.types[i].curves)

    def render(self) -> list[str]:
        lines = [f"dmposet genus={self.genus} punctures={self.punctures} types={len(self.types)}"]
        for i, t in enumerate(self.types):
            lines.append(f"type id={i} level={self.level(i)} {t.describe()}")
        for i, j in self.covers:
            lines.append(f"cover {i} < {j}")
        return lines


def dm_poset(genus: int, punctures: int) -> DMPoset:
    types = multicurve_types(genus, punctures)
    index = {t.key: i for i, t in enumerate(types)}
    covers = set()
    if not _is_torus(genus, punctures):
        for pg in pants_decompositions(genus, punctures):
            m = len(pg.curves())
            for size in range(1, m):
                for chosen in itertools.combinations(range(m), size):
                    lo = index[pg.subtype(chosen).key]
                    for extra in range(m):
                        if extra not in chosen:
                            hi = index[pg.subtype(tuple(sorted(chosen + (extra,)))).key]
                            covers.add((lo, hi))
    return DMPoset(genus, punctures, tuple(types), tuple(sorted(covers)))
