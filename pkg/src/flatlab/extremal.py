"""Extremal-length bounds for simple closed curves on flat surfaces.

Lower bounds come from explicit test metrics (the flat metric, or the flat
metric restricted to a collar), upper bounds from embedded cylinders. On a
flat torus the flat metric is extremal, so both sides coincide there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .numberfield import QuadExt, as_quad
from .surface import FlatSurface, total_area
from .trajectories import MIXED, NO_CLOSURE, DirectionAnalysis, vertical_decomposition
from .triangulation import Triangulation, triangulate
from .vec import Vec2, cross

__all__ = [
    "TorusSlope",
    "DirectionalCore",
    "GraphLoop",
    "ExtBound",
    "ExtEstimate",
    "KerckhoffBound",
    "DEFAULT_BOUND",
    "analyze_direction",
    "torus_lattice",
    "ext_torus_exact",
    "ext_upper_cylinder",
    "ext_lower_flat",
    "ext_lower_collar",
    "ext_bounds",
    "bounds_from_analysis",
    "ext_annulus_contribution",
    "ext_combined",
    "kerckhoff_lower_bound",
    "parse_curve",
]

DEFAULT_BOUND = QuadExt(100)
VERTICAL = Vec2(0, 1)


@dataclass(frozen=True)
class TorusSlope:
    """The curve p*w1 + q*w2 on a parallelogram torus with edges w1, w2."""

    p: int
    q: int

    def __post_init__(self):
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"slope ({self.p},{self.q}) is not primitive")

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class DirectionalCore:
    """Core curve of cylinder ``index`` in the decomposition along ``direction``."""

    index: int
    direction: tuple = (0, 1)

    @property
    def vector(self) -> Vec2:
        return Vec2(*self.direction)

    def __str__(self):
        dx, dy = self.direction
        return f"core:{self.index}@{as_quad(dx)},{as_quad(dy)}"


@dataclass(frozen=True)
class GraphLoop:
    """Closed path in the critical graph of ``direction``: (connection, forward) steps."""

    steps: tuple[tuple[int, bool], ...]
    direction: tuple = (0, 1)

    @property
    def vector(self) -> Vec2:
        return Vec2(*self.direction)

    def __str__(self):
        body = ",".join(f"{k}{'+' if fwd else '-'}" for k, fwd in self.steps)
        return f"loop:{body}"


@dataclass(frozen=True)
class ExtBound:
    lower: QuadExt
    upper: QuadExt | None  # None stands for no finite upper bound
    lower_source: str
    upper_source: str

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise AssertionError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def render(self) -> str:
        up = "inf" if self.upper is None else self.upper.render()
        return f"lower={self.lower.render()} upper={up}"


@dataclass(frozen=True)
class ExtEstimate:
    """A value known only up to multiplicative constants depending on the genus."""

    value: QuadExt
    dominant: str
    tag: str = "comparable up to genus constants"


@dataclass(frozen=True)
class KerckhoffBound:
    value: float
    ratio: QuadExt | None
    curve: object
    forward: bool


# -- geometry helpers ---------------------------------------------------------------


def _rotation_to_vertical(v: Vec2):
    # conformal: |v| times a rotation carrying v to the positive vertical
    return ((v.y, -v.x), (v.x, v.y))


@lru_cache(maxsize=256)
def _triangulation(surface: FlatSurface) -> Triangulation:
    return triangulate(surface)


@lru_cache(maxsize=512)
def _analysis(surface: FlatSurface, direction: tuple, bound: QuadExt) -> DirectionAnalysis:
    tri = _triangulation(surface)
    v = Vec2(*direction)
    if v != VERTICAL:
        tri = tri.transformed(_rotation_to_vertical(v))
    return vertical_decomposition(None, bound, triangulation=tri)


def _direction_key(direction) -> tuple:
    v = direction if isinstance(direction, Vec2) else Vec2(*direction)
    if v.is_zero():
        raise ValueError("direction must be nonzero")
    return (v.x, v.y)


def analyze_direction(surface: FlatSurface, direction=(0, 1), bound=None) -> DirectionAnalysis:
    """Cylinder decomposition along ``direction`` (computed after a conformal rotation)."""
    bound = DEFAULT_BOUND if bound is None else as_quad(bound)
    return _analysis(surface, _direction_key(direction), bound)


def torus_lattice(surface: FlatSurface) -> tuple[Vec2, Vec2]:
    if len(surface.charts) != 1 or len(surface.charts[0]) != 4 or surface.genus != 1:
        raise ValueError("torus slopes need a single parallelogram chart of genus 1")
    poly = surface.charts[0]
    w1, w2 = poly.edge(0), poly.edge(1)
    if poly.edge(2) != -w1 or poly.edge(3) != -w2:
        raise ValueError("chart is not a parallelogram")
    return w1, w2


def ext_torus_exact(lattice, slope: TorusSlope) -> QuadExt:
    """Extremal length on a flat torus: squared flat length over area."""
    if isinstance(lattice, FlatSurface):
        lattice = torus_lattice(lattice)
    w1, w2 = lattice
    area = abs(cross(w1, w2))
    if not area:
        raise ValueError("degenerate lattice")
    v = w1.scale(slope.p) + w2.scale(slope.q)
    return v.norm2() / area


def _cylinder(analysis: DirectionAnalysis, index: int):
    if analysis.status == NO_CLOSURE:
        raise ValueError("direction has no cylinder decomposition up to the tracing bound")
    if not 0 <= index < len(analysis.cylinders):
        raise ValueError(f"no cylinder {index}: direction has {len(analysis.cylinders)} cylinders")
    return analysis.cylinders[index]


def ext_upper_cylinder(curve: DirectionalCore, analysis: DirectionAnalysis) -> QuadExt:
    """1/M for the core class of a detected cylinder of modulus M."""
    if not isinstance(curve, DirectionalCore):
        raise ValueError("the cylinder upper bound applies only to cylinder core classes")
    return 1 / _cylinder(analysis, curve.index).modulus


def _loop_length(curve: GraphLoop, analysis: DirectionAnalysis) -> QuadExt:
    conns = analysis.critical_graph.connections
    tri = analysis.triangulation
    if not curve.steps:
        raise ValueError("empty loop")
    ends = []
    total = QuadExt(0)
    for k, fwd in curve.steps:
        if not 0 <= k < len(conns):
            raise ValueError(f"critical graph has no connection {k}")
        c = conns[k]
        total = total + abs(c.holonomy.y)
        ends.append((c.start, c.end) if fwd else (c.end, c.start))
        for v in (c.start, c.end):
            if tri.vertex_angle[v] < 2:
                raise ValueError("loops through simple poles are not geodesic; no bound offered")
    for (_, head), (tail, _) in zip(ends, ends[1:] + ends[:1]):
        if head != tail:
            raise ValueError("loop steps do not join up")
    # a step followed by its own reverse would backtrack
    for (k1, f1), (k2, f2) in zip(curve.steps, curve.steps[1:] + curve.steps[:1]):
        if k1 == k2 and f1 != f2 and len(curve.steps) > 1:
            raise ValueError("loop backtracks along a connection")
    return total


def ext_lower_flat(curve, surface: FlatSurface, bound=None) -> QuadExt:
    """Flat metric as test metric: (flat geodesic length)^2 / area."""
    if isinstance(curve, TorusSlope):
        return ext_torus_exact(surface, curve)
    analysis = analyze_direction(surface, curve.direction, bound)
    return _flat_ratio(curve, analysis)


def _flat_ratio(curve, analysis: DirectionAnalysis) -> QuadExt:
    if isinstance(curve, DirectionalCore):
        a = _cylinder(analysis, curve.index).circumference
    elif isinstance(curve, GraphLoop):
        a = _loop_length(curve, analysis)
    else:
        raise TypeError(f"unsupported curve {curve!r}")
    return a * a / analysis.total_area


def _collar_ratio(curve, analysis: DirectionAnalysis) -> QuadExt:
    extra = analysis.uncovered_area if analysis.status == MIXED else QuadExt(0)
    if isinstance(curve, DirectionalCore):
        own = _cylinder(analysis, curve.index)
        ell = own.circumference
        area = own.area + extra
        for cyl in analysis.cylinders:
            if cyl.index != own.index:
                area = area + cyl.circumference * min(cyl.height, ell)
        return ell * ell / area
    if isinstance(curve, GraphLoop):
        ell = _loop_length(curve, analysis)
        area = extra
        for cyl in analysis.cylinders:
            if cyl.circumference == ell:
                # the loop might be freely homotopic to this core
                area = area + cyl.area
            else:
                area = area + cyl.circumference * min(cyl.height, ell)
        return ell * ell / area
    raise TypeError(f"unsupported curve {curve!r}")


def ext_lower_collar(curve, surface: FlatSurface, bound=None) -> QuadExt:
    """Test metric supported on the curve's cylinder (or on Γ) plus collars.

    For a core of length a the metric is flat on its cylinder and on the
    strips of width a/2 along both sides of every other cylinder; a curve in
    the class either stays where the metric is flat (so has length >= a) or
    crosses a full strip twice. Loops in the critical graph use strips of
    half their length along Γ.
    """
    analysis = analyze_direction(surface, curve.direction, bound)
    return _collar_ratio(curve, analysis)


def ext_bounds(curve, surface: FlatSurface, bound=None) -> ExtBound:
    if isinstance(curve, TorusSlope):
        exact = ext_torus_exact(surface, curve)
        return ExtBound(exact, exact, "flat torus", "flat torus")
    analysis = analyze_direction(surface, curve.direction, bound)
    return bounds_from_analysis(curve, analysis)


def bounds_from_analysis(curve, analysis: DirectionAnalysis) -> ExtBound:
    flat = _flat_ratio(curve, analysis)
    collar = _collar_ratio(curve, analysis)
    lower, source = (collar, "collar") if collar > flat else (flat, "flat")
    if isinstance(curve, DirectionalCore):
        return ExtBound(lower, ext_upper_cylinder(curve, analysis), source, "cylinder")
    return ExtBound(lower, None, source, "none")


def ext_annulus_contribution(n: int, t, M) -> QuadExt:
    """n^2 (M + t^2/M): a curve crossing an annulus of modulus M n times with twist t."""
    M = as_quad(M)
    if M.sign() <= 0:
        raise ValueError("modulus must be positive")
    if n < 0:
        raise ValueError("crossing count must be nonnegative")
    t = as_quad(t)
    return QuadExt(n * n) * (M + t * t / M)


def ext_combined(crossings, thick_intersections=()) -> ExtEstimate:
    """Largest annulus or thick-part contribution; meaningful only up to constants.

    ``crossings`` holds (n, t, M) per cylinder; ``thick_intersections`` the
    maximal intersection number with generators of each thick piece. A curve
    that is itself a core (n = 0 everywhere) is reported through 1/M of its
    cylinder, passed as (0, None, M).
    """
    best = None
    for k, (n, t, M) in enumerate(crossings):
        if n == 0 and t is None:
            val, label = 1 / as_quad(M), f"core of cylinder {k}"
        else:
            val, label = ext_annulus_contribution(n, 0 if t is None else t, M), f"cylinder {k}"
        if best is None or val > best[0]:
            best = (val, label)
    for j, i_max in enumerate(thick_intersections):
        val = QuadExt(i_max * i_max)
        if best is None or val > best[0]:
            best = (val, f"thick piece {j}")
    if best is None:
        raise ValueError("no pieces to combine")
    return ExtEstimate(best[0], best[1])


def _log_ratio(num: QuadExt, den: QuadExt | None):
    if den is None or num.sign() <= 0:
        return None
    ratio = num / den
    return 0.5 * math.log(float(ratio)), ratio


def kerckhoff_lower_bound(X: FlatSurface, Y: FlatSurface, family, bound=None, bounds_x=None, bounds_y=None) -> KerckhoffBound:
    """Largest 1/2 log(lower_X / upper_Y) over the family, in both directions.

    Family members are curves meaningful on both surfaces, or pairs
    (curve on X, curve on Y) naming one isotopy class in each presentation.
    ``bounds_x``/``bounds_y`` may replace the bound evaluation (curve -> ExtBound).
    The result is clamped at 0, the trivial distance bound.
    """
    family = list(family)
    if not family:
        raise ValueError("empty curve family")
    bx = bounds_x or (lambda c: ext_bounds(c, X, bound))
    by = bounds_y or (lambda c: ext_bounds(c, Y, bound))
    best = KerckhoffBound(0.0, None, None, True)
    for item in family:
        cx, cy = item if isinstance(item, tuple) else (item, item)
        ex, ey = bx(cx), by(cy)
        for forward, num, den in ((True, ex.lower, ey.upper), (False, ey.lower, ex.upper)):
            got = _log_ratio(num, den)
            if got is not None and got[0] > best.value:
                best = KerckhoffBound(got[0], got[1], item, forward)
    return best


def parse_curve(text: str):
    """``p/q`` slope, ``core:i`` or ``hcore:i`` cylinder core, ``loop:3+,5-`` Γ loop."""
    text = text.strip()
    if text.startswith("core:"):
        return DirectionalCore(int(text[5:]))
    if text.startswith("hcore:"):
        return DirectionalCore(int(text[6:]), (1, 0))
    if text.startswith("loop:"):
        steps = []
        for tok in text[5:].split(","):
            tok = tok.strip()
            if not tok or tok[-1] not in "+-":
                raise ValueError(f"bad loop step {tok!r}")
            steps.append((int(tok[:-1]), tok[-1] == "+"))
        return GraphLoop(tuple(steps))
    if "/" in text:
        p, q = text.split("/", 1)
        return TorusSlope(int(p), int(q))
    raise ValueError(f"unrecognised curve {text!r}")
