"""Teichmüller rays: the diagonal flow on a flat surface and its classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .extremal import DEFAULT_BOUND, DirectionalCore, bounds_from_analysis
from .numberfield import QuadExt, as_quad
from .surface import FlatSurface, apply_linear, validate
from .trajectories import MIXED, NO_CLOSURE, STREBEL, DirectionAnalysis, vertical_decomposition
from .triangulation import Triangulation, triangulate

__all__ = [
    "TeichRay",
    "RayClass",
    "EDM",
    "ADM_NOT_EDM",
    "NOT_ADM",
    "UNKNOWN",
    "make_ray",
    "flow_matrix",
    "ray_point",
    "analysis_at",
    "cylinder_moduli_at",
    "classify",
    "adm_deficiency_witness",
    "parse_lambda",
]

EDM = "EDM"
ADM_NOT_EDM = "ADM-not-EDM"
NOT_ADM = "NotADM-certified"
UNKNOWN = "Unknown"


def parse_lambda(text) -> Fraction:
    value = Fraction(str(text))
    if value <= 0:
        raise ValueError(f"flow parameter must be positive, got {text}")
    return value


def flow_matrix(lam):
    lam = as_quad(lam)
    if lam.sign() <= 0:
        raise ValueError("flow parameter must be positive")
    return ((lam, QuadExt(0)), (QuadExt(0), 1 / lam))


@dataclass
class TeichRay:
    """A flat surface together with its vertical analysis; r(lambda) = diag(lambda, 1/lambda) r(1)."""

    base: FlatSurface
    analysis: DirectionAnalysis
    bound: QuadExt
    triangulation: Triangulation
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def status(self) -> str:
        return self.analysis.status


def make_ray(surface: FlatSurface, bound=None) -> TeichRay:
    report = validate(surface)
    if not report.valid:
        raise ValueError(report.summary())
    bound = DEFAULT_BOUND if bound is None else as_quad(bound)
    tri = triangulate(surface)
    return TeichRay(surface, vertical_decomposition(None, bound, triangulation=tri), bound, tri)


def ray_point(ray: TeichRay | FlatSurface, lam) -> FlatSurface:
    base = ray.base if isinstance(ray, TeichRay) else ray
    return apply_linear(base, flow_matrix(lam))


def analysis_at(ray: TeichRay, lam) -> DirectionAnalysis:
    """Vertical decomposition of r(lambda), traced afresh on the flowed triangulation."""
    lam = as_quad(lam)
    if lam.sign() <= 0:
        raise ValueError("flow parameter must be positive")
    if lam not in ray._cache:
        tri = ray.triangulation.transformed(flow_matrix(lam))
        # vertical lengths shrink by lambda, so the same bound covers the same leaves
        ray._cache[lam] = vertical_decomposition(None, ray.bound / lam, triangulation=tri)
    return ray._cache[lam]


def cylinder_moduli_at(ray: TeichRay, lam) -> list[QuadExt]:
    if ray.status == NO_CLOSURE:
        raise ValueError("ray direction has no cylinders up to the tracing bound")
    lam = as_quad(lam)
    if lam.sign() <= 0:
        raise ValueError("flow parameter must be positive")
    return [lam * lam * m for m in ray.analysis.moduli]


@dataclass(frozen=True)
class RayClass:
    kind: str
    bound: QuadExt
    cylinders: int

    def render(self) -> str:
        if self.kind == UNKNOWN:
            return f"{UNKNOWN}({self.bound}) cylinders={self.cylinders}"
        return f"{self.kind} cylinders={self.cylinders}"


def classify(ray: TeichRay | FlatSurface, bound=None) -> RayClass:
    """Strebel rays are EDM; mixed Strebel rays are ADM but not EDM.

    A direction that did not close up is reported Unknown: finite tracing
    cannot certify minimality, so NotADM is never returned from here.
    """
    if isinstance(ray, FlatSurface):
        ray = make_ray(ray, bound)
    elif bound is not None and as_quad(bound) != ray.bound:
        ray = make_ray(ray.base, bound)
    a = ray.analysis
    if a.status == STREBEL:
        return RayClass(EDM, ray.bound, len(a.cylinders))
    if a.status == MIXED:
        return RayClass(ADM_NOT_EDM, ray.bound, len(a.cylinders))
    return RayClass(UNKNOWN, ray.bound, len(a.cylinders))


@dataclass(frozen=True)
class WitnessRow:
    lam: QuadExt
    lower_bound: float
    log_lambda: float
    cylinder: int

    @property
    def deficiency(self) -> float:
        return self.lower_bound - self.log_lambda


def adm_deficiency_witness(ray: TeichRay, lams, curves=None) -> list[WitnessRow]:
    """Kerckhoff lower bound on d(r(1), r(lambda)) from vertical core curves.

    For a core of modulus M the bound is 1/2 log(lower_1 / upper_lambda)
    = log lambda + 1/2 log(M * lower_1); the second term is the additive
    deficiency, never positive since lower_1 <= 1/M.
    """
    if ray.status == NO_CLOSURE:
        raise ValueError("ray direction has no cylinders up to the tracing bound")
    if curves is None:
        curves = [DirectionalCore(i) for i in range(len(ray.analysis.cylinders))]
    base = {c: bounds_from_analysis(c, ray.analysis) for c in curves}
    rows = []
    for lam in lams:
        lam = as_quad(lam)
        flowed = analysis_at(ray, lam)
        best = None
        for c in curves:
            upper = bounds_from_analysis(c, flowed).upper
            value = 0.5 * math.log(float(base[c].lower / upper))
            if best is None or value > best[0]:
                best = (value, c.index)
        rows.append(WitnessRow(lam, best[0], math.log(float(lam)), best[1]))
    return rows
