"""Dilatation of explicit quasiconformal maps, sampled in binary64.

Two families are covered: affine maps between triangles and the cylinder
map that interpolates a boundary circle map with a twist and a height
change. The cylinder has circumference 1 and coordinates (theta, h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .numberfield import QuadExt

__all__ = [
    "LinearMap2",
    "linear_dilatation",
    "TriangleMapReport",
    "triangle_affine",
    "triangle_bound_constant",
    "triangle_sweep",
    "SampledMapReport",
    "close_map_dilatation",
    "hyperbolic_distance_uhp",
    "EQUILATERAL",
    "CLOSE_MAP_CONSTANT",
]

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])

# Regression constant for the cylinder map: sup K <= (1 + C eps) e^{d}. The
# calibration sweep in benchmarks/bench_qc.py peaks near 1.25 at eps = 0.2 for R1 >= 10.
CLOSE_MAP_CONSTANT = 5.0


@dataclass(frozen=True)
class LinearMap2:
    a: object
    b: object
    c: object
    d: object

    @classmethod
    def of(cls, m) -> "LinearMap2":
        if isinstance(m, LinearMap2):
            return m
        (a, b), (c, d) = m
        return cls(a, b, c, d)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def frobenius2(self):
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    def __matmul__(self, other: "LinearMap2") -> "LinearMap2":
        return LinearMap2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "LinearMap2":
        det = self.det
        return LinearMap2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def as_array(self) -> np.ndarray:
        return np.array([[float(self.a), float(self.b)], [float(self.c), float(self.d)]])


def linear_dilatation(m) -> float:
    """K = sigma_max / sigma_min, from K + 1/K = |m|_F^2 / |det m|.

    The sum is formed exactly when the entries are exact field elements, so
    only the final square root is rounded.
    """
    m = LinearMap2.of(m)
    det = m.det
    if isinstance(det, QuadExt):
        if not det:
            raise ValueError("singular linear map")
        s = float(m.frobenius2() / abs(det))
    else:
        if det == 0:
            raise ValueError("singular linear map")
        s = float(m.frobenius2()) / abs(float(det))
    return 0.5 * (s + math.sqrt(max(s * s - 4.0, 0.0)))


def triangle_bound_constant(ref=EQUILATERAL) -> float:
    """b(T0) with K <= b R / eps for every triangle of circumradius R, shortest side eps.

    With P the edge matrix of T0 and Q that of T at a common vertex,
    K <= |Q|_F^2 |P^-1|^2 |det P| / |det Q|, and |Q|_F^2 / |det Q| <= 8 R / eps
    because the longest side is less than twice the middle one.
    """
    ref = np.asarray(ref, dtype=np.float64)
    p = (ref[1:] - ref[0]).T
    sv = np.linalg.svd(p, compute_uv=False)
    return 8.0 * abs(np.linalg.det(p)) / float(sv.min()) ** 2


@dataclass(frozen=True)
class TriangleMapReport:
    matrix: np.ndarray
    dilatation: float
    shortest: float
    circumradius: float
    bound: float

    @property
    def ratio(self) -> float:
        """K eps / R, the quantity the bound constant controls."""
        return self.dilatation * self.shortest / self.circumradius

    @property
    def within_bound(self) -> bool:
        return self.dilatation <= self.bound


def _affine_matrix(ref: np.ndarray, tri: np.ndarray) -> np.ndarray:
    p = (ref[1:] - ref[0]).T
    q = (tri[1:] - tri[0]).T
    if abs(np.linalg.det(p)) == 0.0 or abs(np.linalg.det(q)) == 0.0:
        raise ValueError("degenerate triangle")
    return q @ np.linalg.inv(p)


def triangle_affine(ref, tri) -> TriangleMapReport:
    """The affine map sending the vertices of ``ref`` to those of ``tri`` in order."""
    ref = np.asarray(ref, dtype=np.float64)
    tri = np.asarray(tri, dtype=np.float64)
    m = _affine_matrix(ref, tri)
    if np.linalg.det(m) <= 0:
        raise ValueError("vertex correspondence reverses orientation")
    ks, eps, rad = _kernels.triangle_dilatations(ref, tri[None, :, :])
    bound = triangle_bound_constant(ref) * float(rad[0]) / float(eps[0])
    return TriangleMapReport(m, float(ks[0]), float(eps[0]), float(rad[0]), bound)


def triangle_sweep(count: int, rng: np.random.Generator, ref=EQUILATERAL, radius: float = 1.0):
    """Random counterclockwise triangles inscribed in a circle; returns (K, eps, R, bound)."""
    angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=(count, 3)), axis=1)
    pts = radius * np.stack([np.cos(angles), np.sin(angles)], axis=2)
    ks, eps, rad = _kernels.triangle_dilatations(ref, pts)
    bound = triangle_bound_constant(ref) * rad / eps
    return ks, eps, rad, bound


def hyperbolic_distance_uhp(z1, z2) -> float:
    """Distance in the upper half-plane of curvature -1."""
    z1, z2 = complex(*z1) if isinstance(z1, tuple) else complex(z1), complex(*z2) if isinstance(z2, tuple) else complex(z2)
    if z1.imag <= 0 or z2.imag <= 0:
        raise ValueError("points must lie in the upper half-plane")
    arg = 1.0 + abs(z1 - z2) ** 2 / (2.0 * z1.imag * z2.imag)
    return math.acosh(arg)


@dataclass(frozen=True)
class SampledMapReport:
    resolution: tuple[int, int]
    max_dilatation: float
    argmax: tuple[float, float]
    target: float
    d0: float

    @property
    def excess(self) -> float:
        """sup K / e^{2 d0} - 1."""
        return self.max_dilatation / self.target - 1.0

    def passes(self, eps: float, constant: float = CLOSE_MAP_CONSTANT) -> bool:
        return self.max_dilatation <= (1.0 + constant * eps) * self.target * (1.0 + 1e-12)


def _derivative(f, theta: np.ndarray) -> np.ndarray:
    h = 1e-6
    return (f(theta + h) - f(theta - h)) / (2.0 * h)


def close_map_dilatation(r1, r2, n: int, alpha, f=None, fprime=None, grid=(256, 256)) -> SampledMapReport:
    """Sample F(theta, h) = ((1 - h/R1) f(theta) + h (theta + alpha + n)/R1, h R2/R1).

    ``f`` is a lift of a degree-one circle map with f(0) = 0, applied to numpy
    arrays; the identity is used when omitted. The target e^{2 d0} is the
    dilatation of the affine map between the two flat cylinders, where d0 is
    half the curvature -1 distance between i R1 and (alpha + n) + i R2.
    """
    r1, r2, alpha = float(r1), float(r2), float(alpha)
    if r1 <= 0 or r2 <= 0:
        raise ValueError("cylinder heights must be positive")
    if f is None:
        f = lambda x: x  # noqa: E731
        fprime = fprime or (lambda x: np.ones_like(x))
    n_theta, n_h = grid
    theta = np.linspace(0.0, 1.0, n_theta, endpoint=False)
    heights = np.linspace(0.0, r1, n_h)
    fvals = np.asarray(f(theta), dtype=np.float64)
    fp = np.asarray(fprime(theta) if fprime is not None else _derivative(f, theta), dtype=np.float64)
    k, i, j = _kernels.close_map_grid(theta, fvals, fp, heights, r1, r2, alpha + n)
    d_std = hyperbolic_distance_uhp((0.0, r1), (alpha + n, r2))
    return SampledMapReport((n_theta, n_h), k, (float(theta[i]), float(heights[j])), math.exp(d_std), d_std / 2.0)
