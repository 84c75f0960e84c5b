"""Plane vectors over a quadratic field and the exact predicates built on them."""

from __future__ import annotations

from .numberfield import QuadExt, as_quad

__all__ = ["Vec2", "cross", "dot", "orient", "half_plane", "ccw_before", "half_turns"]

_ZERO = QuadExt(0)


class Vec2:
    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = as_quad(x)
        self.y = as_quad(y)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def scale(self, c) -> "Vec2":
        return Vec2(self.x * c, self.y * c)

    def signed(self, s: int) -> "Vec2":
        return self if s > 0 else -self

    def norm2(self) -> QuadExt:
        return self.x * self.x + self.y * self.y

    def is_zero(self) -> bool:
        return not self.x and not self.y

    def transform(self, m) -> "Vec2":
        (a, b), (c, d) = m
        return Vec2(a * self.x + b * self.y, c * self.x + d * self.y)

    def __eq__(self, other):
        if not isinstance(other, Vec2):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def __float__(self):  # pragma: no cover - guard against silent misuse
        raise TypeError("a vector has no single float value")

    def floats(self) -> tuple[float, float]:
        return float(self.x), float(self.y)

    def key(self) -> tuple:
        """Total-order key usable for lexicographic tie breaks."""
        return (_OrderKey(self.x), _OrderKey(self.y))

    def __repr__(self):
        return f"Vec2({self.x.render()}, {self.y.render()})"


class _OrderKey:
    """Wraps a field element so tuples of them sort exactly."""

    __slots__ = ("v",)

    def __init__(self, v: QuadExt):
        self.v = v

    def __lt__(self, other):
        return self.v < other.v

    def __eq__(self, other):
        return self.v == other.v

    def __hash__(self):
        return hash(self.v)


def cross(u: Vec2, v: Vec2) -> QuadExt:
    return u.x * v.y - u.y * v.x


def dot(u: Vec2, v: Vec2) -> QuadExt:
    return u.x * v.x + u.y * v.y


def orient(p: Vec2, q: Vec2, r: Vec2) -> int:
    """Sign of the turn p -> q -> r (+1 left, -1 right, 0 collinear)."""
    return cross(q - p, r - p).sign()


def half_plane(u: Vec2) -> int:
    """0 for directions with angle in [0, pi), 1 for [pi, 2 pi)."""
    sy = u.y.sign()
    if sy > 0 or (sy == 0 and u.x.sign() > 0):
        return 0
    return 1


def ccw_before(u: Vec2, w: Vec2) -> bool:
    """True when angle(u) < angle(w), angles taken in [0, 2 pi)."""
    hu, hw = half_plane(u), half_plane(w)
    if hu != hw:
        return hu < hw
    return cross(u, w).sign() > 0


def half_turns(u: Vec2, w: Vec2) -> int:
    """Multiples of pi met while sweeping counterclockwise from u to w.

    The sweep is the one of angle in (0, 2 pi]; a full turn (w parallel to u
    in the same sense) counts 2. Summed over the corners of a closed sweep
    this gives the total angle divided by pi.
    """
    hu, hw = half_plane(u), half_plane(w)
    if ccw_before(u, w):
        return hw - hu
    return hw + 2 - hu
