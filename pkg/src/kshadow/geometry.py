"""Exact predicates and primitives over rational coordinates.

Every decision in this module is made with :class:`fractions.Fraction` or
plain integers.  Hot loops work in an integer frame: all coordinates are
scaled by a common denominator so that orientation tests are products of
Python ints.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, NamedTuple, Sequence


class KShadowError(Exception):
    """Base class for all library errors."""


class DegenerateIncidence(KShadowError):
    """A sight segment passes through a polygon vertex or runs along an edge."""


class ValidationError(KShadowError):
    def __init__(self, invariant: str, indices: Sequence[int] = (), message: str = ""):
        self.invariant = invariant
        self.indices = tuple(indices)
        super().__init__(message or f"{invariant} at vertices {list(self.indices)}")


def to_fraction(value) -> Fraction:
    """Convert an int, Fraction or exact decimal/fraction string to a Fraction.

    Floats are rejected: they would smuggle binary rounding into the geometry.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"unsupported coordinate type {type(value).__name__}")


class Point(NamedTuple):
    x: Fraction
    y: Fraction

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


def point(x, y) -> Point:
    return Point(to_fraction(x), to_fraction(y))


class Segment(NamedTuple):
    a: Point
    b: Point

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


def segment(a, b) -> Segment:
    if a == b:
        raise ValueError("segment endpoints coincide")
    return Segment(point(*a), point(*b))


class Orientation(enum.IntEnum):
    RIGHT = -1
    COLLINEAR = 0
    LEFT = 1


class PointLocation(enum.Enum):
    INSIDE = "inside"
    ON_BOUNDARY = "on_boundary"
    OUTSIDE = "outside"


def cross(ax, ay, bx, by):
    return ax * by - ay * bx


def orient_value(a: Point, b: Point, c: Point) -> Fraction:
    """Twice the signed area of triangle abc."""
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def orientation(a: Point, b: Point, c: Point) -> Orientation:
    v = orient_value(a, b, c)
    return Orientation((v > 0) - (v < 0))


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def on_segment(p: Point, a: Point, b: Point) -> bool:
    """True iff p lies on the closed segment ab."""
    if orient_value(a, b, p) != 0:
        return False
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def segments_properly_cross(s1: Segment, s2: Segment) -> bool:
    """Interiors meet in exactly one point, each segment strictly separating the other's endpoints."""
    o1 = orientation(s1.a, s1.b, s2.a)
    o2 = orientation(s1.a, s1.b, s2.b)
    o3 = orientation(s2.a, s2.b, s1.a)
    o4 = orientation(s2.a, s2.b, s1.b)
    return o1 * o2 < 0 and o3 * o4 < 0


def polygon_area2(verts: Sequence[Point]) -> Fraction:
    """Twice the signed (shoelace) area."""
    n = len(verts)
    s = Fraction(0)
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        s += a.x * b.y - a.y * b.x
    return s


def polygon_area(verts: Sequence[Point]) -> Fraction:
    return polygon_area2(verts) / 2


def classify_point(p: Point, verts: Sequence[Point]) -> PointLocation:
    """Ray casting against an arbitrary simple vertex cycle (either orientation).

    Vertex degeneracies are handled with the half-open rule on y: an edge
    counts when exactly one endpoint lies strictly above the horizontal line
    through p.
    """
    n = len(verts)
    inside = False
    px, py = p
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        if on_segment(p, a, b):
            return PointLocation.ON_BOUNDARY
        if (a.y > py) != (b.y > py):
            # x-coordinate of the edge at height py, compared without division
            t = (b.x - a.x) * (py - a.y) - (px - a.x) * (b.y - a.y)
            if (t > 0) == (b.y > a.y):
                inside = not inside
    return PointLocation.INSIDE if inside else PointLocation.OUTSIDE


@dataclass(frozen=True)
class SimplePolygon:
    """A validated simple polygon with counterclockwise vertices.

    Construct through :func:`validate_polygon`.  ``reoriented`` records that
    the input arrived clockwise and was reversed.
    """

    vertices: tuple[Point, ...]
    reoriented: bool = False
    name: str | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edge(self, i: int) -> Segment:
        return Segment(self.vertices[i], self.vertices[(i + 1) % self.n])

    @property
    def edges(self) -> list[Segment]:
        return [self.edge(i) for i in range(self.n)]

    @cached_property
    def area(self) -> Fraction:
        return polygon_area(self.vertices)

    @cached_property
    def int_frame(self) -> tuple[int, tuple[tuple[int, int], ...]]:
        """(L, integer vertices) with every vertex equal to (X/L, Y/L)."""
        den = 1
        for v in self.vertices:
            den = lcm(den, v.x.denominator, v.y.denominator)
        return den, tuple(
            (v.x.numerator * (den // v.x.denominator), v.y.numerator * (den // v.y.denominator))
            for v in self.vertices
        )

    @cached_property
    def bbox(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def vertex_index(self, p: Point) -> int | None:
        try:
            return self.vertices.index(p)
        except ValueError:
            return None

    def transformed(self, fn) -> "SimplePolygon":
        """Apply an orientation-preserving map to every vertex (indices are kept)."""
        return SimplePolygon(tuple(fn(v) for v in self.vertices), self.reoriented, self.name)


def validate_polygon(vertices: Iterable, name: str | None = None) -> SimplePolygon:
    """Check every SimplePolygon invariant and return the polygon.

    A clockwise cycle is reversed (``reoriented=True``) rather than rejected;
    vertex indices then refer to the reversed order.
    """
    pts = [p if isinstance(p, Point) else point(*p) for p in vertices]
    n = len(pts)
    if n < 3:
        raise ValidationError("too_few_vertices", range(n), f"need at least 3 vertices, got {n}")
    seen: dict[Point, int] = {}
    for i, p in enumerate(pts):
        if p in seen:
            raise ValidationError("repeated_vertex", (seen[p], i))
        seen[p] = i
    for i in range(n):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
        if orient_value(a, b, c) == 0:
            raise ValidationError("collinear_triple", ((i - 1) % n, i, (i + 1) % n))
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = pts[j], pts[(j + 1) % n]
            if _segments_touch(a, b, c, d):
                raise ValidationError("self_intersection", (i, j))
    area2 = polygon_area2(pts)
    reoriented = False
    if area2 < 0:
        pts.reverse()
        reoriented = True
    return SimplePolygon(tuple(pts), reoriented, name)


def _segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool:
    o1 = _sign(orient_value(a, b, c))
    o2 = _sign(orient_value(a, b, d))
    o3 = _sign(orient_value(c, d, a))
    o4 = _sign(orient_value(c, d, b))
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        (o1 == 0 and on_segment(c, a, b))
        or (o2 == 0 and on_segment(d, a, b))
        or (o3 == 0 and on_segment(a, c, d))
        or (o4 == 0 and on_segment(b, c, d))
    )


def point_in_polygon(p: Point, P: SimplePolygon) -> PointLocation:
    return classify_point(p, P.vertices)


def _scaled(poly: SimplePolygon, pts: Sequence[Point]):
    """Integer frame shared by the polygon and some extra points."""
    L, V = poly.int_frame
    D = 1
    for q in pts:
        D = lcm(D, q.x.denominator, q.y.denominator)
    S = L * D
    if D != 1:
        V = tuple((x * D, y * D) for x, y in V)
    out = [(q.x.numerator * (S // q.x.denominator), q.y.numerator * (S // q.y.denominator)) for q in pts]
    return S, V, out


def crossing_count(s: Segment, P: SimplePolygon) -> int:
    """Number of polygon edges the segment properly crosses.

    Raises DegenerateIncidence when the segment passes through a vertex of P
    (other than at its own endpoints) or overlaps an edge collinearly.
    """
    _, V, ((px, py), (qx, qy)) = _scaled(P, (s.a, s.b))
    n = len(V)
    dx, dy = qx - px, qy - py
    side = [dx * (vy - py) - dy * (vx - px) for vx, vy in V]
    if dx == 0 and dy == 0:
        return 0
    lox, hix = min(px, qx), max(px, qx)
    loy, hiy = min(py, qy), max(py, qy)
    for i in range(n):
        if side[i] == 0:
            vx, vy = V[i]
            if lox <= vx <= hix and loy <= vy <= hiy and (vx, vy) != (px, py) and (vx, vy) != (qx, qy):
                raise DegenerateIncidence(f"segment passes through vertex {i}")
    count = 0
    for i in range(n):
        j = (i + 1) % n
        si, sj = side[i], side[j]
        if si == 0 and sj == 0:
            ax, ay = V[i]
            bx, by = V[j]
            # collinear with the edge: overlap of positive length is degenerate
            if dx != 0:
                lo, hi = sorted((ax, bx))
                overlap = min(hi, hix) - max(lo, lox)
            else:
                lo, hi = sorted((ay, by))
                overlap = min(hi, hiy) - max(lo, loy)
            if overlap > 0:
                raise DegenerateIncidence(f"segment overlaps edge {i}")
            continue
        if si * sj >= 0:
            continue
        ax, ay = V[i]
        bx, by = V[j]
        ex, ey = bx - ax, by - ay
        o1 = ex * (py - ay) - ey * (px - ax)
        o2 = ex * (qy - ay) - ey * (qx - ax)
        if o1 * o2 < 0:
            count += 1
    return count


def intersection_point(a: Point, b: Point, c: Point, d: Point) -> Point:
    """Intersection of the (non-parallel) lines ab and cd."""
    rx, ry = b.x - a.x, b.y - a.y
    sx, sy = d.x - c.x, d.y - c.y
    den = rx * sy - ry * sx
    t = ((c.x - a.x) * sy - (c.y - a.y) * sx) / den
    return Point(a.x + t * rx, a.y + t * ry)


def segment_contacts(a: Point, b: Point, c: Point, d: Point) -> list[Point]:
    """All points where closed segments ab and cd meet.

    Returns [] when disjoint, one point for a crossing or touch, and the two
    ends of the shared piece for a collinear overlap.
    """
    if max(a.x, b.x) < min(c.x, d.x) or max(c.x, d.x) < min(a.x, b.x):
        return []
    if max(a.y, b.y) < min(c.y, d.y) or max(c.y, d.y) < min(a.y, b.y):
        return []
    o1 = _sign(orient_value(a, b, c))
    o2 = _sign(orient_value(a, b, d))
    if o1 == 0 and o2 == 0:
        pts = sorted({p for p in (a, b, c, d) if on_segment(p, a, b) and on_segment(p, c, d)})
        if not pts:
            return []
        return [pts[0]] if len(pts) == 1 else [pts[0], pts[-1]]
    o3 = _sign(orient_value(c, d, a))
    o4 = _sign(orient_value(c, d, b))
    if o1 * o2 > 0 or o3 * o4 > 0:
        return []
    if o1 == 0:
        return [c]
    if o2 == 0:
        return [d]
    if o3 == 0:
        return [a]
    if o4 == 0:
        return [b]
    return [intersection_point(a, b, c, d)]


def is_reflex(P: SimplePolygon, i: int) -> bool:
    n = P.n
    return orient_value(P.vertices[i - 1], P.vertices[i], P.vertices[(i + 1) % n]) < 0


def is_critical(P: SimplePolygon, i: int, observer: Point) -> bool:
    """Both edges at vertex i lie (weakly) on one side of the line through the observer and the vertex."""
    v = P.vertices[i]
    if v == observer:
        return False
    u = P.vertices[i - 1]
    w = P.vertices[(i + 1) % P.n]
    s1 = _sign(orient_value(observer, v, u))
    s2 = _sign(orient_value(observer, v, w))
    return s1 * s2 >= 0
