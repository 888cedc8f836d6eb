import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kshadow.geometry import (
    DegenerateIncidence,
    Orientation,
    Point,
    PointLocation,
    Segment,
    ValidationError,
    crossing_count,
    is_critical,
    is_reflex,
    orientation,
    point,
    point_in_polygon,
    segment,
    segments_properly_cross,
    to_fraction,
    validate_polygon,
)

from conftest import interior_points

F = Fraction

coords = st.fractions(min_value=-50, max_value=50, max_denominator=60)
points = st.builds(Point, coords, coords)


def test_orientation_examples():
    assert orientation(point(0, 0), point(1, 0), point(0, 1)) is Orientation.LEFT
    assert orientation(point(0, 0), point(1, 0), point(2, 0)) is Orientation.COLLINEAR
    assert orientation(point(0, 0), point(1, 0), point(1, -1)) is Orientation.RIGHT


@given(points, points, points)
def test_orientation_antisymmetric(a, b, c):
    assert orientation(a, b, c) == -orientation(a, c, b)


@given(points, points, points)
def test_orientation_cyclic(a, b, c):
    assert orientation(a, b, c) == orientation(b, c, a)


def test_proper_crossing_examples():
    assert segments_properly_cross(segment((0, 0), (2, 2)), segment((0, 2), (2, 0)))
    assert not segments_properly_cross(segment((0, 0), (1, 1)), segment((2, 2), (3, 3)))
    assert not segments_properly_cross(segment((0, 0), (2, 0)), segment((1, 0), (1, 2)))


@given(points, points, points, points)
def test_proper_crossing_symmetric(a, b, c, d):
    if a == b or c == d:
        return
    s, t = Segment(a, b), Segment(c, d)
    assert segments_properly_cross(s, t) == segments_properly_cross(t, s)
    assert segments_properly_cross(s, t) == segments_properly_cross(s.reversed(), t)


def test_crossing_count_examples(L):
    assert crossing_count(segment((1, 1), (3, 1)), L) == 0
    assert crossing_count(segment((1, F(7, 2)), (3, 1)), L) == 2
    with pytest.raises(DegenerateIncidence):
        crossing_count(segment((1, 1), (3, 3)), L)


def test_crossing_count_collinear_overlap_is_degenerate(L):
    with pytest.raises(DegenerateIncidence):
        crossing_count(segment((1, 0), (3, 0)), L)


def test_crossing_count_endpoint_on_vertex_is_fine(L):
    # endpoints may sit on vertices; only interior incidences are degenerate
    assert crossing_count(segment((2, 2), (1, 1)), L) == 0


def test_point_in_polygon_examples(L):
    assert point_in_polygon(point(1, 1), L) is PointLocation.INSIDE
    assert point_in_polygon(point(2, 3), L) is PointLocation.ON_BOUNDARY
    assert point_in_polygon(point(3, 3), L) is PointLocation.OUTSIDE
    assert point_in_polygon(point(2, 2), L) is PointLocation.ON_BOUNDARY


def _winding(p, verts):
    """Winding number by summing float angles (independent of ray casting)."""
    total = 0.0
    n = len(verts)
    for i in range(n):
        ax, ay = float(verts[i].x - p.x), float(verts[i].y - p.y)
        bx, by = float(verts[(i + 1) % n].x - p.x), float(verts[(i + 1) % n].y - p.y)
        total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return round(total / (2 * math.pi))


def test_point_in_polygon_matches_winding(polygons):
    rng = random.Random(7)
    for P in polygons[:40]:
        x0, y0, x1, y1 = P.bbox
        for _ in range(1000):
            q = Point(F(rng.randint(int(x0) * 97 - 97, int(x1) * 97 + 97), 97),
                      F(rng.randint(int(y0) * 97 - 97, int(y1) * 97 + 97), 97))
            loc = point_in_polygon(q, P)
            if loc is PointLocation.ON_BOUNDARY:
                continue
            assert (loc is PointLocation.INSIDE) == (_winding(q, P.vertices) == 1)


def test_crossing_parity(polygons):
    rng = random.Random(3)
    for P in polygons[:30]:
        x0, y0, x1, y1 = P.bbox
        inner = interior_points(P, 30, rng)
        outer = []
        while len(outer) < 10:
            q = Point(F(rng.randint(int(x0) * 89, int(x1) * 89), 89), F(rng.randint(int(y0) * 89, int(y1) * 89), 89))
            if point_in_polygon(q, P) is PointLocation.OUTSIDE:
                outer.append(q)
        for a, b in zip(inner, inner[1:]):
            try:
                assert crossing_count(Segment(a, b), P) % 2 == 0
            except DegenerateIncidence:
                pass
        for a, b in zip(inner, outer):
            try:
                assert crossing_count(Segment(a, b), P) % 2 == 1
            except DegenerateIncidence:
                pass


def test_crossing_count_reversal(polygons):
    rng = random.Random(4)
    for P in polygons[:30]:
        pts = interior_points(P, 20, rng)
        for a, b in zip(pts, pts[1:]):
            assert crossing_count(Segment(a, b), P) == crossing_count(Segment(b, a), P)


def test_validate_square(sq):
    assert sq.n == 4 and sq.area == 16 and not sq.reoriented


def test_validate_bowtie():
    with pytest.raises(ValidationError) as e:
        validate_polygon([(0, 0), (2, 2), (2, 0), (0, 2)])
    assert e.value.invariant == "self_intersection"
    assert len(e.value.indices) == 2


def test_validate_too_few():
    with pytest.raises(ValidationError) as e:
        validate_polygon([(0, 0), (1, 0)])
    assert e.value.invariant == "too_few_vertices"


def test_validate_repeated_and_collinear():
    with pytest.raises(ValidationError) as e:
        validate_polygon([(0, 0), (4, 0), (4, 4), (0, 0), (0, 4)])
    assert e.value.invariant == "repeated_vertex"
    with pytest.raises(ValidationError) as e:
        validate_polygon([(0, 0), (2, 0), (4, 0), (4, 4), (0, 4)])
    assert e.value.invariant == "collinear_triple"
    assert e.value.indices == (0, 1, 2)


def test_validate_clockwise_is_reversed():
    P = validate_polygon([(0, 0), (0, 4), (4, 4), (4, 0)])
    assert P.reoriented
    assert P.area == 16
    assert P.vertices[0] == point(4, 0)


def test_validate_rejects_touching_edges():
    # vertex (2,0) of the notch touches edge from (0,0) to (4,0)
    with pytest.raises(ValidationError):
        validate_polygon([(0, 0), (4, 0), (4, 4), (2, 0), (0, 4)])


def test_to_fraction_refuses_floats():
    assert to_fraction("0.1") == F(1, 10)
    assert to_fraction("3/7") == F(3, 7)
    with pytest.raises(TypeError):
        to_fraction(0.1)
    with pytest.raises(TypeError):
        to_fraction(True)


def test_reflex_and_critical(L):
    assert [is_reflex(L, i) for i in range(L.n)] == [False, False, False, True, False, False]
    # from (4,0) the reflex vertex (2,2) has both edges on one side
    assert is_critical(L, 3, point(4, 0))
    assert not is_critical(L, 3, point(1, 1))


@settings(max_examples=50)
@given(st.integers(3, 40), st.integers(3, 40), st.fractions(0, 1, max_denominator=20))
def test_crossing_count_rectangle(w, h, t):
    # a horizontal chord through a convex polygon never crosses it
    P = validate_polygon([(0, 0), (w, 0), (w, h), (0, h)])
    y = h * t
    if 0 < y < h:
        assert crossing_count(Segment(Point(F(0), y), Point(F(w), y)), P) == 0
