"""Random simple polygons and a few hand-built fixtures."""

from __future__ import annotations

import random
from fractions import Fraction

from .geometry import Segment, SimplePolygon, ValidationError, orient_value, point, segments_properly_cross, validate_polygon


def _no_three_collinear(pts) -> bool:
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if orient_value(pts[i], pts[j], pts[k]) == 0:
                    return False
    return True


def _untangle(pts: list) -> list:
    """2-opt: reverse chains until no two edges cross.

    Every reversal strictly shortens the tour, so the loop terminates.
    """
    n = len(pts)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                c, d = pts[j], pts[(j + 1) % n]
                if segments_properly_cross(Segment(a, b), Segment(c, d)):
                    pts[i + 1 : j + 1] = reversed(pts[i + 1 : j + 1])
                    changed = True
                    break
            if changed:
                break
    return pts


def random_polygon(n: int, rng: random.Random, size: int = 100, name: str | None = None) -> SimplePolygon:
    """Simple polygon on n distinct integer points of [0, size)^2, no three collinear."""
    if n < 3:
        raise ValueError("n must be at least 3")
    while True:
        cells = rng.sample(range(size * size), n)
        pts = [point(c % size, c // size) for c in cells]
        if not _no_three_collinear(pts):
            continue
        rng.shuffle(pts)
        pts = _untangle(pts)
        try:
            return validate_polygon(pts, name=name)
        except ValidationError:
            continue


def corpus(count: int = 200, seed: int = 20240601, n_min: int = 4, n_max: int = 12) -> list[SimplePolygon]:
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(n_min, n_max)
        out.append(random_polygon(n, rng, name=f"rand{i:03d}"))
    return out


def square() -> SimplePolygon:
    return validate_polygon([(0, 0), (4, 0), (4, 4), (0, 4)], name="square")


def l_polygon() -> SimplePolygon:
    return validate_polygon([(0, 0), (4, 0), (4, 2), (2, 2), (2, 4), (0, 4)], name="L")


def rationalize(P: SimplePolygon, denom: int = 7) -> SimplePolygon:
    """Same shape with non-integer coordinates (scaled by 1/denom, shifted by 1/3)."""
    return validate_polygon(
        [(v.x / denom + Fraction(1, 3), v.y / denom + Fraction(1, 3)) for v in P.vertices],
        name=(P.name or "poly") + "_q",
    )


def hanging_bar() -> SimplePolygon:
    """Room with a T-shaped bar hanging from a ledge; at k=2 seen from (20, 1) it casts edge shadows."""
    return validate_polygon(
        [(0, 0), (40, 0), (40, 16), (21, 16), (21, 12), (24, 12), (24, 10), (16, 10),
         (16, 12), (19, 12), (19, 16), (6, 16), (6, 18), (40, 18), (40, 24), (0, 24)],
        name="hanging_bar",
    )


def _pocket(a: int) -> list[tuple[int, int]]:
    # hook-shaped pocket hanging below the corridor, entered at x in [a, a+2]
    return [(a, 20), (a, 12), (a + 6, 12), (a + 6, 2), (a + 8, 2), (a + 8, 14), (a + 2, 14), (a + 2, 20)]


def comb(pockets: int = 3) -> SimplePolygon:
    """Corridor y in [20, 22] with hooked pockets hanging below it."""
    width = 14 * pockets + 12
    verts = [(0, 22), (0, 20)]
    for i in range(pockets):
        verts += _pocket(4 + 14 * i)
    verts += [(width, 20), (width, 22)]
    return validate_polygon(verts, name=f"comb{pockets}")
