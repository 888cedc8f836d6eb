"""k-visibility between points and k-visibility regions of a point.

The region is computed by a rotational sweep.  Directions from the source to
every polygon vertex cut the plane into open wedges; inside a wedge no vertex
is met, so every ray crosses the same ordered list of edges.  The stretch of
the ray between the j-th and (j+1)-th crossing is a convex piece (triangle or
quadrilateral) whose points all have crossing count j.  Pieces inside P with
j <= k are visible, the rest of P is shadow.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, cmp_to_key
from math import lcm
from typing import Sequence

import numpy as np

from .geometry import (
    DegenerateIncidence,
    KShadowError,
    Point,
    PointLocation,
    Segment,
    SimplePolygon,
    crossing_count,
    is_critical,
    is_reflex,
    on_segment,
    orient_value,
    point_in_polygon,
    polygon_area,
)


class InvalidK(KShadowError):
    pass


class SourceOutside(KShadowError):
    pass


class Tag(str, enum.Enum):
    WALL = "wall"
    WINDOW = "window"
    # radial side shared with another visible face of the same region
    SHARED = "shared"


def check_k(k: int) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or k < 0 or k % 2:
        raise InvalidK(f"k must be an even non-negative integer, got {k!r}")


# ---------------------------------------------------------------------------
# point queries


def _symbolic_sign(c0, c1, c2) -> int:
    for c in (c0, c1, c2):
        if c:
            return 1 if c > 0 else -1
    return 0


def _perturbed_count(p: Point, q: Point, P: SimplePolygon) -> int:
    """Crossing count of p -> q + (eps, eps^2) in the limit eps -> 0+.

    Each orientation becomes a polynomial in eps; its sign is the sign of the
    first non-zero coefficient, so the result is exact and never degenerate
    with respect to the moving endpoint.
    """
    from .geometry import _scaled

    _, V, ((px, py), (qx, qy)) = _scaled(P, (p, q))
    n = len(V)
    count = 0
    for i in range(n):
        ax, ay = V[i]
        bx, by = V[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        o1 = ex * (py - ay) - ey * (px - ax)
        if o1 == 0:
            # p on the edge's line: the segment cannot cross the edge properly
            continue
        # orient(a, b, q + d) with d = (eps, eps^2)
        o2 = _symbolic_sign(ex * (qy - ay) - ey * (qx - ax), -ey, ex)
        if (o1 > 0) == (o2 > 0):
            continue
        # orient(p, q + d, a) = cross(q - p, a - p) + cross(d, a - p)
        wax, way = ax - px, ay - py
        wbx, wby = bx - px, by - py
        dx, dy = qx - px, qy - py
        o3 = _symbolic_sign(dx * way - dy * wax, way, -wax)
        o4 = _symbolic_sign(dx * wby - dy * wbx, wby, -wbx)
        if o3 * o4 < 0:
            count += 1
    return count


def sight_crossings(p: Point, q: Point, P: SimplePolygon) -> int:
    """Crossing count of segment pq, resolving degeneracy by symbolic perturbation of q."""
    if p == q:
        return 0
    try:
        return crossing_count(Segment(p, q), P)
    except DegenerateIncidence:
        return _perturbed_count(p, q, P)


def is_k_visible(p: Point, q: Point, P: SimplePolygon, k: int) -> bool:
    return sight_crossings(p, q, P) <= k


def oracle_crossings(p: Point, q: Point, P: SimplePolygon) -> int:
    """Brute-force crossing count with an explicit shrinking perturbation of q.

    Independent of the sweep and of the symbolic route: plain Fraction
    arithmetic, every edge tested on its own.  When pq is degenerate the
    endpoint is moved to q + (e, e^2) for e = 2^-j, j growing until the
    segment is clean and the count agrees for two successive j.
    """
    if p == q:
        return 0

    def count(q2: Point) -> int | None:
        total = 0
        for v in P.vertices:
            if v != p and v != q2 and on_segment(v, p, q2):
                return None
        for i in range(P.n):
            a = P.vertices[i]
            b = P.vertices[(i + 1) % P.n]
            o_p = orient_value(a, b, p)
            o_q = orient_value(a, b, q2)
            o_a = orient_value(p, q2, a)
            o_b = orient_value(p, q2, b)
            if o_a == 0 and o_b == 0 and o_p == 0:
                # collinear: overlapping a piece of the edge is degenerate
                lo = max(min(a.x, b.x), min(p.x, q2.x)), max(min(a.y, b.y), min(p.y, q2.y))
                hi = min(max(a.x, b.x), max(p.x, q2.x)), min(max(a.y, b.y), max(p.y, q2.y))
                if (hi[0] - lo[0]) + (hi[1] - lo[1]) > 0 and hi[0] >= lo[0] and hi[1] >= lo[1]:
                    return None
                continue
            if o_p * o_q < 0 and o_a * o_b < 0:
                total += 1
        return total

    c = count(q)
    if c is not None:
        return c
    span = max(abs(v.x) + abs(v.y) for v in P.vertices) + abs(p.x) + abs(p.y) + 1
    e = Fraction(1, 1 << 20) / span
    prev = None
    while True:
        c = count(Point(q.x + e, q.y + e * e))
        if c is not None and c == prev:
            return c
        prev = c
        e /= 1 << 8


def oracle_is_k_visible(p: Point, q: Point, P: SimplePolygon, k: int) -> bool:
    return oracle_crossings(p, q, P) <= k


def oracle_crossings_batch(P: SimplePolygon, p: Point, qs: Sequence[Point] | None = None,
                           qxy: tuple[np.ndarray, np.ndarray] | None = None,
                           exact=None):
    """Vectorised brute-force crossing counts from p to many targets.

    Orientation signs are evaluated in float64 with a static error filter;
    any value whose magnitude falls below the filter bound is recomputed in
    exact rational arithmetic, so every sign used is exact.  Targets are given
    as Points, or as float arrays ``qxy`` plus a callable ``exact(i)``
    returning the exact i-th target.  Returns (counts, degenerate) where
    degenerate marks segments through a vertex or along an edge.
    """
    if qs is not None:
        qx = np.array([float(q.x) for q in qs])
        qy = np.array([float(q.y) for q in qs])
        exact = qs.__getitem__
    else:
        qx, qy = qxy
    cx = float((P.bbox[0] + P.bbox[2]) / 2)
    cy = float((P.bbox[1] + P.bbox[3]) / 2)
    qx = qx - cx
    qy = qy - cy
    scale = max(float(P.bbox[2] - P.bbox[0]), float(P.bbox[3] - P.bbox[1]), 1.0)
    scale = max(scale, float(abs(p.x - cx)) * 2, float(abs(p.y - cy)) * 2)
    tol = 1e-9 * scale * scale
    pxf, pyf = float(p.x) - cx, float(p.y) - cy

    def fix(vals, fn):
        bad = np.nonzero(np.abs(vals) < tol)[0]
        if len(bad):
            vals = vals.copy()
            for i in bad:
                vals[i] = _sign_frac(fn(exact(int(i))))
        return np.sign(vals)

    m = len(qx)
    counts = np.zeros(m, dtype=np.int64)
    degenerate = np.zeros(m, dtype=bool)
    verts = P.vertices
    # orient(p, q, v) for every vertex, reused by both incident edges
    side = []
    for v in verts:
        vxf, vyf = float(v.x) - cx, float(v.y) - cy
        val = (qx - pxf) * (vyf - pyf) - (qy - pyf) * (vxf - pxf)
        side.append(fix(val, lambda q, v=v: orient_value(p, q, v)))
    for i, v in enumerate(verts):
        if v == p:
            continue
        vxf, vyf = float(v.x) - cx, float(v.y) - cy
        hit = (side[i] == 0)
        if hit.any():
            idx = np.nonzero(hit)[0]
            for j in idx:
                q = exact(int(j))
                if q != v and on_segment(v, p, q):
                    degenerate[j] = True
    for i in range(P.n):
        a = verts[i]
        b = verts[(i + 1) % P.n]
        o_p = _sign_frac(orient_value(a, b, p))
        if o_p == 0:
            # p on the edge line: no proper crossing, but the segment may run along the edge
            both = (side[i] == 0) & (side[(i + 1) % P.n] == 0)
            for j in np.nonzero(both)[0]:
                if _collinear_overlap(p, exact(int(j)), a, b):
                    degenerate[j] = True
            continue
        axf, ayf = float(a.x) - cx, float(a.y) - cy
        bxf, byf = float(b.x) - cx, float(b.y) - cy
        val = (bxf - axf) * (qy - ayf) - (byf - ayf) * (qx - axf)
        o_q = fix(val, lambda q, a=a, b=b: orient_value(a, b, q))
        crossing = (o_q * o_p < 0) & (side[i] * side[(i + 1) % P.n] < 0)
        counts += crossing
    return counts, degenerate


def _collinear_overlap(p: Point, q: Point, a: Point, b: Point) -> bool:
    if p == q:
        return False
    key = (lambda r: r.x) if p.x != q.x else (lambda r: r.y)
    lo1, hi1 = sorted((key(p), key(q)))
    lo2, hi2 = sorted((key(a), key(b)))
    return min(hi1, hi2) - max(lo1, lo2) > 0


def _sign_frac(v) -> int:
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# rotational sweep


def _half(dx: int, dy: int) -> int:
    return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1


def _angle_cmp(a, b) -> int:
    ha, hb = _half(*a), _half(*b)
    if ha != hb:
        return ha - hb
    c = a[0] * b[1] - a[1] * b[0]
    return -1 if c > 0 else (1 if c < 0 else 0)


@dataclass
class Ray:
    dx: int
    dy: int
    verts: list = field(default_factory=list)  # (t, vertex index), sorted by t
    walls: list = field(default_factory=list)  # (t0, t1, edge index), polygon edges lying on the ray


@dataclass
class Wedge:
    lo: int
    hi: int
    edges: list  # crossing edges ordered outward
    t_lo: list  # their parameters on ray lo
    t_hi: list  # and on ray hi
    inside0: bool  # whether the ray starts inside P

    def intervals(self, side: str):
        """Closed parameter intervals on ray lo/hi, one per stretch between crossings.

        Yields (j, t0, t1, inside); the last, unbounded stretch is omitted.
        """
        ts = self.t_lo if side == "lo" else self.t_hi
        prev = Fraction(0)
        inside = self.inside0
        for j, t in enumerate(ts):
            yield j, prev, t, inside
            prev = t
            inside = not inside


class Sweep:
    """Combinatorial angular structure of P around a source point."""

    def __init__(self, P: SimplePolygon, source: Point):
        self.P = P
        self.source = source
        loc = point_in_polygon(source, P)
        if loc is PointLocation.OUTSIDE:
            raise SourceOutside(f"source {source} is outside the polygon")
        L, V = P.int_frame
        D = lcm(source.x.denominator, source.y.denominator)
        S = L * D
        self.scale = S
        if D != 1:
            V = tuple((x * D, y * D) for x, y in V)
        self.V = V
        sx = source.x.numerator * (S // source.x.denominator)
        sy = source.y.numerator * (S // source.y.denominator)
        self.sx, self.sy = sx, sy
        n = P.n
        dirs = [(x - sx, y - sy) for x, y in V]
        self.src_vertex = None
        self.src_edge = None
        for i, d in enumerate(dirs):
            if d == (0, 0):
                self.src_vertex = i
        if self.src_vertex is None and loc is PointLocation.ON_BOUNDARY:
            for i in range(n):
                if on_segment(source, P.vertices[i], P.vertices[(i + 1) % n]):
                    self.src_edge = i
                    break
        order = sorted((i for i in range(n) if dirs[i] != (0, 0)), key=lambda i: cmp_to_key(_angle_cmp)(dirs[i]))
        rays: list[Ray] = []
        pos = [None] * n
        tv = [None] * n
        for i in order:
            d = dirs[i]
            if rays:
                r = rays[-1]
                if r.dx * d[1] - r.dy * d[0] == 0 and r.dx * d[0] + r.dy * d[1] > 0:
                    t = Fraction(d[0], r.dx) if r.dx else Fraction(d[1], r.dy)
                    r.verts.append((t, i))
                    pos[i] = len(rays) - 1
                    tv[i] = t
                    continue
            rays.append(Ray(d[0], d[1], [(Fraction(1), i)]))
            pos[i] = len(rays) - 1
            tv[i] = Fraction(1)
        if len(rays) > 1 and _angle_cmp((rays[0].dx, rays[0].dy), (rays[-1].dx, rays[-1].dy)) == 0:
            # first and last group share a direction (cannot happen after sort, kept as a guard)
            raise AssertionError("direction grouping failed")
        for r in rays:
            r.verts.sort()
        m = len(rays)
        self.rays = rays
        self.pos = pos
        self.tv = tv
        wedge_edges: list[list[int]] = [[] for _ in range(m)]
        for e in range(n):
            i, j = e, (e + 1) % n
            a, b = dirs[i], dirs[j]
            if a == (0, 0) or b == (0, 0):
                other = j if a == (0, 0) else i
                rays[pos[other]].walls.append((Fraction(0), tv[other], e))
                continue
            c = a[0] * b[1] - a[1] * b[0]
            if c == 0:
                if a[0] * b[0] + a[1] * b[1] > 0:
                    t0, t1 = sorted((tv[i], tv[j]))
                    rays[pos[i]].walls.append((t0, t1, e))
                else:
                    rays[pos[i]].walls.append((Fraction(0), tv[i], e))
                    rays[pos[j]].walls.append((Fraction(0), tv[j], e))
                continue
            first, last = (pos[i], pos[j]) if c > 0 else (pos[j], pos[i])
            w = first
            while w != last:
                wedge_edges[w].append(e)
                w = (w + 1) % m
        for r in rays:
            r.walls.sort()
        tcache: dict = {}

        def tparam(e: int, r: int) -> Fraction:
            key = (e, r)
            t = tcache.get(key)
            if t is None:
                ax, ay = V[e]
                bx, by = V[(e + 1) % n]
                ex, ey = bx - ax, by - ay
                ray = rays[r]
                t = Fraction((ax - sx) * ey - (ay - sy) * ex, ray.dx * ey - ray.dy * ex)
                tcache[key] = t
            return t

        wedges = []
        for w in range(m):
            hi = (w + 1) % m
            lo_r, hi_r = rays[w], rays[hi]
            c = lo_r.dx * hi_r.dy - lo_r.dy * hi_r.dx
            es = wedge_edges[w]
            if m == 1 or c <= 0:
                if es:
                    raise AssertionError("edge crossing a wedge of at least 180 degrees")
                wedges.append(Wedge(w, hi, [], [], [], False))
                continue
            rx, ry = lo_r.dx + hi_r.dx, lo_r.dy + hi_r.dy
            inside0 = self._starts_inside(rx, ry, dirs)
            keyed = sorted((tparam(e, w), tparam(e, hi), e) for e in es)
            edges = [e for _, _, e in keyed]
            wedges.append(Wedge(w, hi, edges, [a for a, _, _ in keyed], [b for _, b, _ in keyed], inside0))
            if inside0 != (len(edges) % 2 == 1):
                raise AssertionError("inconsistent crossing parity in wedge")
        self.wedges = wedges

    def _starts_inside(self, rx: int, ry: int, dirs) -> bool:
        if self.src_vertex is not None:
            i = self.src_vertex
            n = self.P.n
            a = dirs[(i + 1) % n]  # towards next vertex
            b = dirs[i - 1]  # towards previous vertex
            cab = a[0] * b[1] - a[1] * b[0]
            ca = a[0] * ry - a[1] * rx
            cb = rx * b[1] - ry * b[0]
            if cab > 0:
                return ca > 0 and cb > 0
            # reflex interior angle: inside unless in the closed convex complement
            cba = b[0] * ry - b[1] * rx
            cra = rx * a[1] - ry * a[0]
            return not (cba >= 0 and cra >= 0)
        if self.src_edge is not None:
            ax, ay = self.V[self.src_edge]
            bx, by = self.V[(self.src_edge + 1) % self.P.n]
            return (bx - ax) * ry - (by - ay) * rx > 0
        return True

    def at(self, r: int, t: Fraction) -> Point:
        """Exact point at parameter t on ray r."""
        ray = self.rays[r]
        S = self.scale
        return Point((self.sx + t * ray.dx) / S, (self.sy + t * ray.dy) / S)

    def side_intervals(self, r: int):
        """Inside intervals touching ray r from both sides.

        Returns two lists of (t0, t1, j, wedge) for the wedge ending at r
        ("cw" side) and the wedge starting at r ("ccw" side).
        """
        m = len(self.rays)
        cw = self.wedges[(r - 1) % m]
        ccw = self.wedges[r]
        left = [(t0, t1, j, cw) for j, t0, t1, ins in cw.intervals("hi") if ins]
        right = [(t0, t1, j, ccw) for j, t0, t1, ins in ccw.intervals("lo") if ins]
        return left, right


# ---------------------------------------------------------------------------
# interval helpers (closed intervals of Fractions)


def union(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return out


def subtract(intervals, holes):
    """Positive-length parts of ``intervals`` not covered by ``holes``."""
    out = []
    holes = union(holes)
    for a, b in intervals:
        cur = a
        for h0, h1 in holes:
            if h1 <= cur or h0 >= b:
                continue
            if h0 > cur:
                out.append((cur, h0))
            cur = max(cur, h1)
        if cur < b:
            out.append((cur, b))
    return [(a, b) for a, b in out if b > a]


def overlap_len(a0, a1, b0, b1):
    return min(a1, b1) - max(a0, b0)


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class WindowSegment:
    seg: Segment
    source_vertex: int | None
    level: int


@dataclass
class VisibilityRegion:
    """Points of P that are k-visible from ``source``.

    ``faces`` are the convex sweep pieces (vertex cycles, counterclockwise);
    ``boundary_tags[f][i]`` tags the edge from vertex i to vertex i+1 of face f.
    """

    source: Point
    k: int
    polygon: SimplePolygon
    faces: list[tuple[Point, ...]]
    boundary_tags: list[tuple[Tag, ...]]
    windows: list[tuple[Point, Point]]
    source_vertex: int | None = None

    @cached_property
    def area(self) -> Fraction:
        return sum((polygon_area(f) for f in self.faces), Fraction(0))

    def contains(self, q: Point) -> bool:
        """Closed-set membership (q on a face or its boundary)."""
        for f in self.faces:
            if _in_convex(q, f):
                return True
        return False


def _in_convex(q: Point, face: Sequence[Point]) -> bool:
    n = len(face)
    for i in range(n):
        if orient_value(face[i], face[(i + 1) % n], q) < 0:
            return False
    return True


def _piece_polygon(sw: Sweep, w: Wedge, j: int):
    """Vertex cycle of stretch j in wedge w plus the (side, t0, t1) of each edge.

    Sides: ("lo", t0, t1) radial on ray lo, ("hi", ...) radial on ray hi,
    ("wall", edge) for pieces of polygon edges.
    """
    n0_lo = w.t_lo[j - 1] if j else Fraction(0)
    n0_hi = w.t_hi[j - 1] if j else Fraction(0)
    f_lo, f_hi = w.t_lo[j], w.t_hi[j]
    pts = [
        (sw.at(w.lo, n0_lo), ("lo", n0_lo, f_lo)),
        (sw.at(w.lo, f_lo), ("wall", w.edges[j])),
        (sw.at(w.hi, f_hi), ("hi", f_hi, n0_hi)),
        (sw.at(w.hi, n0_hi), ("wall", w.edges[j - 1]) if j else ("apex",)),
    ]
    out = []
    for i, (p, side) in enumerate(pts):
        nxt = pts[(i + 1) % 4][0]
        if p != nxt:
            out.append((p, side))
    return out


def _ray_windows(sw: Sweep, r: int, k: int, boost: bool = False):
    """Windows on ray r: where k-visibility differs between its two sides.

    With ``boost`` the counts of a side whose wedge starts inside P are
    raised by 2 (see ``vertex_windows``).
    """
    left, right = sw.side_intervals(r)
    m = len(sw.rays)
    bl = 2 if boost and sw.wedges[(r - 1) % m].inside0 else 0
    br = 2 if boost and sw.wedges[r].inside0 else 0
    vis_l = union([(a, b) for a, b, j, _ in left if j + bl <= k])
    vis_r = union([(a, b) for a, b, j, _ in right if j + br <= k])
    only_l = subtract(vis_l, vis_r)
    only_r = subtract(vis_r, vis_l)
    walls = [(a, b) for a, b, _ in sw.rays[r].walls]
    return union(subtract(only_l, walls) + subtract(only_r, walls)), walls


def k_visibility_region(P: SimplePolygon, source: Point, k: int) -> VisibilityRegion:
    check_k(k)
    sw = Sweep(P, source)
    m = len(sw.rays)
    win = {}
    walls = {}
    for r in range(m):
        win[r], walls[r] = _ray_windows(sw, r, k)
    faces = []
    tags = []
    for w in sw.wedges:
        for j, _, _, inside in w.intervals("lo"):
            if not inside or j > k:
                continue
            cyc = _piece_polygon(sw, w, j)
            verts: list[Point] = []
            etags: list[Tag] = []
            for idx, (p, side) in enumerate(cyc):
                if side[0] in ("wall", "apex"):
                    verts.append(p)
                    etags.append(Tag.WALL)
                    continue
                r = w.lo if side[0] == "lo" else w.hi
                t0, t1 = side[1], side[2]
                lo_t, hi_t = min(t0, t1), max(t0, t1)
                cuts = {lo_t, hi_t}
                for a, b in win[r] + walls[r]:
                    for c in (a, b):
                        if lo_t < c < hi_t:
                            cuts.add(c)
                cuts = sorted(cuts, reverse=(t0 > t1))
                for c0, c1 in zip(cuts, cuts[1:]):
                    mid = (c0 + c1) / 2
                    if any(a <= mid <= b for a, b in walls[r]):
                        tag = Tag.WALL
                    elif any(a <= mid <= b for a, b in win[r]):
                        tag = Tag.WINDOW
                    else:
                        tag = Tag.SHARED
                    verts.append(sw.at(r, c0))
                    etags.append(tag)
            faces.append(tuple(verts))
            tags.append(tuple(etags))
    windows = []
    for r in range(m):
        for a, b in win[r]:
            windows.append((sw.at(r, a), sw.at(r, b)))
    return VisibilityRegion(source, k, P, faces, tags, windows, sw.src_vertex)


def region_windows(R: VisibilityRegion) -> list[WindowSegment]:
    """Maximal Window boundary pieces of R with their provenance."""
    return [WindowSegment(Segment(a, b), R.source_vertex, R.k) for a, b in R.windows]


def window_is_anchored(P: SimplePolygon, source: Point, w: WindowSegment) -> bool:
    """The window's supporting line passes through a vertex critical to ``source``."""
    for i, v in enumerate(P.vertices):
        if v != source and orient_value(w.seg.a, w.seg.b, v) == 0 and is_critical(P, i, source):
            return True
    return False


def vertex_windows(P: SimplePolygon, i: int, levels: Sequence[int]) -> dict[int, list[tuple[Point, Point]]]:
    """Windows of the m-visibility regions of vertex i for each m in ``levels``, from one sweep.

    Counts from a vertex are taken from points just inside P next to it.
    At a reflex vertex such points see a ray through its interior cone with
    either 0 or 2 extra crossings depending on which side of the vertex they
    lie, while rays outside the cone always get exactly 1.  On the two rays
    where the cone meets the outside (the incident edge lines past the
    neighbours) the "+2 versus +1" comparison is not a lower level's window,
    so it is added explicitly.
    """
    sw = Sweep(P, P.vertices[i])
    reflex = is_reflex(P, i)
    m_rays = len(sw.rays)
    out = {}
    for m in levels:
        check_k(m)
        segs = []
        for r in range(m_rays):
            ws = _ray_windows(sw, r, m)[0]
            if reflex and sw.wedges[(r - 1) % m_rays].inside0 != sw.wedges[r].inside0:
                ws = union(ws + _ray_windows(sw, r, m, boost=True)[0])
            for a, b in ws:
                segs.append((sw.at(r, a), sw.at(r, b)))
        out[m] = segs
    return out
