"""The k-cell decomposition: overlay of all vertex window segments inside P."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, cmp_to_key
from math import gcd
from typing import Sequence

from .geometry import (
    KShadowError,
    Point,
    PointLocation,
    Segment,
    SimplePolygon,
    classify_point,
    on_segment,
    point_in_polygon,
    polygon_area,
    segment_contacts,
)
from .kvis import _angle_cmp, check_k, vertex_windows


class PointOutside(KShadowError):
    pass


class _OnSkeleton:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "ON_SKELETON"


ON_SKELETON = _OnSkeleton()


@dataclass(frozen=True)
class PartitionSegment:
    seg: Segment
    source_vertex: int
    level: int
    provenance: tuple[tuple[int, int], ...] = ()


def _line_key(a: Point, b: Point):
    """Integer (A, B, C) with A x + B y = C for the line through a, b, normalised."""
    A = b.y - a.y
    B = a.x - b.x
    C = A * a.x + B * a.y
    den = 1
    for v in (A, B, C):
        den = den * v.denominator // gcd(den, v.denominator)
    A, B, C = int(A * den), int(B * den), int(C * den)
    g = gcd(gcd(abs(A), abs(B)), abs(C)) or 1
    A, B, C = A // g, B // g, C // g
    if A < 0 or (A == 0 and B < 0):
        A, B, C = -A, -B, -C
    return A, B, C


def _param(p: Point, key) -> Fraction:
    A, B, _ = key
    # coordinate along the line that increases monotonically
    return p.y if B == 0 else p.x


def merge_segments(raw: Sequence[tuple[Point, Point, int, int]]) -> list[PartitionSegment]:
    """Merge collinear touching/overlapping segments, keeping (source, level) provenance."""
    by_line: dict = {}
    for a, b, src, lvl in raw:
        key = _line_key(a, b)
        by_line.setdefault(key, []).append((a, b, src, lvl))
    out = []
    for key in sorted(by_line):
        items = []
        for a, b, src, lvl in by_line[key]:
            if _param(a, key) > _param(b, key):
                a, b = b, a
            items.append((_param(a, key), _param(b, key), a, b, src, lvl))
        items.sort(key=lambda t: (t[0], t[1], t[4], t[5]))
        cur = None
        for t0, t1, a, b, src, lvl in items:
            if cur is not None and t0 <= cur[1]:
                if t1 > cur[1]:
                    cur[1], cur[3] = t1, b
                cur[4].add((src, lvl))
            else:
                if cur is not None:
                    out.append(cur)
                cur = [t0, t1, a, b, {(src, lvl)}]
        out.append(cur)
    segs = []
    for _, _, a, b, prov in out:
        prov = tuple(sorted(prov, key=lambda sl: (sl[1], sl[0])))
        segs.append(PartitionSegment(Segment(a, b), prov[0][0], prov[0][1], prov))
    segs.sort(key=lambda s: (s.seg.a, s.seg.b))
    return segs


def partition_segments(P: SimplePolygon, k: int) -> list[PartitionSegment]:
    check_k(k)
    levels = list(range(0, k + 1, 2))
    raw = []
    for i in range(P.n):
        for m, ws in vertex_windows(P, i, levels).items():
            for a, b in ws:
                raw.append((a, b, i, m))
    return merge_segments(raw)


@dataclass
class Cell:
    id: int
    cycle: tuple[Point, ...]  # counterclockwise
    area: Fraction

    @cached_property
    def bbox(self):
        xs = [p.x for p in self.cycle]
        ys = [p.y for p in self.cycle]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass
class CellDecomposition:
    polygon: SimplePolygon
    k: int
    segments: list[PartitionSegment]
    vertices: list[Point]
    edges: list[tuple[int, int, int]]  # (u, v, owner) with owner = segment index or -1 - polygon edge
    cells: list[Cell]
    adjacency: dict[int, dict[int, tuple[int, ...]]] = field(default_factory=dict)
    # shared boundary pieces per adjacent pair (i < j), as (a, b) points
    shared_edges: dict[tuple[int, int], list[tuple[Point, Point]]] = field(default_factory=dict)

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    def euler_ok(self) -> bool:
        """V - E + F = C with F the bounded faces and C the connected components."""
        parent = list(range(len(self.vertices)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v, _ in self.edges:
            parent[find(u)] = find(v)
        comps = len({find(i) for i in range(len(self.vertices))})
        return len(self.vertices) - len(self.edges) + len(self.cells) == comps


def _split_all(P: SimplePolygon, segs: list[PartitionSegment]):
    lines = [(s.seg.a, s.seg.b, idx) for idx, s in enumerate(segs)]
    lines += [(e.a, e.b, -1 - i) for i, e in enumerate(P.edges)]
    boxes = [
        (min(a.x, b.x), min(a.y, b.y), max(a.x, b.x), max(a.y, b.y)) for a, b, _ in lines
    ]
    cuts = [{a, b} for a, b, _ in lines]
    m = len(lines)
    for i in range(m):
        bi = boxes[i]
        a, b, oi = lines[i]
        for j in range(i + 1, m):
            oj = lines[j][2]
            if oi < 0 and oj < 0:
                continue  # polygon edges meet only at shared vertices
            bj = boxes[j]
            if bi[0] > bj[2] or bj[0] > bi[2] or bi[1] > bj[3] or bj[1] > bi[3]:
                continue
            for p in segment_contacts(a, b, lines[j][0], lines[j][1]):
                cuts[i].add(p)
                cuts[j].add(p)
    pieces = []
    for (a, b, owner), pts in zip(lines, cuts):
        pts = sorted(pts)
        if pts[0] != min(a, b):
            raise AssertionError("cut point outside its segment")
        for p, q in zip(pts, pts[1:]):
            pieces.append((p, q, owner))
    return pieces


def build_decomposition(P: SimplePolygon, k: int, segments: Sequence[PartitionSegment] | None = None) -> CellDecomposition:
    """Overlay the partition segments with the boundary of P and extract the cells.

    ``segments`` overrides the computed partition (used by mutation tests).
    """
    check_k(k)
    segs = list(partition_segments(P, k) if segments is None else segments)
    pieces = _split_all(P, segs)
    vid: dict[Point, int] = {}
    verts: list[Point] = []
    for p in sorted({p for a, b, _ in pieces for p in (a, b)}):
        vid[p] = len(verts)
        verts.append(p)
    edges = []
    seen = {}
    for a, b, owner in pieces:
        u, v = sorted((vid[a], vid[b]))
        if (u, v) in seen:
            continue
        seen[(u, v)] = owner
        edges.append((u, v, owner))
    edges.sort()
    out: dict[int, list[int]] = {i: [] for i in range(len(verts))}
    for u, v, _ in edges:
        out[u].append(v)
        out[v].append(u)
    order = {}
    for u, nbrs in out.items():
        pu = verts[u]
        nbrs.sort(key=cmp_to_key(lambda x, y: _angle_cmp(
            (verts[x].x - pu.x, verts[x].y - pu.y), (verts[y].x - pu.x, verts[y].y - pu.y))))
        order[u] = {v: i for i, v in enumerate(nbrs)}
    visited = set()
    faces = []
    face_of: dict[tuple[int, int], int] = {}
    for u, v, _ in edges:
        for start in ((u, v), (v, u)):
            if start in visited:
                continue
            cyc = []
            he = start
            while he not in visited:
                visited.add(he)
                cyc.append(he)
                a, b = he
                nb = out[b]
                idx = order[b][a]
                he = (b, nb[idx - 1])
            pts = [verts[a] for a, _ in cyc]
            area = polygon_area(pts)  # signed
            faces.append((cyc, area))
    cells_raw = []
    for cyc, area in faces:
        if area > 0:
            pts = [verts[a] for a, _ in cyc]
            j = min(range(len(pts)), key=lambda i: pts[i])
            pts = tuple(pts[j:] + pts[:j])
            cells_raw.append((pts, area, cyc))
        elif area == 0:
            raise AssertionError("degenerate face in overlay")
    cells_raw.sort(key=lambda c: c[0])
    cells = []
    for cid, (pts, area, cyc) in enumerate(cells_raw):
        cells.append(Cell(cid, pts, area))
        for he in cyc:
            face_of[he] = cid
    adjacency: dict[int, dict[int, set]] = {c.id: {} for c in cells}
    shared: dict[tuple[int, int], list] = {}
    for u, v, owner in edges:
        if owner < 0:
            continue
        f1, f2 = face_of.get((u, v)), face_of.get((v, u))
        if f1 is None or f2 is None or f1 == f2:
            continue
        adjacency[f1].setdefault(f2, set()).add(owner)
        adjacency[f2].setdefault(f1, set()).add(owner)
        shared.setdefault((min(f1, f2), max(f1, f2)), []).append((verts[u], verts[v]))
    adj = {c: {d: tuple(sorted(s)) for d, s in sorted(nb.items())} for c, nb in adjacency.items()}
    return CellDecomposition(P, k, segs, verts, edges, cells, adj, shared)


def locate_cell(D: CellDecomposition, p: Point):
    loc = point_in_polygon(p, D.polygon)
    if loc is PointLocation.OUTSIDE:
        raise PointOutside(f"{p} is outside the polygon")
    if loc is PointLocation.ON_BOUNDARY:
        return ON_SKELETON
    for s in D.segments:
        if on_segment(p, s.seg.a, s.seg.b):
            return ON_SKELETON
    for c in D.cells:
        x0, y0, x1, y1 = c.bbox
        if not (x0 <= p.x <= x1 and y0 <= p.y <= y1):
            continue
        where = classify_point(p, c.cycle)
        if where is PointLocation.INSIDE:
            return c.id
        if where is PointLocation.ON_BOUNDARY:
            return ON_SKELETON
    raise AssertionError(f"{p} not covered by any cell")


def cell_adjacency(D: CellDecomposition) -> dict[int, dict[int, tuple[int, ...]]]:
    return D.adjacency


def decomposition_stats(D: CellDecomposition) -> dict:
    return {
        "n": D.polygon.n,
        "k": D.k,
        "segment_count": len(D.segments),
        "vertex_count": len(D.vertices),
        "cell_count": len(D.cells),
    }
