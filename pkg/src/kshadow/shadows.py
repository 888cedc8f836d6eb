"""Shadows of an observer, their combinatorial signatures and events."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .geometry import KShadowError, Point, PointLocation, SimplePolygon, classify_point, polygon_area
from .kvis import Sweep, _piece_polygon, check_k, oracle_crossings, oracle_crossings_batch, subtract


class ShadowKind(str, enum.Enum):
    VERTEX = "VertexShadow"
    EDGE = "EdgeShadow"


class AmbiguousMatching(KShadowError):
    def __init__(self, old: Sequence[int], new: Sequence[int]):
        super().__init__(f"many-to-many shadow correspondence: old {list(old)} -> new {list(new)}")
        self.old = tuple(old)
        self.new = tuple(new)


@dataclass
class Shadow:
    """A connected component of the part of P that is not k-visible.

    ``vertices`` and ``edges`` are the polygon features on the closure of the
    shadow, given as vertex and edge indices.
    """

    region: list[tuple[Point, ...]]
    kind: ShadowKind
    vertices: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def features(self) -> tuple[tuple[str, int], ...]:
        return tuple(("v", i) for i in self.vertices) + tuple(("e", i) for i in self.edges)

    @cached_property
    def area(self) -> Fraction:
        return sum((polygon_area(f) for f in self.region), Fraction(0))

    @property
    def key(self):
        return (self.kind.value, self.vertices, self.edges)


def classify_shadow(S: Shadow) -> ShadowKind:
    return ShadowKind.VERTEX if S.vertices else ShadowKind.EDGE


def _components(sw: Sweep, k: int):
    """Union shadow pieces of the sweep into components with their features.

    Returns a list of (pieces, vertex set, edge set) ordered by smallest piece.
    """
    pieces = []  # (wedge index, j)
    index = {}
    for wi, w in enumerate(sw.wedges):
        for j, _, _, inside in w.intervals("lo"):
            if inside and j > k:
                index[(wi, j)] = len(pieces)
                pieces.append((wi, j))
    parent = list(range(len(pieces)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    m = len(sw.rays)
    for r in range(m):
        wl = (r - 1) % m
        left = [(sw.wedges[wl].t_hi[j - 1], sw.wedges[wl].t_hi[j], index[(wl, j)])
                for (w, j) in pieces if w == wl]
        if not left:
            continue
        right = [(sw.wedges[r].t_lo[j - 1], sw.wedges[r].t_lo[j], index[(r, j)])
                 for (w, j) in pieces if w == r]
        walls = [(a, b) for a, b, _ in sw.rays[r].walls]
        for a0, a1, ia in left:
            for b0, b1, ib in right:
                lo, hi = max(a0, b0), min(a1, b1)
                if hi > lo and subtract([(lo, hi)], walls):
                    parent[find(ia)] = find(ib)
    groups: dict[int, list[int]] = {}
    for i in range(len(pieces)):
        groups.setdefault(find(i), []).append(i)
    comps = []
    for members in groups.values():
        verts: set[int] = set()
        edges: set[int] = set()
        for i in members:
            wi, j = pieces[i]
            w = sw.wedges[wi]
            edges.add(w.edges[j - 1])
            edges.add(w.edges[j])
            for r, t0, t1 in ((w.lo, w.t_lo[j - 1], w.t_lo[j]), (w.hi, w.t_hi[j - 1], w.t_hi[j])):
                ray = sw.rays[r]
                for t, v in ray.verts:
                    if t0 <= t <= t1:
                        verts.add(v)
                for a, b, e in ray.walls:
                    if min(b, t1) > max(a, t0):
                        edges.add(e)
        comps.append(([pieces[i] for i in members], verts, edges))
    return comps


def shadows_of(P: SimplePolygon, p: Point, k: int) -> list[Shadow]:
    check_k(k)
    sw = Sweep(P, p)
    out = []
    for pcs, verts, edges in _components(sw, k):
        region = [tuple(q for q, _ in _piece_polygon(sw, sw.wedges[wi], j)) for wi, j in pcs]
        kind = ShadowKind.VERTEX if verts else ShadowKind.EDGE
        out.append(Shadow(region, kind, tuple(sorted(verts)), tuple(sorted(edges))))
    out.sort(key=lambda s: s.key)
    return out


@dataclass(frozen=True)
class ShadowSignature:
    observer: Point = field(compare=False)
    shadows: tuple[tuple[str, tuple[int, ...], tuple[int, ...]], ...]

    def __len__(self) -> int:
        return len(self.shadows)

    @property
    def multiplicity_flag(self) -> bool:
        """True when two shadows share an identical (kind, features) entry."""
        return len(set(self.shadows)) != len(self.shadows)

    def to_json(self):
        return [{"kind": kd, "vertices": list(vs), "edges": list(es)} for kd, vs, es in self.shadows]


def shadow_signature(P: SimplePolygon, p: Point, k: int) -> ShadowSignature:
    check_k(k)
    sw = Sweep(P, p)
    entries = []
    for _, verts, edges in _components(sw, k):
        kind = ShadowKind.VERTEX if verts else ShadowKind.EDGE
        entries.append((kind.value, tuple(sorted(verts)), tuple(sorted(edges))))
    entries.sort()
    return ShadowSignature(p, tuple(entries))


# ---------------------------------------------------------------------------
# events


class EventKind(str, enum.Enum):
    APPEAR = "appear"
    DISAPPEAR = "disappear"
    MERGE = "merge"
    SPLIT = "split"
    # one shadow continues with a different feature set
    CHANGE = "change"


@dataclass(frozen=True)
class ShadowEvent:
    kind: EventKind
    old: tuple[int, ...]  # slot indices into the old signature
    new: tuple[int, ...]  # slot indices into the new signature

    def to_json(self):
        return {"kind": self.kind.value, "old": list(self.old), "new": list(self.new)}


def _linked(a, b) -> bool:
    _, va, ea = a
    _, vb, eb = b
    if va and vb:
        return bool(set(va) & set(vb))
    return bool(set(ea) & set(eb))


def correspondence(old: ShadowSignature, new: ShadowSignature):
    """Group shadow slots of two signatures into corresponding blocks.

    Identical entries are paired first (in order); the rest are linked by
    shared vertex features, or shared edges when one side has no vertices.
    Returns a list of (old slots, new slots) blocks, unchanged pairs included.
    """
    blocks = []
    used_new = set()
    rest_old = []
    for i, s in enumerate(old.shadows):
        for j, t in enumerate(new.shadows):
            if j not in used_new and s == t:
                used_new.add(j)
                blocks.append(((i,), (j,)))
                break
        else:
            rest_old.append(i)
    rest_new = [j for j in range(len(new.shadows)) if j not in used_new]
    nodes = [("o", i) for i in rest_old] + [("n", j) for j in rest_new]
    parent = {x: x for x in nodes}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i in rest_old:
        for j in rest_new:
            if _linked(old.shadows[i], new.shadows[j]):
                parent[find(("o", i))] = find(("n", j))
    groups: dict = {}
    for x in nodes:
        groups.setdefault(find(x), []).append(x)
    for members in groups.values():
        olds = tuple(sorted(i for s, i in members if s == "o"))
        news = tuple(sorted(j for s, j in members if s == "n"))
        blocks.append((olds, news))
    blocks.sort(key=lambda b: (b[0] or (len(old.shadows),), b[1]))
    return blocks


def diff_signatures(old: ShadowSignature, new: ShadowSignature, strict: bool = True) -> list[ShadowEvent]:
    """Events turning ``old`` into ``new``.

    With ``strict`` a many-to-many block raises AmbiguousMatching; otherwise
    it is reported as a MERGE of all old slots into all new slots.
    """
    events = []
    for olds, news in correspondence(old, new):
        if len(olds) == 1 and len(news) == 1:
            if old.shadows[olds[0]] != new.shadows[news[0]]:
                events.append(ShadowEvent(EventKind.CHANGE, olds, news))
        elif not news:
            events.append(ShadowEvent(EventKind.DISAPPEAR, olds, ()))
        elif not olds:
            events.append(ShadowEvent(EventKind.APPEAR, (), news))
        elif len(news) == 1:
            events.append(ShadowEvent(EventKind.MERGE, olds, news))
        elif len(olds) == 1:
            events.append(ShadowEvent(EventKind.SPLIT, olds, news))
        else:
            if strict:
                raise AmbiguousMatching(olds, news)
            events.append(ShadowEvent(EventKind.MERGE, olds, news))
    return events


# ---------------------------------------------------------------------------
# invariance check


def _grid_sample(cell, rng: random.Random, bits: int) -> Point:
    x0, y0, x1, y1 = cell.bbox
    G = 1 << bits
    fx = Fraction(rng.randrange(1, G), G)
    fy = Fraction(rng.randrange(1, G), G)
    return Point(x0 + (x1 - x0) * fx, y0 + (y1 - y0) * fy)


def _bary_sample(cell, rng: random.Random) -> Point:
    c = cell.cycle
    i = rng.randrange(1, len(c) - 1)
    a, b, d = c[0], c[i], c[i + 1]
    w = [rng.randrange(1, 64) for _ in range(3)]
    s = sum(w)
    return Point((a.x * w[0] + b.x * w[1] + d.x * w[2]) / s, (a.y * w[0] + b.y * w[1] + d.y * w[2]) / s)


def cell_samples(cell, count: int, rng: random.Random) -> list[Point]:
    """``count`` rejection samples strictly inside the cell plus one point near each corner."""
    pts = []
    bits = 6
    misses = 0
    while len(pts) < count:
        q = _grid_sample(cell, rng, bits)
        if classify_point(q, cell.cycle) is PointLocation.INSIDE:
            pts.append(q)
            continue
        misses += 1
        if misses % 32 == 0:
            bits += 2
        if misses > 256:
            # thin sliver: barycentric points of the fan triangles hit it far more often
            q = _bary_sample(cell, rng)
            if classify_point(q, cell.cycle) is PointLocation.INSIDE:
                pts.append(q)
    cx = sum(p.x for p in cell.cycle) / len(cell.cycle)
    cy = sum(p.y for p in cell.cycle) / len(cell.cycle)
    for c in cell.cycle:
        f = Fraction(1, 64)
        while True:
            q = Point(c.x + (cx - c.x) * f, c.y + (cy - c.y) * f)
            if classify_point(q, cell.cycle) is PointLocation.INSIDE:
                pts.append(q)
                break
            f /= 2
            if f < Fraction(1, 1 << 20):
                break
    return pts


def verify_cell_invariance(D, samples_per_cell: int = 32, seed=0, cells: Sequence[int] | None = None) -> dict:
    """Check that every sampled point of a cell has the same shadow signature.

    Returns a JSON-ready report; violations list the cell and two witnesses.
    """
    P, k = D.polygon, D.k
    violations = []
    flagged = []
    checked = 0
    for cell in D.cells:
        if cells is not None and cell.id not in cells:
            continue
        rng = random.Random(f"{seed}:{cell.id}")
        pts = cell_samples(cell, samples_per_cell, rng)
        ref = shadow_signature(P, pts[0], k)
        if ref.multiplicity_flag:
            flagged.append(cell.id)
        checked += len(pts)
        for q in pts[1:]:
            sig = shadow_signature(P, q, k)
            if sig != ref:
                violations.append({
                    "cell": cell.id,
                    "witnesses": [[str(pts[0].x), str(pts[0].y)], [str(q.x), str(q.y)]],
                    "signatures": [ref.to_json(), sig.to_json()],
                })
                break
    return {
        "polygon": P.name,
        "k": k,
        "cells": len(D.cells) if cells is None else len(cells),
        "samples": checked,
        "violations": violations,
        "multiplicity_flagged_cells": flagged,
        "ok": not violations,
    }


# ---------------------------------------------------------------------------
# raster oracle


@dataclass
class RasterGrid:
    x0: Fraction
    y0: Fraction
    step_x: Fraction
    step_y: Fraction
    res: int
    inside: np.ndarray  # bool [iy, ix]
    xs: np.ndarray
    ys: np.ndarray

    def exact(self, ix: int, iy: int) -> Point:
        return Point(self.x0 + self.step_x * (2 * ix + 1) / 2, self.y0 + self.step_y * (2 * iy + 1) / 2)

    def cell_of(self, p: Point) -> tuple[int, int]:
        ix = int((p.x - self.x0) / self.step_x)
        iy = int((p.y - self.y0) / self.step_y)
        return min(max(ix, 0), self.res - 1), min(max(iy, 0), self.res - 1)


def raster_grid(P: SimplePolygon, res: int) -> RasterGrid:
    x0, y0, x1, y1 = P.bbox
    sx, sy = (x1 - x0) / res, (y1 - y0) / res
    xs = float(x0) + (np.arange(res) + 0.5) * float(sx)
    ys = float(y0) + (np.arange(res) + 0.5) * float(sy)
    X, Y = np.meshgrid(xs, ys)
    inside = np.zeros(X.shape, dtype=bool)
    n = P.n
    vs = [(float(v.x), float(v.y)) for v in P.vertices]
    for i in range(n):
        ax, ay = vs[i]
        bx, by = vs[(i + 1) % n]
        if ay == by:
            continue
        cond = (ay > Y) != (by > Y)
        xint = ax + (Y - ay) * (bx - ax) / (by - ay)
        inside ^= cond & (X < xint)
    return RasterGrid(x0, y0, sx, sy, res, inside, xs, ys)


def raster_visible(P: SimplePolygon, p: Point, k: int, grid: RasterGrid) -> np.ndarray:
    """Bool raster of cell centres that are k-visible from p (outside cells are False)."""
    iy, ix = np.nonzero(grid.inside)
    X = grid.xs[ix]
    Y = grid.ys[iy]
    counts, degen = oracle_crossings_batch(
        P, p, qxy=(X, Y), exact=lambda i: grid.exact(int(ix[i]), int(iy[i])))
    for i in np.nonzero(degen)[0]:
        counts[i] = oracle_crossings(p, grid.exact(int(ix[i]), int(iy[i])), P)
    vis = np.zeros(grid.inside.shape, dtype=bool)
    vis[iy, ix] = counts <= k
    return vis


# 8-connectivity: thin diagonal slivers would otherwise break into pieces
EIGHT = np.ones((3, 3), dtype=bool)


def label_components(mask: np.ndarray, min_cells: int = 4):
    from scipy import ndimage

    lab, count = ndimage.label(mask, structure=EIGHT)
    if count == 0:
        return lab, []
    sizes = np.bincount(lab.ravel())
    keep = [c for c in range(1, count + 1) if sizes[c] >= min_cells]
    return lab, keep


def _faces_mask(faces, grid: RasterGrid) -> np.ndarray:
    """Cells whose centre lies in one of the convex CCW faces (float test, display accuracy)."""
    X, Y = np.meshgrid(grid.xs, grid.ys)
    out = np.zeros(X.shape, dtype=bool)
    for f in faces:
        fx = [float(p.x) for p in f]
        fy = [float(p.y) for p in f]
        bx0, bx1 = min(fx), max(fx)
        by0, by1 = min(fy), max(fy)
        ix = np.nonzero((grid.xs >= bx0) & (grid.xs <= bx1))[0]
        iy = np.nonzero((grid.ys >= by0) & (grid.ys <= by1))[0]
        if not len(ix) or not len(iy):
            continue
        sub = np.ix_(iy, ix)
        xs, ys = X[sub], Y[sub]
        inside = np.ones(xs.shape, dtype=bool)
        n = len(f)
        for i in range(n):
            ax, ay, cx, cy = fx[i], fy[i], fx[(i + 1) % n], fy[(i + 1) % n]
            inside &= (cx - ax) * (ys - ay) - (cy - ay) * (xs - ax) >= 0
        out[sub] |= inside
    return out


def raster_shadow_labels(P: SimplePolygon, p: Point, k: int, grid: RasterGrid) -> np.ndarray:
    """Label raster shadow cells by connected component.

    A cell is in shadow when the brute-force oracle says its centre is not
    k-visible.  Components are taken within each exact shadow separately:
    two distinct shadows can pass closer than one raster cell, and plain
    raster connectivity would glue them together.
    """
    from scipy import ndimage

    shadow = grid.inside & ~raster_visible(P, p, k, grid)
    labels = np.zeros(shadow.shape, dtype=np.int64)
    top = 0
    for s in shadows_of(P, p, k):
        lab, count = ndimage.label(shadow & _faces_mask(s.region, grid), structure=EIGHT)
        labels[lab > 0] = lab[lab > 0] + top
        top += count
    return labels


def oracle_shadows_grid(P: SimplePolygon, p: Point, k: int, resolution: int = 400, min_cells: int = 4) -> dict:
    """Raster the invisible part of P and flood-fill it.

    Returns {"count", "vertices": list of vertex-index lists per component}.
    A vertex belongs to a component when the component occupies one of the
    raster cells around it.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    grid = raster_grid(P, resolution)
    vis = raster_visible(P, p, k, grid)
    shadow = grid.inside & ~vis
    lab, keep = label_components(shadow, min_cells)
    members = {c: [] for c in keep}
    for vi, v in enumerate(P.vertices):
        ix, iy = grid.cell_of(v)
        near = lab[max(iy - 1, 0): iy + 2, max(ix - 1, 0): ix + 2]
        for c in sorted(set(near.ravel().tolist()) & set(keep)):
            members[c].append(vi)
    return {"count": len(keep), "vertices": [members[c] for c in keep]}
