"""Single-pursuer clearing search over the cell adjacency graph.

A search state is a cell plus one contamination bit per shadow slot of the
cell's signature.  Moving into an adjacent cell maps bits through the shadow
correspondence across the shared boundary: vanished shadows drop their bit,
new shadows start clear, merged shadows OR their parents, and split or
continuing shadows inherit the bit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .decomposition import CellDecomposition, PointOutside, locate_cell
from .geometry import KShadowError, Point, PointLocation, classify_point, orient_value
from .shadows import (
    ShadowSignature,
    correspondence,
    diff_signatures,
    label_components,
    raster_grid,
    raster_shadow_labels,
    shadow_signature,
    shadows_of,
)


class NoSolution(KShadowError):
    pass


class NotAdjacent(KShadowError):
    pass


class ReplayMismatch(KShadowError):
    pass


@dataclass(frozen=True)
class SearchState:
    cell: int
    contaminated: int  # bitmask over the cell's signature slots
    width: int

    def bits(self) -> list[int]:
        return [i for i in range(self.width) if self.contaminated >> i & 1]


@dataclass
class Plan:
    cells: list[int]
    waypoints: list[Point]
    events: list[list[dict]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cells)

    def to_json(self):
        return {
            "cells": self.cells,
            "waypoints": [[str(p.x), str(p.y)] for p in self.waypoints],
            "events": self.events,
        }


def cell_waypoint(cell) -> Point:
    """Vertex centroid of the cell, or a fixed interior point if that fails."""
    n = len(cell.cycle)
    c = Point(sum(p.x for p in cell.cycle) / n, sum(p.y for p in cell.cycle) / n)
    if classify_point(c, cell.cycle) is PointLocation.INSIDE:
        return c
    a = cell.cycle[0]
    for i in range(1, n - 1):
        b, d = cell.cycle[i], cell.cycle[i + 1]
        if orient_value(a, b, d) > 0:
            return Point((a.x + b.x + d.x) / 3, (a.y + b.y + d.y) / 3)
    raise AssertionError("cell without interior triangle")


class CellGraph:
    """Waypoints, signatures and bit transfer masks of a decomposition."""

    def __init__(self, D: CellDecomposition):
        self.D = D
        self.waypoints = [cell_waypoint(c) for c in D.cells]
        self.signatures: list[ShadowSignature] = [
            shadow_signature(D.polygon, w, D.k) for w in self.waypoints
        ]
        self._masks: dict[tuple[int, int], tuple[int, ...]] = {}

    def masks(self, a: int, b: int) -> tuple[int, ...]:
        """For each slot of b's signature, the mask of a's slots feeding it."""
        key = (a, b)
        m = self._masks.get(key)
        if m is None:
            old, new = self.signatures[a], self.signatures[b]
            out = [0] * len(new)
            for olds, news in correspondence(old, new):
                src = 0
                for i in olds:
                    src |= 1 << i
                for j in news:
                    out[j] |= src
            m = self._masks[key] = tuple(out)
        return m

    def step(self, state: SearchState, to_cell: int) -> SearchState:
        if to_cell not in self.D.adjacency.get(state.cell, {}):
            raise NotAdjacent(f"cells {state.cell} and {to_cell} are not adjacent")
        bits = 0
        for j, src in enumerate(self.masks(state.cell, to_cell)):
            if state.contaminated & src:
                bits |= 1 << j
        return SearchState(to_cell, bits, len(self.signatures[to_cell]))

    def full(self, cell: int) -> SearchState:
        w = len(self.signatures[cell])
        return SearchState(cell, (1 << w) - 1, w)


def apply_transition(D: CellDecomposition, from_state: SearchState, to_cell: int, graph: CellGraph | None = None) -> SearchState:
    return (graph or CellGraph(D)).step(from_state, to_cell)


def plan_clearing_path(D: CellDecomposition, start="auto", graph: CellGraph | None = None) -> Plan:
    """Breadth-first search from fully contaminated start states to a clear state.

    ``start`` is a CellId or "auto"; auto seeds the search with every cell in
    id order, so the first goal reached is the shortest plan with ties broken
    by start cell and then by neighbour order.
    """
    G = graph or CellGraph(D)
    starts = range(len(D.cells)) if start in (None, "auto") else [int(start)]
    for s in starts:
        if not 0 <= s < len(D.cells):
            raise ValueError(f"no cell {s}")
    parent: dict[SearchState, SearchState | None] = {}
    queue = deque()
    for s in starts:
        st = G.full(s)
        if st not in parent:
            parent[st] = None
            queue.append(st)
    goal = None
    while queue:
        st = queue.popleft()
        if st.contaminated == 0:
            goal = st
            break
        for nb in D.adjacency[st.cell]:
            nxt = G.step(st, nb)
            if nxt not in parent:
                parent[nxt] = st
                queue.append(nxt)
    if goal is None:
        raise NoSolution(f"no clearing path over {len(parent)} reachable states")
    path = []
    st = goal
    while st is not None:
        path.append(st.cell)
        st = parent[st]
    path.reverse()
    events = []
    for a, b in zip(path, path[1:]):
        evs = diff_signatures(G.signatures[a], G.signatures[b], strict=False)
        events.append([e.to_json() for e in evs])
    return Plan(path, [G.waypoints[c] for c in path], events)


# ---------------------------------------------------------------------------
# replay


def _convex_overlap(A: Sequence[Point], B: Sequence[Point]) -> bool:
    """Whether two convex CCW polygons share interior points (separating axis test)."""
    for P, Q in ((A, B), (B, A)):
        n = len(P)
        for i in range(n):
            a, b = P[i], P[(i + 1) % n]
            if all(orient_value(a, b, q) <= 0 for q in Q):
                return False
    return True


def _bbox(poly):
    xs = [p.x for p in poly]
    ys = [p.y for p in poly]
    return min(xs), min(ys), max(xs), max(ys)


def regions_overlap(R1, R2) -> bool:
    boxes2 = [_bbox(f) for f in R2]
    for f in R1:
        b1 = _bbox(f)
        for g, b2 in zip(R2, boxes2):
            if b1[0] >= b2[2] or b2[0] >= b1[2] or b1[1] >= b2[3] or b2[1] >= b1[3]:
                continue
            if _convex_overlap(f, g):
                return True
    return False


def straddle_points(D: CellDecomposition, a: int, b: int) -> tuple[Point, Point, Point]:
    """Points just inside cells a and b on either side of their shared boundary, and the crossing point."""
    pieces = D.shared_edges[(min(a, b), max(a, b))]
    u, v = max(pieces, key=lambda s: ((s[1].x - s[0].x) ** 2 + (s[1].y - s[0].y) ** 2, s))
    m = Point((u.x + v.x) / 2, (u.y + v.y) / 2)
    nx, ny = -(v.y - u.y), v.x - u.x
    delta = Fraction(1, 16)
    for _ in range(64):
        p1 = Point(m.x + nx * delta, m.y + ny * delta)
        p2 = Point(m.x - nx * delta, m.y - ny * delta)
        try:
            c1, c2 = locate_cell(D, p1), locate_cell(D, p2)
        except PointOutside:
            delta /= 2
            continue
        if c1 == b and c2 == a:
            p1, p2 = p2, p1
            c1, c2 = a, b
        if c1 == a and c2 == b:
            # one more halving keeps the pair well clear of other events
            p1 = Point(m.x + (p1.x - m.x) / 2, m.y + (p1.y - m.y) / 2)
            p2 = Point(m.x + (p2.x - m.x) / 2, m.y + (p2.y - m.y) / 2)
            return p1, p2, m
        delta /= 2
    raise AssertionError(f"could not straddle cells {a} and {b}")


def replay_plan(D: CellDecomposition, plan: Plan, graph: CellGraph | None = None) -> dict:
    """Recompute contamination geometrically along the plan.

    At each crossing the shadows are recomputed from scratch on both sides of
    the shared boundary; a new shadow is contaminated iff it overlaps (with
    positive area) a contaminated shadow from the other side.  The result is
    compared with the bit-level transition.  A geometric bit that is dirty
    where the transition says clear raises ReplayMismatch; the opposite
    (the transition being more cautious) is recorded in the report.
    """
    G = graph or CellGraph(D)
    P, k = D.polygon, D.k
    for a, b in zip(plan.cells, plan.cells[1:]):
        if b not in D.adjacency.get(a, {}):
            raise NotAdjacent(f"cells {a} and {b} are not adjacent")
    first = plan.cells[0]
    state = G.full(first)
    geo = state.contaminated
    steps = []
    cautious = []
    for idx, (a, b) in enumerate(zip(plan.cells, plan.cells[1:])):
        p1, p2, _ = straddle_points(D, a, b)
        s1 = shadows_of(P, p1, k)
        s2 = shadows_of(P, p2, k)
        if tuple(s.key for s in s1) != G.signatures[a].shadows:
            raise ReplayMismatch(f"signature inside cell {a} differs from its waypoint")
        if tuple(s.key for s in s2) != G.signatures[b].shadows:
            raise ReplayMismatch(f"signature inside cell {b} differs from its waypoint")
        new_geo = 0
        for j, t in enumerate(s2):
            for i, s in enumerate(s1):
                if geo >> i & 1 and regions_overlap(s.region, t.region):
                    new_geo |= 1 << j
                    break
        state = G.step(state, b)
        if new_geo & ~state.contaminated:
            raise ReplayMismatch(
                f"step {idx}: geometry contaminates slots {new_geo:b} but transition gives {state.contaminated:b}")
        if new_geo != state.contaminated:
            cautious.append(idx)
        geo = new_geo
        evs = diff_signatures(G.signatures[a], G.signatures[b], strict=False)
        steps.append({
            "from": a,
            "to": b,
            "events": [e.to_json() for e in evs],
            "contaminated": state.bits(),
        })
    return {
        "cells": plan.cells,
        "steps": steps,
        "final_contaminated": state.bits(),
        "geometric_final": [i for i in range(state.width) if geo >> i & 1],
        "cautious_steps": cautious,
        "ok": state.contaminated == 0 and geo == 0,
    }


def _path_points(D: CellDecomposition, plan: Plan, spacing: float) -> list[Point]:
    pts = [plan.waypoints[0]]
    for (a, b), w in zip(zip(plan.cells, plan.cells[1:]), plan.waypoints[1:]):
        _, _, m = straddle_points(D, a, b)
        for target in (m, w):
            src = pts[-1]
            dist = float(abs(target.x - src.x) + abs(target.y - src.y))
            steps = max(1, int(np.ceil(dist / spacing)))
            for s in range(1, steps + 1):
                f = Fraction(s, steps)
                pts.append(Point(src.x + (target.x - src.x) * f, src.y + (target.y - src.y) * f))
    return pts


def grid_replay(D: CellDecomposition, plan: Plan, resolution: int = 400, min_cells: int = 4) -> dict:
    """Raster check of a plan: track contaminated raster cells along the path.

    Each step keeps the invisible components that touch the previous
    contamination.  Components smaller than ``min_cells`` are ignored in the
    final verdict.  Components are split along exact shadow boundaries (see
    ``raster_shadow_labels``).
    """
    P, k = D.polygon, D.k
    grid = raster_grid(P, resolution)
    x0, y0, x1, y1 = P.bbox
    spacing = float(max(x1 - x0, y1 - y0)) / 100
    pts = _path_points(D, plan, spacing)
    dirty = grid.inside.copy()
    for p in pts:
        lab = raster_shadow_labels(P, p, k, grid)
        hit = np.unique(lab[dirty])
        hit = hit[hit > 0]
        dirty = np.isin(lab, hit)
    _, keep = label_components(dirty, min_cells)
    return {
        "steps": len(pts),
        "residual_cells": int(dirty.sum()),
        "residual_components": len(keep),
        "ok": not keep,
    }
