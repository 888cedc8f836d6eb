import random
from fractions import Fraction

import numpy as np
import pytest

from kshadow.decomposition import PartitionSegment, build_decomposition, locate_cell
from kshadow.geometry import Point, point
from kshadow.kvis import k_visibility_region
from kshadow.planner import cell_waypoint
from kshadow.shadows import (
    AmbiguousMatching,
    EventKind,
    ShadowKind,
    ShadowSignature,
    cell_samples,
    classify_shadow,
    _faces_mask,
    correspondence,
    diff_signatures,
    label_components,
    oracle_shadows_grid,
    raster_grid,
    raster_shadow_labels,
    raster_visible,
    shadow_signature,
    shadows_of,
    verify_cell_invariance,
)

from conftest import interior_points

F = Fraction

# comb2 cells on either side of a window where two pocket shadows merge
MERGE_FROM, MERGE_TO = 15, 14


def sig(*entries):
    return ShadowSignature(Point(F(0), F(0)), tuple(sorted(entries)))


A = ("VertexShadow", (1, 2), (1,))
B = ("VertexShadow", (5,), (4, 5))
AB = ("VertexShadow", (1, 2, 5), (1, 4, 5))


def test_square_has_no_shadows(sq):
    for p in [point(1, 1), point(2, 3), point(F(1, 3), F(7, 2))]:
        assert shadows_of(sq, p, 0) == []
        assert shadow_signature(sq, p, 0).shadows == ()


def test_l_shadow_from_31(L):
    (s,) = shadows_of(L, point(3, 1), 0)
    assert s.kind is ShadowKind.VERTEX
    assert {4, 5} <= set(s.vertices)  # (2,4) and (0,4)
    assert s.area == 2
    assert {tuple(f) for f in s.region} == {(point(2, 4), point(0, 4), point(2, 2))}


def test_l_no_shadows_at_k2(L):
    for p in [point(1, 1), point(3, 1), point(1, 3), point(F(7, 2), F(3, 2))]:
        assert shadows_of(L, p, 2) == []


def test_classify(L, bar):
    (s,) = shadows_of(L, point(3, 1), 0)
    assert classify_shadow(s) is ShadowKind.VERTEX
    edge = shadows_of(bar, point(20, 1), 2)
    assert [classify_shadow(t) for t in edge] == [ShadowKind.EDGE, ShadowKind.EDGE]
    assert all(t.vertices == () and t.edges == (12, 14) for t in edge)


def test_edge_shadows_confirmed_by_grid(bar):
    g = oracle_shadows_grid(bar, point(20, 1), 2)
    assert g == {"count": 2, "vertices": [[], []]}


def test_identical_shadows_are_flagged(bar):
    s = shadow_signature(bar, point(20, 1), 2)
    assert len(s) == 2 and s.multiplicity_flag
    assert not shadow_signature(bar, point(20, 1), 0).multiplicity_flag


def test_no_edge_shadows_at_k0(polygons):
    rng = random.Random(2)
    for P in polygons[:50]:
        for q in interior_points(P, 5, rng):
            assert all(s.kind is ShadowKind.VERTEX for s in shadows_of(P, q, 0))


def test_signature_same_cell(L):
    D = build_decomposition(L, 0)
    p, q = point(F(7, 2), F(3, 2)), point(F(39, 10), F(19, 10))
    assert locate_cell(D, p) == locate_cell(D, q) == 4
    assert shadow_signature(L, p, 0) == shadow_signature(L, q, 0)


def test_signature_differs_across_cells(L):
    assert shadow_signature(L, point(3, 1), 0) != shadow_signature(L, point(1, 1), 0)
    assert shadow_signature(L, point(1, 1), 0).shadows == ()


def test_signature_ignores_observer():
    assert sig(A) == ShadowSignature(Point(F(9), F(9)), (A,))


def test_complement_area(L, polygons):
    rng = random.Random(8)
    for P in [L] + polygons[:30]:
        for q in interior_points(P, 2, rng) + [P.vertices[0]]:
            for k in (0, 2):
                R = k_visibility_region(P, q, k)
                assert R.area + sum(s.area for s in shadows_of(P, q, k)) == P.area


def test_grid_components_map_to_exact_shadows(polygons):
    # thin slivers may fragment on the raster, so compare by containment:
    # no raster component spans two exact shadows, and every shadow of
    # at least 16 raster cells is found
    rng = random.Random(9)
    for P in polygons[:12]:
        grid = raster_grid(P, 400)
        cell_area = grid.step_x * grid.step_y
        (q,) = interior_points(P, 1, rng)
        for k in (0, 2):
            S = shadows_of(P, q, k)
            masks = [_faces_mask(s.region, grid) for s in S]
            shadow = grid.inside & ~raster_visible(P, q, k, grid)
            lab, keep = label_components(shadow, 4)
            hit = set()
            for c in keep:
                owners = [i for i, m in enumerate(masks) if (m & (lab == c)).any()]
                assert len(owners) == 1, (P.name, q, k)
                hit.add(owners[0])
            for i, s in enumerate(S):
                if s.area >= 16 * cell_area:
                    assert i in hit


def test_grid_count_on_fixtures(L, comb2, bar):
    assert oracle_shadows_grid(L, point(1, 3), 0)["count"] == len(shadows_of(L, point(1, 3), 0)) == 1
    D = build_decomposition(comb2, 0)
    for c in D.cells[::4]:
        w = cell_waypoint(c)
        assert oracle_shadows_grid(comb2, w, 0)["count"] == len(shadows_of(comb2, w, 0))


def test_grid_oracle_examples(sq, L):
    assert oracle_shadows_grid(sq, point(1, 1), 0)["count"] == 0
    g = oracle_shadows_grid(L, point(3, 1), 0, resolution=400)
    assert g["count"] == 1
    assert {4, 5} <= set(g["vertices"][0])
    with pytest.raises(ValueError):
        oracle_shadows_grid(L, point(3, 1), 0, resolution=32)


def test_rigid_motion_invariance(polygons):
    # rotation by a Pythagorean angle plus a rational shift keeps vertex indices
    c, s = F(3, 5), F(4, 5)
    shift = (F(7, 3), F(-11, 2))

    def move(p):
        return Point(c * p.x - s * p.y + shift[0], s * p.x + c * p.y + shift[1])

    rng = random.Random(10)
    for P in polygons[:20]:
        Q = P.transformed(move)
        for p in interior_points(P, 3, rng):
            for k in (0, 2):
                assert shadow_signature(P, p, k) == shadow_signature(Q, move(p), k)


def test_diff_equal_is_empty():
    assert diff_signatures(sig(A, B), sig(A, B)) == []


def test_diff_disappear_and_appear():
    (e,) = diff_signatures(sig(A), sig())
    assert e.kind is EventKind.DISAPPEAR and e.old == (0,)
    (e,) = diff_signatures(sig(), sig(A))
    assert e.kind is EventKind.APPEAR and e.new == (0,)


def test_diff_merge_and_split():
    (e,) = diff_signatures(sig(A, B), sig(AB))
    assert e.kind is EventKind.MERGE and e.old == (0, 1) and e.new == (0,)
    (e,) = diff_signatures(sig(AB), sig(A, B))
    assert e.kind is EventKind.SPLIT and e.old == (0,) and e.new == (0, 1)


def test_diff_change():
    grown = ("VertexShadow", (1, 2, 3), (1, 2))
    (e,) = diff_signatures(sig(A), sig(grown))
    assert e.kind is EventKind.CHANGE


def test_diff_many_to_many_is_ambiguous():
    old = sig(("VertexShadow", (1, 2), ()), ("VertexShadow", (3, 4), ()))
    new = sig(("VertexShadow", (2, 3), ()), ("VertexShadow", (4, 1), ()))
    with pytest.raises(AmbiguousMatching):
        diff_signatures(old, new)
    (e,) = diff_signatures(old, new, strict=False)
    assert e.kind is EventKind.MERGE and e.old == (0, 1) and e.new == (0, 1)


def test_correspondence_keeps_unchanged_pairs():
    blocks = correspondence(sig(A, B), sig(A, B))
    assert sorted(blocks) == [((0,), (0,)), ((1,), (1,))]


def test_merge_event_in_two_pocket_comb(comb2):
    D = build_decomposition(comb2, 0)
    assert MERGE_TO in D.adjacency[MERGE_FROM]
    p = cell_waypoint(D.cells[MERGE_FROM])
    q = cell_waypoint(D.cells[MERGE_TO])
    old, new = shadow_signature(comb2, p, 0), shadow_signature(comb2, q, 0)
    (e,) = diff_signatures(old, new)
    assert e.kind is EventKind.MERGE and len(e.old) == 2 and len(e.new) == 1
    # merged features are the union of the two parents
    union = set()
    for i in e.old:
        union |= set(old.shadows[i][1])
    assert set(new.shadows[e.new[0]][1]) == union
    assert oracle_shadows_grid(comb2, p, 0)["count"] == 2
    assert oracle_shadows_grid(comb2, q, 0)["count"] == 1


def test_every_crossing_is_classifiable(L, comb2, polygons):
    for P in [L, comb2] + polygons[:20]:
        D = build_decomposition(P, 0)
        sigs = [shadow_signature(P, cell_waypoint(c), 0) for c in D.cells]
        for a, nb in D.adjacency.items():
            for b in nb:
                for e in diff_signatures(sigs[a], sigs[b], strict=False):
                    assert e.kind in set(EventKind)


def test_cell_samples_are_inside(polygons):
    from kshadow.geometry import PointLocation, classify_point

    rng = random.Random(1)
    D = build_decomposition(polygons[3], 2)
    for c in D.cells:
        pts = cell_samples(c, 8, rng)
        assert len(pts) == 8 + len(c.cycle)
        assert all(classify_point(q, c.cycle) is PointLocation.INSIDE for q in pts)


def test_verify_square(sq):
    r = verify_cell_invariance(build_decomposition(sq, 0), 8, seed=1)
    assert r["ok"] and r["violations"] == [] and r["cells"] == 1


def test_verify_l(L):
    r = verify_cell_invariance(build_decomposition(L, 0), 50, seed=0)
    assert r["ok"]
    assert r["samples"] == sum(50 + len(c.cycle) for c in build_decomposition(L, 0).cells)


def test_verify_reports_witnesses_on_broken_decomposition(L):
    segs = build_decomposition(L, 0).segments
    D = build_decomposition(L, 0, segments=segs[1:])
    r = verify_cell_invariance(D, 16, seed=0)
    assert not r["ok"]
    v = r["violations"][0]
    assert len(v["witnesses"]) == 2 and v["signatures"][0] != v["signatures"][1]


def test_verify_small_corpus_sample(polygons):
    for P in polygons[:10]:
        for k in (0, 2):
            assert verify_cell_invariance(build_decomposition(P, k), 8, seed=3)["ok"]


def test_verify_extended_segment_still_passes(L):
    # adding a redundant partition segment only refines cells
    segs = list(build_decomposition(L, 0).segments)
    extra = PartitionSegment(segs[0].seg.__class__(point(2, 2), point(2, 4)), 3, 0, ((3, 0),))
    D = build_decomposition(L, 0, segments=segs + [extra])
    assert verify_cell_invariance(D, 8, seed=0)["ok"]


def test_raster_labels_separate_distinct_shadows(comb2):
    D = build_decomposition(comb2, 0)
    p = cell_waypoint(D.cells[MERGE_FROM])
    grid = raster_grid(comb2, 200)
    lab = raster_shadow_labels(comb2, p, 0, grid)
    assert len(np.unique(lab[lab > 0])) >= len(shadows_of(comb2, p, 0))
