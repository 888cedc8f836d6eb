"""Command-line front end.

Exit codes: 0 ok, 2 input validation, 3 geometry error, 4 no solution.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .decomposition import build_decomposition, decomposition_stats
from .generate import random_polygon
from .geometry import KShadowError, Point, ValidationError
from .kvis import InvalidK, check_k, k_visibility_region
from .planner import CellGraph, NoSolution, grid_replay, plan_clearing_path, replay_plan
from .shadows import shadows_of, verify_cell_invariance

EXIT_OK, EXIT_VALIDATION, EXIT_GEOMETRY, EXIT_NO_SOLUTION = 0, 2, 3, 4


def threads() -> int:
    try:
        return max(1, int(os.environ.get("KSHADOW_THREADS", "1")))
    except ValueError:
        return 1


def parse_point(text: str) -> Point:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError("bad_point", (), f"expected x,y but got {text!r}")
    return Point(io.parse_scalar(parts[0]), io.parse_scalar(parts[1]))


def even_k(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise InvalidK(f"k must be an integer, got {text!r}")
    check_k(k)
    return k


def emit(doc, path=None) -> None:
    text = io.dumps(doc)
    if path:
        io.write_text(path, text + "\n")
    else:
        print(text)


def cmd_visibility(args) -> int:
    P = io.load_polygon(args.file)
    k = even_k(args.k)
    p = parse_point(args.point)
    R = k_visibility_region(P, p, k)
    S = shadows_of(P, p, k)
    doc = {
        "polygon": P.name,
        "region": io.region_to_json(R),
        "shadows": io.shadows_to_json(S),
        "shadow_summary": {
            "count": len(S),
            "kinds": [s.kind.value for s in S],
        },
    }
    emit(doc, args.json)
    if args.svg:
        io.write_text(args.svg, io.visibility_svg(R, S))
    return EXIT_OK


def cmd_decompose(args) -> int:
    P = io.load_polygon(args.file)
    D = build_decomposition(P, even_k(args.k))
    stats = decomposition_stats(D)
    stats["polygon"] = P.name
    emit(stats)
    if args.json:
        io.write_text(args.json, io.dumps(io.decomposition_to_json(D)) + "\n")
    if args.svg:
        io.write_text(args.svg, io.decomposition_svg(D))
    return EXIT_OK


def _verify_one(job):
    path, k, samples, seed = job
    P = io.load_polygon(path)
    D = build_decomposition(P, k)
    return verify_cell_invariance(D, samples, seed)


def cmd_verify(args) -> int:
    k = even_k(args.k)
    if args.dir:
        files = sorted(Path(args.dir).glob("*.json"))
        if not files:
            raise ValidationError("empty_directory", (), f"no polygon files in {args.dir}")
        jobs = [(str(f), k, args.samples, args.seed) for f in files]
        if threads() > 1:
            with ProcessPoolExecutor(threads()) as ex:
                reports = list(ex.map(_verify_one, jobs))
        else:
            reports = [_verify_one(j) for j in jobs]
        ok = all(r["ok"] for r in reports)
        doc = {"k": k, "seed": args.seed, "ok": ok, "reports": reports}
        if args.json:
            io.write_text(args.json, io.dumps(doc) + "\n")
        print(f"{'polygon':<16}{'cells':>7}{'samples':>9}  result")
        for r in reports:
            print(f"{str(r['polygon']):<16}{r['cells']:>7}{r['samples']:>9}  {'pass' if r['ok'] else 'FAIL'}")
        print(f"{sum(r['ok'] for r in reports)}/{len(reports)} polygons pass")
        return EXIT_OK if ok else 1
    if not args.file:
        raise ValidationError("missing_input", (), "give a polygon file or --dir")
    report = _verify_one((args.file, k, args.samples, args.seed))
    emit(report, args.json)
    return EXIT_OK if report["ok"] else 1


def cmd_plan(args) -> int:
    P = io.load_polygon(args.file)
    D = build_decomposition(P, even_k(args.k))
    G = CellGraph(D)
    start = "auto" if args.start is None else args.start
    plan = plan_clearing_path(D, start, graph=G)
    doc = {"polygon": P.name, "k": D.k, "plan": plan.to_json(), "replay": replay_plan(D, plan, graph=G)}
    if args.grid:
        doc["grid_replay"] = grid_replay(D, plan, resolution=args.resolution)
    emit(doc, args.json)
    if args.svg:
        io.write_text(args.svg, io.decomposition_svg(D, plan))
    return EXIT_OK


def _bench_row(job):
    n, k, idx, seed, timing = job
    rng = random.Random(f"{seed}:{n}:{idx}")
    P = random_polygon(n, rng, name=f"n{n}_{idx}")
    t0 = time.perf_counter()
    D = build_decomposition(P, k)
    dt = time.perf_counter() - t0
    s = decomposition_stats(D)
    row = [n, k, idx, s["segment_count"], s["vertex_count"], s["cell_count"]]
    if timing:
        row.append(f"{dt:.4f}")
    return row


def cmd_bench(args) -> int:
    n_lo, n_hi = args.n
    k_lo, k_hi = args.k
    for k in (k_lo, k_hi):
        check_k(k)
    jobs = [
        (n, k, i, args.seed, args.timing)
        for n in range(n_lo, n_hi + 1)
        for k in range(k_lo, k_hi + 1, 2)
        for i in range(args.count)
    ]
    if threads() > 1:
        with ProcessPoolExecutor(threads()) as ex:
            rows = list(ex.map(_bench_row, jobs))
    else:
        rows = [_bench_row(j) for j in jobs]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["n", "k", "instance", "segments", "vertices", "cells"]
    if args.timing:
        header.append("wall_time_s")
    w.writerow(header)
    w.writerows(rows)
    if args.out:
        io.write_text(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_gen(args) -> int:
    from .generate import corpus

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for P in corpus(args.count, args.seed, args.n[0], args.n[1]):
        io.write_text(out / f"{P.name}.json", io.dumps(io.polygon_to_json(P)) + "\n")
    print(f"wrote {args.count} polygons to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kshadow", description="k-visibility, k-cell decompositions and clearing plans")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("visibility", help="k-visibility region and shadows of a point")
    p.add_argument("file")
    p.add_argument("--k", default="0")
    p.add_argument("--point", required=True, help="x,y (integers, decimals or p/q)")
    p.add_argument("--svg")
    p.add_argument("--json")
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("decompose", help="build the k-cell decomposition")
    p.add_argument("file")
    p.add_argument("--k", default="0")
    p.add_argument("--svg")
    p.add_argument("--json")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", help="check that shadow signatures are constant in every cell")
    p.add_argument("file", nargs="?")
    p.add_argument("--dir", help="verify every *.json polygon in a directory")
    p.add_argument("--k", default="0")
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plan", help="search a single-pursuer clearing path")
    p.add_argument("file")
    p.add_argument("--k", default="0")
    p.add_argument("--start", type=int)
    p.add_argument("--grid", action="store_true", help="also replay on the raster oracle")
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--svg")
    p.add_argument("--json")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="decomposition size statistics over random polygons (CSV)")
    p.add_argument("--n", type=int, nargs=2, default=(4, 12), metavar=("LO", "HI"))
    p.add_argument("--k", type=int, nargs=2, default=(0, 4), metavar=("LO", "HI"))
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="add a wall-time column (not reproducible)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a random polygon corpus as JSON files")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--n", type=int, nargs=2, default=(4, 12), metavar=("LO", "HI"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, InvalidK) as exc:
        detail = getattr(exc, "invariant", type(exc).__name__)
        print(f"error: {detail}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NoSolution as exc:
        print(f"error: NoSolution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except KShadowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":
    sys.exit(main())
