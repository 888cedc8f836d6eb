"""JSON and SVG serialisation.  Rationals travel as "p/q" strings."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from xml.sax.saxutils import escape

from .geometry import Point, SimplePolygon, ValidationError, to_fraction, validate_polygon


def q(v: Fraction) -> str:
    return str(v)


def qp(p: Point) -> list[str]:
    return [str(p.x), str(p.y)]


def parse_scalar(v) -> Fraction:
    """int, decimal string or "p/q" string, converted exactly."""
    if isinstance(v, bool):
        raise ValidationError("bad_coordinate", (), f"not a number: {v!r}")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError("bad_coordinate", (), f"cannot parse {v!r}") from exc
    try:
        return to_fraction(v)
    except TypeError as exc:
        raise ValidationError("bad_coordinate", (), str(exc)) from exc


def polygon_from_json(doc: dict, name: str | None = None) -> SimplePolygon:
    if not isinstance(doc, dict) or "vertices" not in doc:
        raise ValidationError("bad_document", (), 'expected an object with a "vertices" list')
    verts = []
    for i, pair in enumerate(doc["vertices"]):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValidationError("bad_coordinate", (i,), f"vertex {i} is not an [x, y] pair")
        verts.append((parse_scalar(pair[0]), parse_scalar(pair[1])))
    return validate_polygon(verts, name=doc.get("name", name))


def load_polygon(path) -> SimplePolygon:
    path = Path(path)
    try:
        # decimals stay strings until converted exactly
        doc = json.loads(path.read_text(), parse_float=str)
    except json.JSONDecodeError as exc:
        raise ValidationError("bad_document", (), f"{path}: {exc}") from exc
    except OSError as exc:
        raise ValidationError("unreadable_file", (), str(exc)) from exc
    return polygon_from_json(doc, name=path.stem)


def polygon_to_json(P: SimplePolygon) -> dict:
    doc = {"vertices": [qp(v) for v in P.vertices]}
    if P.name is not None:
        doc["name"] = P.name
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def region_to_json(R) -> dict:
    return {
        "source": qp(R.source),
        "k": R.k,
        "area": q(R.area),
        "faces": [
            {"vertices": [qp(p) for p in f], "tags": [t.value for t in tags]}
            for f, tags in zip(R.faces, R.boundary_tags)
        ],
        "windows": [[qp(a), qp(b)] for a, b in R.windows],
    }


def shadows_to_json(shadows) -> list:
    return [
        {
            "kind": s.kind.value,
            "vertices": list(s.vertices),
            "edges": list(s.edges),
            "area": q(s.area),
            "faces": [[qp(p) for p in f] for f in s.region],
        }
        for s in shadows
    ]


def decomposition_to_json(D) -> dict:
    return {
        "polygon": polygon_to_json(D.polygon),
        "k": D.k,
        "segments": [
            {
                "a": qp(s.seg.a),
                "b": qp(s.seg.b),
                "source_vertex": s.source_vertex,
                "level": s.level,
                "provenance": [list(x) for x in s.provenance],
            }
            for s in D.segments
        ],
        "vertices": [qp(p) for p in D.vertices],
        "edges": [[u, v, o] for u, v, o in D.edges],
        "cells": [{"id": c.id, "cycle": [qp(p) for p in c.cycle], "area": q(c.area)} for c in D.cells],
        "adjacency": {
            str(c): [{"cell": d, "segments": list(segs)} for d, segs in nb.items()]
            for c, nb in D.adjacency.items()
        },
    }


# ---------------------------------------------------------------------------
# SVG


_PALETTE = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
    "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
]


class _Canvas:
    def __init__(self, P: SimplePolygon, size: int = 600):
        x0, y0, x1, y1 = P.bbox
        span = max(x1 - x0, y1 - y0) or Fraction(1)
        self.x0, self.y1 = x0, y1
        self.scale = Fraction(size - 40) / span
        self.w = int((x1 - x0) * self.scale) + 40
        self.h = int((y1 - y0) * self.scale) + 40
        self.items: list[str] = []

    def xy(self, p: Point) -> str:
        # display only: rounded to 6 decimals, y flipped
        x = float((p.x - self.x0) * self.scale) + 20
        y = float((self.y1 - p.y) * self.scale) + 20
        return f"{x:.6f},{y:.6f}"

    def poly(self, pts, fill="none", stroke="#000", width=1.0, extra=""):
        d = " ".join(self.xy(p) for p in pts)
        self.items.append(
            f'<polygon points="{d}" fill="{fill}" stroke="{stroke}" stroke-width="{width}" {extra}/>')

    def line(self, a, b, stroke="#000", width=1.0, extra=""):
        (x1, y1), (x2, y2) = (self.xy(a).split(","), self.xy(b).split(","))
        self.items.append(
            f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{stroke}" stroke-width="{width}" {extra}/>')

    def dot(self, p, r=3.0, fill="#d00"):
        x, y = self.xy(p).split(",")
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{r}" fill="{fill}"/>')

    def text(self, p, s, size=10):
        x, y = self.xy(p).split(",")
        self.items.append(f'<text x="{x}" y="{y}" font-size="{size}" text-anchor="middle">{escape(s)}</text>')

    def render(self, title: str = "") -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        defs = ('<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
                'patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" stroke="#900" '
                'stroke-width="2"/></pattern></defs>')
        t = f"<title>{escape(title)}</title>" if title else ""
        return "\n".join([head, t, defs, *self.items, "</svg>"]) + "\n"


def decomposition_svg(D, plan=None) -> str:
    c = _Canvas(D.polygon)
    for cell in D.cells:
        c.poly(cell.cycle, fill=_PALETTE[cell.id % len(_PALETTE)], stroke="none")
    for s in D.segments:
        c.line(s.seg.a, s.seg.b, stroke="#333", width=0.8)
    c.poly(D.polygon.vertices, stroke="#000", width=2.5)
    if plan is not None:
        pts = list(plan.waypoints)
        for a, b in zip(pts, pts[1:]):
            c.line(a, b, stroke="#d00", width=1.5)
        for p in pts:
            c.dot(p)
    return c.render(f"decomposition k={D.k}")


def visibility_svg(R, shadows=(), contaminated=()) -> str:
    c = _Canvas(R.polygon)
    for f in R.faces:
        c.poly(f, fill="#ffe9a8", stroke="none")
    for i, s in enumerate(shadows):
        fill = "url(#hatch)" if i in contaminated else "#9aa"
        for f in s.region:
            c.poly(f, fill=fill, stroke="none")
    for a, b in R.windows:
        c.line(a, b, stroke="#06c", width=1.5)
    c.poly(R.polygon.vertices, stroke="#000", width=2.5)
    c.dot(R.source)
    return c.render(f"{R.k}-visibility")


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
