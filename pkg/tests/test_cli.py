import csv
import io as _io
import json
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from kshadow import io
from kshadow.cli import main
from kshadow.generate import comb, l_polygon


@pytest.fixture
def l_file(tmp_path):
    f = tmp_path / "L.json"
    f.write_text(io.dumps(io.polygon_to_json(l_polygon())))
    return f


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_polygon_round_trip(tmp_path):
    P = comb(2)
    f = tmp_path / "c.json"
    f.write_text(io.dumps(io.polygon_to_json(P)))
    Q = io.load_polygon(f)
    assert Q.vertices == P.vertices and Q.name == P.name


def test_decimal_coordinates_are_exact(tmp_path):
    f = tmp_path / "d.json"
    f.write_text('{"vertices": [[0, 0], [0.1, 0], [0.1, 0.3], ["0", "3/10"]]}')
    P = io.load_polygon(f)
    assert P.vertices[1].x == Fraction(1, 10)
    assert P.area == Fraction(3, 100)


def test_visibility(capsys, tmp_path, l_file):
    svg = tmp_path / "v.svg"
    code, out, _ = run(capsys, "visibility", l_file, "--k", 0, "--point", "3,1", "--svg", svg)
    assert code == 0
    doc = json.loads(out)
    assert doc["shadow_summary"] == {"count": 1, "kinds": ["VertexShadow"]}
    assert Fraction(doc["region"]["area"]) == 10
    assert ET.parse(svg).getroot().tag.endswith("svg")


def test_visibility_rational_point(capsys, l_file):
    code, out, _ = run(capsys, "visibility", l_file, "--point", "7/2,1.5")
    assert code == 0 and json.loads(out)["shadow_summary"]["count"] == 1


def test_decompose(capsys, tmp_path, l_file):
    out_json, svg = tmp_path / "d.json", tmp_path / "d.svg"
    code, out, _ = run(capsys, "decompose", l_file, "--json", out_json, "--svg", svg)
    assert code == 0
    stats = json.loads(out)
    assert stats["cell_count"] == 5 and stats["segment_count"] == 3
    doc = json.loads(out_json.read_text())
    assert len(doc["cells"]) == 5
    ET.parse(svg)


def test_verify_file_and_dir(capsys, tmp_path, l_file):
    code, out, _ = run(capsys, "verify", l_file, "--samples", 8)
    assert code == 0 and json.loads(out)["ok"]
    d = tmp_path / "polys"
    code, _, _ = run(capsys, "gen", "--count", 3, "--out", d)
    assert code == 0 and len(list(d.glob("*.json"))) == 3
    code, out, _ = run(capsys, "verify", "--dir", d, "--samples", 4)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split() == ["polygon", "cells", "samples", "result"]
    assert lines[-1] == "3/3 polygons pass"


def test_plan(capsys, tmp_path, l_file):
    svg = tmp_path / "p.svg"
    code, out, _ = run(capsys, "plan", l_file, "--start", 4, "--grid", "--resolution", 200, "--svg", svg)
    assert code == 0
    doc = json.loads(out)
    assert doc["plan"]["cells"] == [4, 3, 0]
    assert doc["replay"]["ok"] and doc["grid_replay"]["ok"]
    ET.parse(svg)


def test_plan_no_solution_exit_code(capsys, tmp_path):
    f = tmp_path / "comb3.json"
    f.write_text(io.dumps(io.polygon_to_json(comb(3))))
    code, _, err = run(capsys, "plan", f)
    assert code == 4 and "NoSolution" in err


def test_bench_is_deterministic(capsys):
    argv = ["bench", "--n", 4, 6, "--k", 0, 2, "--count", 2, "--seed", 3]
    code, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert code == 0 and a == b
    rows = list(csv.reader(_io.StringIO(a)))
    assert rows[0] == ["n", "k", "instance", "segments", "vertices", "cells"]
    assert len(rows) == 1 + 3 * 2 * 2


def test_bench_timing_column(capsys):
    code, out, _ = run(capsys, "bench", "--n", 4, 4, "--k", 0, 0, "--count", 1, "--timing")
    assert code == 0 and out.splitlines()[0].endswith("wall_time_s")


@pytest.mark.parametrize("argv", [
    ["decompose", "{L}", "--k", "1"],
    ["decompose", "{L}", "--k", "two"],
    ["decompose", "{missing}"],
    ["decompose", "{bad}"],
    ["visibility", "{L}", "--point", "3"],
    ["bench", "--k", "0", "3"],
])
def test_validation_exit_code(capsys, tmp_path, l_file, argv):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": [[0, 0], [2, 2], [2, 0], [0, 2]]}')
    subs = {"{L}": str(l_file), "{missing}": str(tmp_path / "nope.json"), "{bad}": str(bad)}
    code, _, err = run(capsys, *[subs.get(a, a) for a in argv])
    assert code == 2 and err.startswith("error:")


def test_geometry_error_exit_code(capsys, l_file):
    code, _, err = run(capsys, "visibility", l_file, "--point", "3,3")
    assert code == 3 and "SourceOutside" in err
