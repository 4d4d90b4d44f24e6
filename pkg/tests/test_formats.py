import json

import numpy as np
import pytest

from umbilic import formats
from umbilic.formats import SchemaError
from umbilic.weierstrass import extract

from conftest import cylinder, unit_curve, weierstrass_cylinder


def test_floats_keep_seventeen_digits():
    x = 0.1 + 0.2
    text = formats.dumps({"x": x, "nan": float("nan"), "flag": np.bool_(True), "k": np.int64(3)})
    d = json.loads(text)
    assert d["x"] == x and d["nan"] is None and d["flag"] is True and d["k"] == 3
    assert "0.30000000000000004" in text


def test_surface_roundtrip_is_exact(tmp_path):
    surf = cylinder(4, 0.1)
    path = tmp_path / "s.json"
    formats.write_surface(path, surf)
    back = formats.read_surface(path)
    assert np.array_equal(back.points, surf.points)
    assert np.array_equal(back.e, surf.e) and back.a == surf.a
    assert back.chart.shape == surf.chart.shape and back.chart.hs == surf.chart.hs


@pytest.mark.parametrize("mutate, match", [
    (lambda d: d.pop("points"), "missing"),
    (lambda d: d.update(ambient_dim=2), "ambient_dim"),
    (lambda d: d.update(points=d["points"][:-1]), "shape"),
    (lambda d: d.update(e=[0.0, 1.0]), "entries"),
    (lambda d: d["chart"].pop("hs"), "chart"),
    (lambda d: d.update(a="x"), "non-numeric"),
    (lambda d: d.update(e=[0.0, 0.0, 2.0]), "unit"),
])
def test_surface_schema_errors(mutate, match):
    d = formats.surface_to_dict(cylinder(3, 0.1))
    mutate(d)
    with pytest.raises(SchemaError, match=match):
        formats.surface_from_dict(d)


def test_non_finite_points_rejected():
    d = formats.surface_to_dict(cylinder(3, 0.1))
    d["points"][3][0] = None
    with pytest.raises(SchemaError):
        formats.surface_from_dict(d)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError, match="malformed"):
        formats.read_json(path)
    with pytest.raises(SchemaError):
        formats.surface_from_dict([1, 2])


def test_weierstrass_roundtrip(tmp_path):
    data = extract(weierstrass_cylinder(3, 0.1), 3)
    path = tmp_path / "w.json"
    formats.write_json(path, formats.weierstrass_to_dict(data))
    chart, n, G, extras = formats.weierstrass_from_dict(formats.read_json(path))
    assert n == 3 and chart.shape == data.chart.shape
    assert np.array_equal(G, data.G)
    assert np.array_equal(extras["omega"], data.omega) and np.array_equal(extras["frame"], data.frame)


def test_weierstrass_schema_errors():
    d = formats.weierstrass_to_dict(extract(weierstrass_cylinder(3, 0.1), 3))
    for mutate, match in [
        (lambda d: d.pop("G"), "missing"),
        (lambda d: d.update(n=2), "n must"),
        (lambda d: d.update(G=d["G"][1:]), "shape"),
        (lambda d: d.update(omega=[[-1.0]]), "omega"),
        (lambda d: d.update(frame=[[1.0]]), "frame"),
    ]:
        bad = json.loads(json.dumps(d))
        mutate(bad)
        with pytest.raises(SchemaError, match=match):
            formats.weierstrass_from_dict(bad)


def test_curve_csv(tmp_path):
    curve = unit_curve(3)
    path = tmp_path / "c.csv"
    formats.write_curve_csv(path, curve)
    lines = path.read_text().splitlines()
    assert lines[0] == "s,x,z,k,u,v"
    assert len(lines) == curve.s.size + 1
    assert float(lines[1].split(",")[3]) == curve.k[0]


def test_grid_faces_cover_each_quad_twice():
    faces = formats.grid_faces(3, 4)
    assert len(faces) == 2 * 2 * 3
    assert faces[0] == (1, 5, 6) and faces[1] == (1, 6, 2)
    assert max(max(f) for f in faces) == 12


def test_obj_records(tmp_path):
    g = np.random.default_rng(1).standard_normal((4, 5, 3))
    path = tmp_path / "m.obj"
    formats.write_obj(path, [g, g + 1])
    lines = path.read_text().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 40
    faces = [line for line in lines if line.startswith("f ")]
    assert len(faces) == 2 * 2 * 3 * 4
    assert max(int(x) for f in faces for x in f.split()[1:]) == 40
    assert all(line[0] in "vf" for line in lines)
    with pytest.raises(ValueError):
        formats.write_obj(path, np.zeros((3, 3, 4)))
