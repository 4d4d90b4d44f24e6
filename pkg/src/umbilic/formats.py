"""File formats: surface and Weierstrass JSON, reports, curve CSV and OBJ."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .geomcore import ImmersionGrid, InvalidSurfaceError
from .numerics import GridChart2D, GridError


class SchemaError(ValueError):
    pass


def _encode(obj):
    """JSON text with every float written to 17 significant digits; NaN becomes null."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if obj is None:
        return "null"
    return json.dumps(obj)


def dumps(obj):
    return _encode(obj) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON ({exc})") from exc


# ---------------------------------------------------------------- surfaces

def surface_to_dict(surf: ImmersionGrid):
    return {
        "chart": surf.chart.to_dict(),
        "ambient_dim": surf.m,
        "a": float(surf.a),
        "e": surf.e.tolist(),
        "points": surf.points.reshape(-1, surf.m).tolist(),
    }


def _chart_from(d):
    try:
        c = d["chart"]
        return GridChart2D(float(c["s0"]), float(c["t0"]), float(c["hs"]), float(c["ht"]), int(c["ns"]), int(c["nt"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad chart record: {exc}") from exc


def surface_from_dict(d) -> ImmersionGrid:
    if not isinstance(d, dict):
        raise SchemaError("surface file must hold a JSON object")
    for key in ("chart", "ambient_dim", "a", "e", "points"):
        if key not in d:
            raise SchemaError(f"surface file is missing {key!r}")
    chart = _chart_from(d)
    m = d["ambient_dim"]
    if not isinstance(m, int) or m < 3:
        raise SchemaError("ambient_dim must be an integer >= 3")
    try:
        pts = np.array(d["points"], dtype=float)
        e = np.array(d["e"], dtype=float)
        a = float(d["a"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"non-numeric surface data: {exc}") from exc
    if pts.shape != (chart.ns * chart.nt, m):
        raise SchemaError(f"points has shape {pts.shape}, expected ({chart.ns * chart.nt}, {m})")
    if e.shape != (m,):
        raise SchemaError(f"e must have {m} entries")
    if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(e)) and math.isfinite(a)):
        raise SchemaError("non-finite values in surface file")
    try:
        return ImmersionGrid(chart, pts.reshape(chart.ns, chart.nt, m), e, a)
    except (InvalidSurfaceError, GridError) as exc:
        raise SchemaError(str(exc)) from exc


def write_surface(path, surf):
    write_json(path, surface_to_dict(surf))


def read_surface(path) -> ImmersionGrid:
    return surface_from_dict(read_json(path))


# ---------------------------------------------------------------- Weierstrass data

def _pairs(z):
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], -1).tolist()


def _complex(x, shape, name):
    try:
        arr = np.array(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: non-numeric entries") from exc
    if arr.shape != tuple(shape) + (2,):
        raise SchemaError(f"{name}: shape {arr.shape}, expected {tuple(shape) + (2,)}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{name}: non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def weierstrass_to_dict(data):
    return {
        "chart": data.chart.to_dict(),
        "n": data.n,
        "p": data.p,
        "phi": _pairs(data.phi),
        "Psi": _pairs(data.Psi),
        "G": _pairs(data.G),
        "omega": np.asarray(data.omega).tolist(),
        "lambda_sq": np.asarray(data.lambda_sq).tolist(),
        "frame": np.asarray(data.frame).tolist(),
    }


def weierstrass_from_dict(d):
    """Return ``(chart, n, G, extras)``; ``extras`` holds whatever optional fields are present."""
    if not isinstance(d, dict):
        raise SchemaError("Weierstrass file must hold a JSON object")
    for key in ("chart", "n", "G"):
        if key not in d:
            raise SchemaError(f"Weierstrass file is missing {key!r}")
    chart = _chart_from(d)
    n = d["n"]
    if not isinstance(n, int) or n < 3:
        raise SchemaError("n must be an integer >= 3")
    try:
        p = int(d.get("p", len(d["G"][0][0])))
    except (TypeError, IndexError) as exc:
        raise SchemaError("cannot infer p from G") from exc
    G = _complex(d["G"], chart.shape + (p,), "G")
    extras = {}
    if "omega" in d:
        omega = np.array(d["omega"], dtype=float)
        if omega.shape != chart.shape or not np.all(omega > 0):
            raise SchemaError("omega must be positive with the chart's shape")
        extras["omega"] = omega
    if "frame" in d:
        frame = np.array(d["frame"], dtype=float)
        if frame.shape != (p + 1, p + 1):
            raise SchemaError(f"frame must be {p + 1}x{p + 1}")
        extras["frame"] = frame
    return chart, n, G, extras


# ---------------------------------------------------------------- curve CSV, OBJ

CURVE_HEADER = ("s", "x", "z", "k", "u", "v")


def write_curve_csv(path, curve):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_HEADER)
        for row in zip(curve.s, curve.position[:, 0], curve.position[:, 1], curve.k, curve.u, curve.v):
            w.writerow([format(float(x), ".17g") for x in row])


def grid_faces(ns, nt, offset=0):
    """Two triangles per grid quad, 1-based vertex indices in row-major order."""
    faces = []
    for i in range(ns - 1):
        for j in range(nt - 1):
            a = offset + i * nt + j + 1
            b, c, d = a + nt, a + nt + 1, a + 1
            faces.append((a, b, c))
            faces.append((a, c, d))
    return faces


def write_obj(path, grids):
    """Write one or more ``(ns, nt, 3)`` vertex grids as a single OBJ (v/f records only)."""
    if isinstance(grids, np.ndarray):
        grids = [grids]
    lines = []
    faces = []
    offset = 0
    for g in grids:
        g = np.asarray(g, dtype=float)
        if g.ndim != 3 or g.shape[2] != 3:
            raise ValueError(f"OBJ export needs (ns, nt, 3) grids, got {g.shape}")
        lines.extend("v " + " ".join(format(float(x), ".17g") for x in p) for p in g.reshape(-1, 3))
        faces.extend(grid_faces(g.shape[0], g.shape[1], offset))
        offset += g.shape[0] * g.shape[1]
    lines.extend(f"f {a} {b} {c}" for a, b, c in faces)
    Path(path).write_text("\n".join(lines) + "\n")
