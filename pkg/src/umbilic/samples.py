"""Closed-form test surfaces in the half space ``<x, e> > 0``."""

from __future__ import annotations

import numpy as np

from .geomcore import ImmersionGrid
from .numerics import GridChart2D

E3 = np.array([0.0, 0.0, 1.0])


def _graph(f):
    return lambda S, T: np.stack([S, T, f(S, T)], -1)


def _sphere(S, T):
    return np.stack([np.cos(S) * np.cos(T), np.cos(S) * np.sin(T), 3.0 + np.sin(S)], -1)


def _torus(S, T):
    r = 2.0 + 0.5 * np.cos(S)
    return np.stack([r * np.cos(T), r * np.sin(T), 3.0 + 0.5 * np.sin(S)], -1)


def _catenoid(S, T):
    return np.stack([np.cosh(S) * np.cos(T), np.cosh(S) * np.sin(T), 2.0 + S], -1)


def _helicoid(S, T):
    return np.stack([S * np.cos(T), S * np.sin(T), 2.0 + T], -1)


def _enneper(S, T):
    return np.stack([S - S**3 / 3 + S * T**2, -T + T**3 / 3 - S**2 * T, 2.0 + S**2 - T**2], -1)


ANALYTIC = {
    "tilted_plane": (_graph(lambda S, T: 2.0 + 0.3 * S - 0.2 * T), (-0.5, 0.5), (-0.5, 0.5)),
    "paraboloid": (_graph(lambda S, T: 2.0 + 0.5 * (S**2 + T**2)), (-0.5, 0.5), (-0.5, 0.5)),
    "saddle": (_graph(lambda S, T: 2.0 + S * T), (-0.5, 0.5), (-0.5, 0.5)),
    "wave_graph": (_graph(lambda S, T: 2.0 + 0.3 * np.sin(2 * S) * np.cos(T)), (-0.5, 0.5), (-0.5, 0.5)),
    "sine_cylinder": (_graph(lambda S, T: 2.0 + 0.4 * np.sin(1.5 * S)), (-0.5, 0.5), (-0.5, 0.5)),
    "sphere_patch": (_sphere, (-0.4, 0.4), (-0.4, 0.4)),
    "torus_patch": (_torus, (-0.5, 0.5), (-0.5, 0.5)),
    "catenoid_patch": (_catenoid, (-0.4, 0.4), (-0.5, 0.5)),
    "helicoid_patch": (_helicoid, (0.5, 1.2), (-0.4, 0.4)),
    "enneper_patch": (_enneper, (-0.4, 0.4), (-0.4, 0.4)),
}


def analytic_surface(name, h=0.02, a=1.0, e=E3) -> ImmersionGrid:
    try:
        fn, sr, tr = ANALYTIC[name]
    except KeyError:
        raise ValueError(f"unknown analytic surface {name!r}; choose from {sorted(ANALYTIC)}") from None
    chart = GridChart2D.from_ranges(sr, tr, int(round((sr[1] - sr[0]) / h)) + 1, int(round((tr[1] - tr[0]) / h)) + 1)
    S, T = chart.mesh()
    return ImmersionGrid(chart, fn(S, T), np.asarray(e, dtype=float), a)
