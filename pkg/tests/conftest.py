import functools

import numpy as np
import pytest

from umbilic.catenary import build_cylinder, catenary_curve


@functools.lru_cache(maxsize=None)
def unit_curve(n):
    """Profile curve with peak curvature 1 (lambda = n - 2)."""
    return catenary_curve(n, float(n - 2), (-3.0, 3.0), 1e-3)


def cylinder(n, h, angle=0.5, s_range=(-1.0, 1.0), t_range=(-0.5, 0.5)):
    return build_cylinder(unit_curve(n), s_range, t_range, h, angle=angle)


def weierstrass_cylinder(n, h, angle=0.5):
    # away from s = 0, where G_p vanishes
    return build_cylinder(unit_curve(n), (0.3, 1.3), (-1.0, 0.0), h, angle=angle)


def embed_p2(surf, beta=0.7):
    """Rotate the horizontal axis of a surface in R^3 into R^3 x R, giving p = 2."""
    from umbilic.geomcore import ImmersionGrid
    P = surf.points
    P4 = np.stack([P[..., 0] * np.cos(beta), P[..., 1], P[..., 0] * np.sin(beta), P[..., 2]], -1)
    return ImmersionGrid(surf.chart, P4, np.array([0.0, 0.0, 0.0, 1.0]), surf.a)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
