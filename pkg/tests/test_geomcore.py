import numpy as np
import pytest

from umbilic.geomcore import (DegenerateMetricError, ImmersionGrid, InvalidSurfaceError, e_perp,
                              fundamental_data, laplace_beltrami, laplace_beltrami_field, mean_curvature_nd,
                              shape_operator, tangential_part)
from umbilic.numerics import GridChart2D
from umbilic.rotational import hypersphere
from umbilic.samples import analytic_surface

E3 = np.array([0.0, 0.0, 1.0])


def sphere(R=1.5, h=0.02, center=3.0):
    chart = GridChart2D.from_ranges((-0.4, 0.4), (-0.4, 0.4), int(0.8 / h) + 1, int(0.8 / h) + 1)
    S, T = chart.mesh()
    pts = np.stack([R * np.cos(S) * np.cos(T), R * np.cos(S) * np.sin(T), center + R * np.sin(S)], -1)
    return ImmersionGrid(chart, pts, E3, 1.0)


def test_plane_has_zero_second_form():
    surf = analytic_surface("tilted_plane", 0.05)
    inner = surf.interior(1)
    assert np.max(np.abs(surf.fields.alpha[inner])) < 1e-12
    assert np.max(np.abs(surf.fields.H[inner])) < 1e-12


def test_sphere_mean_curvature_second_order():
    errs = []
    for h in (0.04, 0.02):
        surf = sphere(h=h)
        Hn = np.linalg.norm(surf.fields.H, axis=-1)[surf.interior()]
        errs.append(np.max(np.abs(Hn - 1 / 1.5)))
    assert errs[1] < 1e-4 and 3.5 < errs[0] / errs[1] < 4.5


def test_mean_curvature_points_to_centre():
    surf = sphere()
    i, j = 20, 20
    inward = np.array([0.0, 0.0, 3.0]) - surf.points[i, j]
    assert np.dot(surf.fields.H[i, j], inward) > 0


def test_fundamental_data_frame_and_node_check():
    surf = sphere()
    fd = fundamental_data(surf, (10, 12))
    xi = fd.normal_frame[0]
    fl = surf.fields
    assert abs(np.dot(xi, fl.gs[10, 12])) < 1e-12 and abs(np.dot(xi, fl.gt[10, 12])) < 1e-12
    assert np.allclose(fd.metric @ fd.inverse_metric, np.eye(2))
    with pytest.raises(ValueError):
        fundamental_data(surf, (1, 5))


def test_shape_operator_of_sphere_is_scalar():
    surf = sphere()
    xi = fundamental_data(surf, (20, 20)).normal_frame[0]
    A = shape_operator(surf, (20, 20), xi)
    assert np.allclose(A, A[0, 0] * np.eye(2), atol=1e-4)
    assert abs(abs(A[0, 0]) - 1 / 1.5) < 1e-4
    with pytest.raises(ValueError):
        shape_operator(surf, (20, 20), surf.fields.gs[20, 20])


def test_laplace_beltrami_on_sphere_coordinate():
    # coordinate functions of a sphere of radius R satisfy Delta x = -2 x / R^2
    surf = sphere(h=0.02)
    x = surf.points[..., 0]
    lap = laplace_beltrami_field(surf, x)
    mask = surf.interior()
    assert np.max(np.abs(lap + 2 * x / 1.5**2)[mask]) < 2e-3
    assert laplace_beltrami(surf, x, (20, 20)) == pytest.approx(-2 * x[20, 20] / 2.25, abs=2e-3)


def test_e_perp_plus_tangential_is_e():
    surf = analytic_surface("saddle", 0.05)
    total = e_perp(surf) + tangential_part(surf, E3)
    assert np.allclose(total[surf.interior(1)], E3)


def test_invalid_surfaces_rejected():
    c = GridChart2D(0, 0, 0.1, 0.1, 6, 6)
    S, T = c.mesh()
    pts = np.stack([S, T, np.ones_like(S)], -1)
    with pytest.raises(InvalidSurfaceError):
        ImmersionGrid(c, pts, np.array([0, 0, 2.0]))
    with pytest.raises(InvalidSurfaceError):
        ImmersionGrid(c, pts - np.array([0, 0, 2.0]), E3)
    bad = pts.copy()
    bad[2, 2, 0] = np.nan
    with pytest.raises(InvalidSurfaceError):
        ImmersionGrid(c, bad, E3)
    with pytest.raises(InvalidSurfaceError):
        ImmersionGrid(c, pts[:, :4], E3)


def test_degenerate_metric_raises():
    c = GridChart2D(0, 0, 0.1, 0.1, 6, 6)
    S, T = c.mesh()
    pts = np.stack([S, S, np.ones_like(S)], -1)
    with pytest.raises(DegenerateMetricError):
        ImmersionGrid(c, pts, E3).fields


def test_hypersphere_trace():
    R = 2.0
    S = hypersphere(R, 3, ((1.0, 1.8), (1.0, 1.8), (0.0, 0.8)), 0.1)
    nH = mean_curvature_nd(S, (4, 4, 4))
    assert abs(np.linalg.norm(nH) - 3 / R) < 3 * 0.1**2
    with pytest.raises(ValueError):
        mean_curvature_nd(S, (0, 4, 4))
