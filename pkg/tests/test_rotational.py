import numpy as np
import pytest

from umbilic.catenary import build_cylinder
from umbilic.geomcore import ImmersionGrid
from umbilic.numerics import GridChart2D
from umbilic.reports import threshold_for
from umbilic.rotational import (RotationalSpec, build_rotational, flat_profile, hypersphere,
                                numeric_vs_structural, sphere_metric_diag, sphere_point,
                                structural_mean_curvature, structural_profile_vector, structural_report,
                                umbilic_genericity_check, warped_metric_residual)
from umbilic.singular import sm_residual

from conftest import unit_curve


def profile4(h=0.1):
    # 9 x 9 nodes at h = 0.1
    return build_cylinder(unit_curve(4), (-0.4, 0.4), (0.0, 0.8), h)


def spec4(h=0.1):
    return RotationalSpec(profile4(h), 4, ((1.0, 1.8), (0.3, 1.1)), 0.1)


def test_sphere_chart_is_unit_with_round_metric():
    ang = np.array([[0.7, 1.1, 2.0], [1.3, 0.4, -0.5]])
    assert np.allclose(np.linalg.norm(sphere_point(ang), axis=-1), 1.0)
    # finite-difference check of the diagonal metric
    a0, d = ang[0], 1e-6
    J = np.stack([(sphere_point(a0 + d * np.eye(3)[k]) - sphere_point(a0 - d * np.eye(3)[k])) / (2 * d)
                  for k in range(3)])
    assert np.allclose(J @ J.T, np.diag(sphere_metric_diag(a0)), atol=1e-9)


def test_build_rotational_blocks():
    spec = spec4()
    f = build_rotational(spec)
    assert f.sizes == (9, 9, 9, 9) and f.m == 5
    last = np.linalg.norm(f.points[..., 2:], axis=-1)
    assert np.allclose(last, spec.profile.phi[:, :, None, None])


def test_vertical_segment_profile_lies_on_unit_sphere_block():
    c = GridChart2D.from_ranges((-0.2, 0.2), (0.0, 0.4), 5, 5)
    S, T = c.mesh()
    pts = np.stack([T, np.zeros_like(S), 1.0 + 0 * S + 0.0], -1)
    pts[..., 1] = S
    prof = ImmersionGrid(c, pts, np.array([0.0, 0.0, 1.0]))
    f = build_rotational(RotationalSpec(prof, 3, ((0.0, 1.0),), 0.25))
    assert np.allclose(np.linalg.norm(f.points[..., 2:], axis=-1), 1.0)


def test_pole_windows_rejected():
    with pytest.raises(ValueError, match="pole"):
        RotationalSpec(profile4(), 4, ((0.1, 0.9), (0.0, 0.8)), 0.1)
    with pytest.raises(ValueError):
        RotationalSpec(profile4(), 4, ((1.0, 1.8),), 0.1)
    with pytest.raises(ValueError):
        RotationalSpec(profile4(), 2, (), 0.1)


def test_P_is_an_isometry(rng):
    spec = spec4()
    y = sphere_point(np.array([1.2, 0.5]))
    for _ in range(20):
        xi, zeta = rng.standard_normal(3), rng.standard_normal(3)
        assert np.dot(spec.P(xi, y), spec.P(zeta, y)) == pytest.approx(np.dot(xi, zeta), abs=1e-14)
        assert np.linalg.norm(spec.P(xi, y)) == pytest.approx(np.linalg.norm(xi), abs=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_flat_profile_norm_is_n_minus_2(n):
    prof = flat_profile()
    vec = structural_profile_vector(prof, n)[prof.interior()]
    assert np.max(np.abs(np.linalg.norm(vec, axis=-1) - (n - 2))) <= 1e-10


def test_structural_vectors_small_on_singular_minimal_profile():
    spec = spec4()
    vec, image = structural_mean_curvature(spec, (4, 4), sphere_point(np.array([1.4, 0.7])))
    thr = threshold_for("structural_mean_curvature", 0.1)
    assert np.linalg.norm(vec) <= thr and np.linalg.norm(image) <= thr
    assert structural_report(spec).passed


def test_structural_and_profile_residuals_decay_together():
    r = []
    for h in (0.1, 0.05):
        prof = build_cylinder(unit_curve(4), (-0.4, 0.4), (0.0, 0.8), h)
        spec = RotationalSpec(prof, 4, ((1.0, 1.8), (0.3, 1.1)), 0.1)
        r.append((structural_report(spec).l_inf, sm_residual(prof).l_inf))
    assert np.allclose(r[0][0], r[0][1]) and np.allclose(r[1][0], r[1][1])
    assert 3.5 < r[0][0] / r[1][0] < 4.5


def test_numeric_mean_curvature_matches_structural():
    spec = spec4()
    f = build_rotational(spec)
    rep = numeric_vs_structural(spec, f)
    assert rep.passed
    assert warped_metric_residual(spec, f) <= 2 * 0.1**2


def test_numeric_vs_structural_second_order():
    errs = []
    for h in (0.2, 0.1):
        prof = build_cylinder(unit_curve(4), (-0.4, 0.4), (0.0, 0.8), h)
        spec = RotationalSpec(prof, 4, ((1.0, 1.0 + 8 * h), (0.3, 0.3 + 8 * h)), h)
        errs.append(numeric_vs_structural(spec).l_inf)
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_umbilic_multiplicity_two_over_catenary_profile():
    f = build_rotational(spec4())
    rep = umbilic_genericity_check(f, (4, 4, 4, 4), [2, 3])
    assert rep["multiplicity"] == 2 and rep["generic"] and not rep["inconclusive"]
    assert rep["gap"] > 10 * rep["tol"]
    assert rep["umbilic_spread"] <= rep["tol"] and rep["eigen_deviation"] <= rep["tol"]
    assert rep["mixed_block"] <= threshold_for("nd_mean_curvature", 0.1)


def test_round_three_sphere_is_totally_umbilic():
    S3 = hypersphere(1.0, 3, ((1.0, 1.8), (1.0, 1.8), (0.0, 0.8)), 0.1)
    rep = umbilic_genericity_check(S3, (4, 4, 4), [1, 2])
    assert rep["multiplicity"] == 3 and not rep["generic"]


def test_umbilic_check_needs_hypersurface():
    prof = build_cylinder(unit_curve(4), (-0.4, 0.4), (0.0, 0.8), 0.1)
    P = prof.points
    prof5 = ImmersionGrid(prof.chart, np.concatenate([P[..., :2], np.zeros(P.shape[:2] + (1,)), P[..., 2:]], -1),
                          np.array([0.0, 0.0, 0.0, 1.0]), prof.a)
    f = build_rotational(RotationalSpec(prof5, 4, ((1.0, 1.8), (0.3, 1.1)), 0.1))
    with pytest.raises(ValueError, match="hypersurface"):
        umbilic_genericity_check(f, (4, 4, 4, 4), [2, 3])
