import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from umbilic.numerics import (DegenerateFrameError, GridChart2D, GridError, IntegrationError, bisect,
                              central_diff, complete_frame, gram_schmidt, interior_mask, mixed_diff,
                              path_integral, potential_field, rk4, second_diff, wirtinger)


def chart(ns=11, nt=9, h=0.1):
    return GridChart2D(-0.4, 0.2, h, h, ns, nt)


def test_chart_validation():
    with pytest.raises(GridError):
        GridChart2D(0, 0, 0.0, 0.1, 6, 6)
    with pytest.raises(GridError):
        GridChart2D(0, 0, 0.1, 0.1, 4, 6)
    c = chart()
    assert c.shape == (11, 9)
    assert c.sub(2).shape == (7, 5)
    assert np.isclose(c.sub(2).s0, c.s[2])


@given(st.integers(5, 30), st.integers(5, 30), st.floats(0.01, 1.0))
def test_refined_keeps_domain(ns, nt, h):
    c = GridChart2D(0.0, 0.0, h, h, ns, nt)
    r = c.refined()
    assert np.isclose(r.s[-1], c.s[-1]) and np.isclose(r.t[-1], c.t[-1])


def test_central_diff_exact_on_quadratics_with_nan_boundary():
    c = chart()
    S, T = c.mesh()
    f = 3 * S**2 - S * T + 2 * T
    ds = central_diff(f, c.hs, 0)
    assert np.all(np.isnan(ds[[0, -1]]))
    assert np.allclose(ds[1:-1], (6 * S - T)[1:-1], atol=1e-12)
    dt = central_diff(f, c.ht, 1)
    assert np.allclose(dt[:, 1:-1], (-S + 2)[:, 1:-1], atol=1e-12)


def test_second_and_mixed_diff_exact_on_cubics():
    c = chart()
    S, T = c.mesh()
    f = S**3 + S * T + T**2
    assert np.allclose(second_diff(f, c.hs, 0)[1:-1], (6 * S)[1:-1], atol=1e-10)
    assert np.allclose(second_diff(f, c.ht, 1)[:, 1:-1], 2.0, atol=1e-10)
    assert np.allclose(mixed_diff(f, c.hs, c.ht, 0, 1)[1:-1, 1:-1], 1.0, atol=1e-10)


def test_too_few_nodes_raises():
    with pytest.raises(GridError):
        central_diff(np.zeros((3, 6)), 0.1, 0)


def test_wirtinger_on_polynomials():
    c = chart()
    z = c.z()
    dz, dzb = wirtinger(z**2, c)
    inner = (slice(1, -1), slice(1, -1))
    assert np.allclose(dz[inner], 2 * z[inner]) and np.allclose(dzb[inner], 0, atol=1e-12)
    dz, dzb = wirtinger(np.abs(z) ** 2, c)
    assert np.allclose(dz[inner], np.conj(z)[inner]) and np.allclose(dzb[inner], z[inner])


def test_interior_mask():
    m = interior_mask((7, 8), 2)
    assert m.sum() == 3 * 4 and not m[1].any()


def test_rk4_fourth_order_and_backwards():
    errs = []
    for step in (0.1, 0.05):
        s, y = rk4(lambda s, y: y, [1.0], (0.0, 1.0), step)
        errs.append(abs(y[-1, 0] - np.e))
    assert 14 < errs[0] / errs[1] < 18
    s, y = rk4(lambda s, y: y, [1.0], (0.0, -1.0), 0.01)
    assert s[-1] == pytest.approx(-1.0) and y[-1, 0] == pytest.approx(np.exp(-1), abs=1e-9)


def test_rk4_stop_and_failures():
    s, y = rk4(lambda s, y: np.array([1.0]), [0.0], (0.0, 1.0), 0.1, stop=lambda s, y: y[0] > 0.45)
    assert y[-1, 0] <= 0.45 and len(s) == 5
    with pytest.raises(ValueError):
        rk4(lambda s, y: y, [1.0], (0, 1), 0.0)
    with pytest.raises(IntegrationError), np.errstate(over="ignore", invalid="ignore"):
        rk4(lambda s, y: y**2, [1.0], (0.0, 2.0), 0.01)


def _exact_form(c):
    # u = Re(z^3), so u_z = 3 z^2 / 2
    z = c.z()
    return 1.5 * z**2, np.conj(1.5 * z**2), np.real(z**3)


def test_path_integral_exact_form_and_orientation():
    c = chart(41, 33, 0.025)
    fz, fzb, u = _exact_form(c)
    a, b = (3, 4), (37, 29)
    for order in ("st", "ts"):
        val = path_integral(fz, fzb, c, a, b, order)
        assert abs(val.real - (u[b] - u[a])) < 2e-3 and abs(val.imag) < 1e-12
    assert path_integral(fz, fzb, c, b, a) == pytest.approx(-path_integral(fz, fzb, c, a, b, "ts"))
    with pytest.raises(ValueError):
        path_integral(fz, fzb, c, a, b, "diagonal")
    with pytest.raises(GridError):
        path_integral(fz, fzb, c, a, (99, 0))


def test_path_integral_second_order():
    errs = []
    for h, n in ((0.05, 21), (0.025, 41)):
        c = GridChart2D(0.0, 0.0, h, h, n, n)
        fz, fzb, u = _exact_form(c)
        errs.append(abs(path_integral(fz, fzb, c, (0, 0), (n - 1, n - 1)).real - (u[-1, -1] - u[0, 0])))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_potential_field_matches_path_integral():
    c = chart(15, 13, 0.05)
    fz, fzb, _ = _exact_form(c)
    base = (7, 6)
    for order in ("st", "ts"):
        pot = potential_field(fz, fzb, c, base, order)
        for node in ((0, 0), (14, 12), (3, 9)):
            assert pot[node] == pytest.approx(path_integral(fz, fzb, c, base, node, order), abs=1e-13)


def test_gram_schmidt_and_complete_frame():
    vs = gram_schmidt([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    M = np.array(vs)
    assert np.allclose(M @ M.T, np.eye(2), atol=1e-14)
    with pytest.raises(DegenerateFrameError):
        gram_schmidt([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    frame = complete_frame(vs, 3, 1)
    assert abs(np.dot(frame[0], vs[0])) < 1e-14 and abs(np.dot(frame[0], vs[1])) < 1e-14
    with pytest.raises(DegenerateFrameError):
        complete_frame(vs, 3, 2)


@settings(max_examples=50)
@given(arrays(np.float64, (3, 5), elements=st.floats(-1, 1)))
def test_gram_schmidt_orthonormal_property(vs):
    assume(np.linalg.svd(vs, compute_uv=False)[-1] > 1e-3)
    M = np.array(gram_schmidt(vs))
    assert np.allclose(M @ M.T, np.eye(3), atol=1e-12)


def test_bisect():
    assert bisect(lambda x: x * x - 2, 0, 2) == pytest.approx(np.sqrt(2), abs=1e-12)
    assert bisect(lambda x: x, 0, 1) == 0.0
    with pytest.raises(ValueError):
        bisect(lambda x: x * x + 1, -1, 1)
