"""Flat ruled (n-2)-singular minimal surfaces: cylinders over plane curves.

The curvature ``k(s)`` of the generating curve satisfies the first-order
equation

    kdot^2 + ((n-1)/(n-2))^2 k^4 - ((n-1)/lam)^2 k^(2n/(n-1)) = 0,

which we integrate in its differentiated second-order form starting from the
symmetric point ``k(0) = k_max``, ``kdot(0) = 0``.  The first-order equation
then becomes a conserved quantity used as a check.  Only ``lam > 0`` is
solved; ``lam < 0`` gives the mirror curve with the normal flipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .geomcore import ImmersionGrid
from .numerics import GridChart2D, bisect, rk4
from .singular import sm_residual

K_FLOOR = 1e-8


@dataclass(frozen=True)
class CatenaryParams:
    n: int
    lam: float
    s_range: tuple = (-2.0, 2.0)
    step: float = 1e-3

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n}")
        if self.lam == 0:
            raise ValueError("lambda must be a nonzero constant")
        if self.lam < 0:
            raise ValueError("only lambda > 0 is solved; lambda < 0 is the mirror curve (flip the normal)")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.s_range[0] < self.s_range[1]:
            raise ValueError(f"empty s_range {self.s_range}")

    @classmethod
    def normalized(cls, n, lam, half_width=3.0, step=1e-3):
        """Window ``|s| <= half_width / k_max`` and step ``step / max(1, k_max)``.

        Solutions for different ``lambda`` are dilations of one another, so
        this puts every case on the same footing as ``k_max = 1``.  A fixed
        window and step lose accuracy when ``k_max`` is large: the separatrix
        orbit is sensitive to any drift of the first integral, and the tail
        turns back up.
        """
        km = k_max(n, lam)
        return cls(n, lam, (-half_width / km, half_width / km), step / max(1.0, km))

    @property
    def a(self):
        return self.n - 2


def k_max(n, lam):
    """Curvature at the symmetric point, where kdot = 0."""
    return ((n - 2) / abs(lam)) ** ((n - 1) / (n - 2))


def first_integral(k, kdot, n, lam):
    return kdot**2 + ((n - 1) / (n - 2)) ** 2 * k**4 - ((n - 1) / lam) ** 2 * np.abs(k) ** (2 * n / (n - 1))


def k_max_bisect(n, lam, tol=1e-12):
    """Cross-check of :func:`k_max`: positive root of the first integral at kdot = 0."""
    g = lambda k: first_integral(k, 0.0, n, lam) / k**4
    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    lo = hi / 2
    while g(lo) > 0:
        lo /= 2.0
    return bisect(g, lo, hi, tol=tol)


def curvature_rhs(n, lam):
    c1 = n * (n - 1) / lam**2
    c2 = 2 * ((n - 1) / (n - 2)) ** 2
    expo = (n + 1) / (n - 1)

    def rhs(s, y):
        k, kd, theta = y[0], y[1], y[2]
        return np.array([kd, c1 * k**expo - c2 * k**3, k, np.cos(theta), np.sin(theta)])

    return rhs


@dataclass
class CurvatureProfile:
    """RK4 trajectory: curvature, its derivative, and the Frenet integrals
    ``theta = int k``, ``(x, z) = int (cos theta, sin theta)`` from s = 0."""

    s: np.ndarray
    k: np.ndarray
    kdot: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    z: np.ndarray

    def first_integral(self, params: CatenaryParams):
        return first_integral(self.k, self.kdot, params.n, params.lam)


def solve_curvature(params: CatenaryParams) -> CurvatureProfile:
    """Integrate from the symmetric point in both directions over ``params.s_range``.

    A direction stops early once ``k`` drops below ``1e-8``.
    """
    n, lam = params.n, params.lam
    y0 = np.array([k_max(n, lam), 0.0, 0.0, 0.0, 0.0])
    rhs = curvature_rhs(n, lam)
    stop = lambda s, y: y[0] <= K_FLOOR
    sa, sb = params.s_range
    fwd_s, fwd = rk4(rhs, y0, (0.0, max(sb, 0.0)), params.step, stop)
    bwd_s, bwd = rk4(rhs, y0, (0.0, min(sa, 0.0)), params.step, stop)
    s = np.concatenate([bwd_s[::-1], fwd_s[1:]])
    Y = np.concatenate([bwd[::-1], fwd[1:]])
    keep = (s >= sa - 1e-12) & (s <= sb + 1e-12)
    s, Y = s[keep], Y[keep]
    return CurvatureProfile(s, Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3], Y[:, 4])


def check_nonconstant(k, rtol=1e-9):
    k = np.asarray(k)
    if np.ptp(k) <= rtol * np.max(np.abs(k)):
        raise ValueError("curvature is constant (a circle); the construction needs a nonconstant solution")


@dataclass
class FrenetCurve:
    s: np.ndarray
    position: np.ndarray      # (N, 2) in the (x, z) plane
    theta: np.ndarray
    k: np.ndarray
    u: np.ndarray
    v: np.ndarray
    udot: np.ndarray
    e_candidate: np.ndarray   # (N, 2)
    params: CatenaryParams

    @property
    def tangent(self):
        return np.column_stack([np.cos(self.theta), np.sin(self.theta)])

    @property
    def normal(self):
        return np.column_stack([-np.sin(self.theta), np.cos(self.theta)])

    @property
    def e(self):
        return np.mean(self.e_candidate, axis=0)

    def invariants(self):
        """Deviations of the identities that make the cylinder singular minimal."""
        n = self.params.n
        ec = self.e_candidate
        i0 = int(np.argmin(np.abs(self.s)))
        ku = self.k * self.u**(n - 1)
        return {
            "e_constancy": float(np.max(np.linalg.norm(ec - ec[i0], axis=1))),
            "e_unit": float(np.max(np.abs(np.linalg.norm(ec, axis=1) - 1.0))),
            "udot2_v2": float(np.max(np.abs(self.udot**2 + self.v**2 - 1.0))),
            "ku_relation": float(np.max(np.abs(self.k * self.u - (n - 2) * self.v))),
            "k_u_pow_constancy": float(np.ptp(ku)),
            "height_vs_u": float(np.max(np.abs(self.position @ self.e - self.u))),
        }


def reconstruct_curve(profile: CurvatureProfile, params: CatenaryParams) -> FrenetCurve:
    """Build the plane curve and density vector, aligned so ``e = (0, 1)`` and ``<c, e> = u``."""
    check_nonconstant(profile.k)
    if np.any(profile.k <= 0):
        raise ValueError("curvature must be positive on the window")
    n, lam = params.n, params.lam
    k = profile.k
    u = lam * k ** (-1.0 / (n - 1))
    v = lam / (n - 2) * k ** ((n - 2) / (n - 1))
    udot = -lam / (n - 1) * k ** (-n / (n - 1)) * profile.kdot
    T = np.column_stack([np.cos(profile.theta), np.sin(profile.theta)])
    N = np.column_stack([-np.sin(profile.theta), np.cos(profile.theta)])
    ec = udot[:, None] * T + v[:, None] * N
    pos = np.column_stack([profile.x, profile.z])

    # rotate the mean density vector onto (0, 1), then shift heights onto u
    mean = ec.mean(axis=0)
    ang = np.pi / 2 - np.arctan2(mean[1], mean[0])
    R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    pos, ec = pos @ R.T, ec @ R.T
    theta = profile.theta + ang
    pos = pos + np.array([0.0, np.mean(u - pos[:, 1])])
    pos[:, 0] -= np.interp(0.0, profile.s, pos[:, 0]) if profile.s[0] <= 0 <= profile.s[-1] else 0.0
    return FrenetCurve(profile.s, pos, theta, k, u, v, udot, ec, params)


def catenary_curve(n, lam, s_range=(-2.0, 2.0), step=1e-3) -> FrenetCurve:
    params = CatenaryParams(n, lam, tuple(s_range), step)
    return reconstruct_curve(solve_curvature(params), params)


def _curve_interpolants(curve: FrenetCurve):
    T = curve.tangent
    return (CubicHermiteSpline(curve.s, curve.position[:, 0], T[:, 0]),
            CubicHermiteSpline(curve.s, curve.position[:, 1], T[:, 1]))


def build_cylinder(curve: FrenetCurve, s_range, t_range, h, angle=0.0) -> ImmersionGrid:
    """Cylinder ``g = (x(sigma), tau, z(sigma))`` in R^3 with e = (0, 0, 1), a = n - 2.

    The chart is isometric: ``(sigma, tau)`` is ``(s, t)`` rotated by
    ``angle``, which keeps it isothermal while mixing both chart directions.
    """
    (sa, sb), (ta, tb) = s_range, t_range
    ns = int(round((sb - sa) / h)) + 1
    nt = int(round((tb - ta) / h)) + 1
    chart = GridChart2D(float(sa), float(ta), float(h), float(h), ns, nt)
    S, Tt = chart.mesh()
    sigma = np.cos(angle) * S - np.sin(angle) * Tt
    tau = np.sin(angle) * S + np.cos(angle) * Tt
    if sigma.min() < curve.s[0] - 1e-12 or sigma.max() > curve.s[-1] + 1e-12:
        raise ValueError(f"chart needs the curve on [{sigma.min():.4g}, {sigma.max():.4g}], "
                         f"solved window is [{curve.s[0]:.4g}, {curve.s[-1]:.4g}]")
    fx, fz = _curve_interpolants(curve)
    points = np.stack([fx(sigma), tau, fz(sigma)], axis=-1)
    if np.any(points[..., 2] <= 0):
        raise ValueError("cylinder leaves the half space phi > 0 on this window; shrink s_range")
    return ImmersionGrid(chart, points, np.array([0.0, 0.0, 1.0]), float(curve.params.n - 2))


def circle_cylinder(radius=1.0, center_height=3.0, s_range=(-1.0, 1.0), t_range=(0.0, 1.0), h=0.05, a=1.0):
    """Cylinder over a unit-speed circle in the (x, z) plane, e = (0, 0, 1)."""
    chart = GridChart2D.from_ranges(s_range, t_range, int(round((s_range[1] - s_range[0]) / h)) + 1,
                                    int(round((t_range[1] - t_range[0]) / h)) + 1)
    S, T = chart.mesh()
    ang = S / radius
    pts = np.stack([radius * np.cos(ang), T, center_height + radius * np.sin(ang)], -1)
    return ImmersionGrid(chart, pts, np.array([0.0, 0.0, 1.0]), a)


def cone_over_curve(curve_fn, s_range, t_range, h, e, a=1.0):
    """``g(s, t) = t c(s)`` for a unit-speed spherical curve ``c``."""
    chart = GridChart2D.from_ranges(s_range, t_range, int(round((s_range[1] - s_range[0]) / h)) + 1,
                                    int(round((t_range[1] - t_range[0]) / h)) + 1)
    S, T = chart.mesh()
    pts = T[..., None] * curve_fn(S)
    return ImmersionGrid(chart, pts, np.asarray(e, dtype=float) / np.linalg.norm(e), a)


def latitude_cone(half_angle, s_range=(-0.5, 0.5), t_range=(0.5, 1.5), h=0.02, a=1.0):
    """Circular cone about the z-axis with the given half angle; e = (0, 0, 1)."""
    sb = np.sin(half_angle)

    def c(s):
        return np.stack([sb * np.cos(s / sb), sb * np.sin(s / sb), np.cos(half_angle) * np.ones_like(s)], -1)

    return cone_over_curve(c, s_range, t_range, h, [0.0, 0.0, 1.0], a)


def tangent_developable(curve_fn, dcurve_fn, s_range, t_range, h, e, a=1.0):
    """``g(s, t) = c(s) + t c'(s)`` for a unit-speed curve."""
    chart = GridChart2D.from_ranges(s_range, t_range, int(round((s_range[1] - s_range[0]) / h)) + 1,
                                    int(round((t_range[1] - t_range[0]) / h)) + 1)
    S, T = chart.mesh()
    pts = curve_fn(S) + T[..., None] * dcurve_fn(S)
    return ImmersionGrid(chart, pts, np.asarray(e, dtype=float) / np.linalg.norm(e), a)


def _helix(radius=1.0, pitch=0.5):
    c = np.hypot(radius, pitch)

    def pos(s):
        return np.stack([radius * np.cos(s / c), radius * np.sin(s / c), pitch * s / c + 3.0], -1)

    def tan(s):
        return np.stack([-radius / c * np.sin(s / c), radius / c * np.cos(s / c), pitch / c * np.ones_like(s)], -1)

    return pos, tan


def _min_norm(values, mask):
    return float(np.min(np.linalg.norm(values, axis=-1)[mask]))


def excluded_cases_demo(a=1.0, h=0.02):
    """Residual lower bounds for surfaces excluded from the cylinder family.

    Each entry reports the L-infinity and the minimum-over-nodes norm of
    ``2H - (a/phi) e_perp``.  The tangent developable entries also record
    ``max |<2H, c'>|``, which vanishes because the mean curvature is normal.
    """
    from .singular import sm_field

    cases = {}

    def great_circle(s):
        return np.stack([np.cos(s), np.sin(s), np.zeros_like(s)], -1)

    cases["cone_great_circle"] = cone_over_curve(great_circle, (-0.5, 0.5), (0.5, 1.5), h, [1.0, 0.0, 1.0], a)
    cases["cone_latitude_30deg"] = latitude_cone(np.pi / 6, h=h, a=a)
    pos, tan = _helix()
    cases["tangent_developable_helix"] = tangent_developable(pos, tan, (-0.5, 0.5), (0.5, 1.0), h, [0, 0, 1], a)

    def plane_curve(s):
        return np.stack([np.sin(s), np.zeros_like(s), 2.0 - np.cos(s)], -1)

    def plane_tan(s):
        return np.stack([np.cos(s), np.zeros_like(s), np.sin(s)], -1)

    cases["tangent_developable_plane_curve"] = tangent_developable(
        plane_curve, plane_tan, (0.3, 0.8), (0.2, 0.7), h, [0.0, 1.0, 1.0], a)
    cases["circle_cylinder"] = circle_cylinder(h=h, a=a)

    report = {}
    for name, surf in cases.items():
        R = sm_field(surf)
        mask = surf.interior()
        entry = {"l_inf": sm_residual(surf).l_inf, "min_norm": _min_norm(R, mask), "h": h, "a": a}
        if name.startswith("tangent_developable"):
            fl = surf.fields
            along = np.abs(np.sum(2 * fl.H * fl.gt, -1)) / np.linalg.norm(fl.gt, axis=-1)
            entry["max_H_along_ruling"] = float(np.max(along[mask]))
        report[name] = entry
    return report
