"""(n-2)-rotational submanifolds ``f(x, y) = (h(x), phi(x) j(y))`` over a
profile surface ``g = (h, phi e)``.

The sphere ``S^{n-2}`` is charted with hyperspherical angles

    j = (cos a1, sin a1 cos a2, ..., sin a1 ... sin a_{n-3} cos a_{n-2},
         sin a1 ... sin a_{n-2}),

whose poles (``sin a_k = 0`` for ``k < n-2``) are kept at least
``POLE_MARGIN`` away.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .geomcore import ImmersionGrid, ImmersionGridND, e_perp
from .numerics import GridChart2D, complete_frame, gram_schmidt
from .reports import ResidualReport, threshold_for

POLE_MARGIN = 0.2


def sphere_point(angles):
    """Hyperspherical chart ``R^{d} -> S^{d} subset R^{d+1}`` (angles on the last axis)."""
    angles = np.asarray(angles, dtype=float)
    d = angles.shape[-1]
    out = np.empty(angles.shape[:-1] + (d + 1,))
    prod = np.ones(angles.shape[:-1])
    for k in range(d):
        out[..., k] = prod * np.cos(angles[..., k])
        prod = prod * np.sin(angles[..., k])
    out[..., d] = prod
    return out


def sphere_metric_diag(angles):
    """Diagonal of the round metric in the hyperspherical chart."""
    angles = np.asarray(angles, dtype=float)
    d = angles.shape[-1]
    out = np.ones(angles.shape)
    for k in range(1, d):
        out[..., k] = out[..., k - 1] * np.sin(angles[..., k - 1]) ** 2
    return out


@dataclass(eq=False)
class RotationalSpec:
    """Profile, target dimension, and the sphere chart window.

    ``angle_ranges`` holds one ``(lo, hi)`` per sphere angle and
    ``angle_h`` is the angular spacing (the same for every angle).
    """

    profile: ImmersionGrid
    n: int
    angle_ranges: tuple
    angle_h: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n}")
        if len(self.angle_ranges) != self.n - 2:
            raise ValueError(f"need {self.n - 2} angle ranges for S^{self.n - 2}")
        for k, (lo, hi) in enumerate(self.angle_ranges[:-1]):
            if lo < POLE_MARGIN or hi > np.pi - POLE_MARGIN:
                raise ValueError(f"angle {k} window [{lo}, {hi}] comes within {POLE_MARGIN} rad of a pole")
        if np.any(self.profile.phi <= 0):
            raise ValueError("profile must satisfy phi > 0")

    @property
    def p(self):
        return self.profile.m - 2

    @property
    def axis_basis(self):
        """Orthonormal basis of the rotation axis ``R^{p+1}``, the complement of ``e``."""
        e = self.profile.e
        return np.array(complete_frame([e], self.profile.m, self.profile.m - 1))

    def angle_axes(self):
        return [lo + self.angle_h * np.arange(int(round((hi - lo) / self.angle_h)) + 1)
                for lo, hi in self.angle_ranges]

    def P(self, xi, y):
        """Bundle isometry ``xi -> (xi - <xi,e> e) + <xi,e> y`` written in R^{n+p} coordinates."""
        xi = np.asarray(xi, dtype=float)
        along = xi @ self.profile.e
        return np.concatenate([xi @ self.axis_basis.T, along[..., None] * np.asarray(y)], axis=-1)


def build_rotational(spec: RotationalSpec) -> ImmersionGridND:
    prof = spec.profile
    h = prof.points @ spec.axis_basis.T                          # (ns, nt, p+1)
    phi = prof.phi
    axes = spec.angle_axes()
    grids = np.meshgrid(*axes, indexing="ij")
    j = sphere_point(np.stack(grids, -1))                        # (*na, n-1)
    nd = len(axes)
    ns, nt = prof.chart.shape
    hpart = np.broadcast_to(h.reshape(ns, nt, *(1,) * nd, -1), (ns, nt, *j.shape[:-1], h.shape[-1]))
    spart = phi.reshape(ns, nt, *(1,) * nd, 1) * j.reshape(1, 1, *j.shape)
    points = np.concatenate([hpart, spart], axis=-1)
    c = prof.chart
    origins = (c.s0, c.t0) + tuple(ax[0] for ax in axes)
    spacings = (c.hs, c.ht) + (spec.angle_h,) * nd
    return ImmersionGridND(origins, spacings, points)


def structural_profile_vector(profile: ImmersionGrid, n):
    """``2H_g - ((n-2)/phi) e_perp`` at every profile node."""
    return 2.0 * profile.fields.H - ((n - 2) / profile.phi)[..., None] * e_perp(profile)


def structural_mean_curvature(spec: RotationalSpec, node, y):
    """Return ``(profile-side vector, its image nH_f)`` at profile ``node`` and sphere point ``y``."""
    vec = structural_profile_vector(spec.profile, spec.n)[tuple(node)]
    return vec, spec.P(vec, y)


def structural_field(spec: RotationalSpec):
    """``nH_f`` on the full n-dimensional grid of :func:`build_rotational`."""
    vec = structural_profile_vector(spec.profile, spec.n)
    grids = np.meshgrid(*spec.angle_axes(), indexing="ij")
    j = sphere_point(np.stack(grids, -1))
    nd = spec.n - 2
    ns, nt = spec.profile.chart.shape
    v = vec.reshape(ns, nt, *(1,) * nd, -1)
    along = v @ spec.profile.e
    hpart = np.broadcast_to(v @ spec.axis_basis.T, (ns, nt, *j.shape[:-1], spec.p + 1))
    return np.concatenate([hpart, along[..., None] * j.reshape(1, 1, *j.shape)], axis=-1)


def structural_report(spec: RotationalSpec, threshold=None) -> ResidualReport:
    """Norm of ``nH_f`` from the structural formula over interior profile nodes."""
    c = spec.profile.chart
    vec = structural_profile_vector(spec.profile, spec.n)
    if threshold is None:
        threshold = threshold_for("structural_mean_curvature", c.h)
    return ResidualReport.from_field("structural_mean_curvature", vec, spec.profile.interior(),
                                     c.hs * c.ht, c.h, threshold)


def numeric_vs_structural(spec: RotationalSpec, f: ImmersionGridND | None = None, threshold=None):
    """Compare ``nH`` from n-dim finite differences with the structural formula.

    Nodes are those two layers inside the profile chart and one layer inside
    every angle axis.
    """
    f = build_rotational(spec) if f is None else f
    diff = f.fields["trace"] - structural_field(spec)
    mask = np.zeros(f.sizes, dtype=bool)
    sl = (slice(2, -2), slice(2, -2)) + tuple(slice(1, -1) for _ in range(spec.n - 2))
    mask[sl] = True
    h = max(f.spacings)
    if threshold is None:
        threshold = threshold_for("nd_mean_curvature", h)
    mag = np.linalg.norm(diff, axis=-1)[mask]
    rep = ResidualReport("nd_mean_curvature", float(mag.max()), float(np.sqrt(np.mean(mag**2))), h, threshold)
    rep.notes["nodes"] = int(mask.sum())
    return rep


def warped_metric_residual(spec: RotationalSpec, f: ImmersionGridND | None = None):
    """Max deviation of the induced metric from ``g_L + phi^2 g_S``."""
    f = build_rotational(spec) if f is None else f
    metric = f.fields["metric"]
    n = spec.n
    expected = np.zeros_like(metric)
    fl = spec.profile.fields
    nd = n - 2
    ns, nt = spec.profile.chart.shape
    expected[..., :2, :2] = fl.metric.reshape(ns, nt, *(1,) * nd, 2, 2)
    grids = np.meshgrid(*spec.angle_axes(), indexing="ij")
    diag = sphere_metric_diag(np.stack(grids, -1))
    phi2 = (spec.profile.phi**2).reshape(ns, nt, *(1,) * nd, 1)
    for k in range(nd):
        expected[..., 2 + k, 2 + k] = (phi2[..., 0] * diag[None, None, ..., k])
    sl = (slice(1, -1),) * n
    return float(np.max(np.abs(metric - expected)[sl]))


def hypersphere(radius, n, angle_ranges, h):
    """Round ``S^n`` of the given radius in ``R^{n+1}`` on a hyperspherical chart."""
    axes = [lo + h * np.arange(int(round((hi - lo) / h)) + 1) for lo, hi in angle_ranges]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = radius * sphere_point(np.stack(grids, -1))
    return ImmersionGridND(tuple(ax[0] for ax in axes), (h,) * n, pts)


def umbilic_genericity_check(f: ImmersionGridND, node, umbilic_axes, gap_factor=10.0, tol=None):
    """Shape-operator analysis of a hypersurface at one node.

    ``umbilic_axes`` are the parameter axes expected to span the umbilic
    distribution (the sphere directions).  Eigenvalues of ``A_eta`` within
    ``tol`` of their common value ``mu`` are counted toward the multiplicity;
    the result is generic when that count equals ``len(umbilic_axes)``.  A
    spectral gap below ``gap_factor * tol`` marks the result inconclusive.
    """
    node = tuple(node)
    if f.m != f.n + 1:
        raise ValueError("umbilic check is implemented for hypersurfaces only")
    fl = f.fields
    T = fl["tangents"][node]
    if tol is None:
        tol = threshold_for("nd_mean_curvature", max(f.spacings))
    frame = gram_schmidt(list(T))
    eta = complete_frame(frame, f.m, 1)[0]
    B = np.einsum("abk,k->ab", fl["second"][node], eta)
    g = fl["metric"][node]
    eig = scipy.linalg.eigh(B, g, eigvals_only=True)
    ua = list(umbilic_axes)
    other = [k for k in range(f.n) if k not in ua]
    rayleigh = np.array([B[c, c] / g[c, c] for c in ua])
    mu = float(rayleigh.mean())
    A = np.linalg.solve(g, B)
    eigen_dev = max(float(np.linalg.norm(A[:, c] - mu * np.eye(f.n)[:, c])) for c in ua)
    mixed = max((abs(B[a, b]) / np.sqrt(g[a, a] * g[b, b]) for a in other for b in ua), default=0.0)
    close = np.abs(eig - mu) <= tol
    multiplicity = int(close.sum())
    gap = float(np.min(np.abs(eig[~close] - mu))) if (~close).any() else float("inf")
    return {
        "eigenvalues": eig.tolist(),
        "mu": mu,
        "umbilic_spread": float(np.ptp(rayleigh)),
        "eigen_deviation": eigen_dev,
        "mixed_block": float(mixed),
        "multiplicity": multiplicity,
        "gap": gap,
        "tol": float(tol),
        "inconclusive": bool(gap < gap_factor * tol),
        "generic": bool(multiplicity == len(ua)),
    }


def flat_profile(s_range=(-0.5, 0.5), t_range=(-0.5, 0.5), h=0.05, height=1.0, p=1):
    """Horizontal plane ``phi = height`` in R^{p+2} with e the last axis."""
    chart = GridChart2D.from_ranges(s_range, t_range, int(round((s_range[1] - s_range[0]) / h)) + 1,
                                    int(round((t_range[1] - t_range[0]) / h)) + 1)
    S, T = chart.mesh()
    pts = np.zeros(chart.shape + (p + 2,))
    pts[..., 0], pts[..., 1], pts[..., -1] = S, T, height
    e = np.zeros(p + 2)
    e[-1] = 1.0
    return ImmersionGrid(chart, pts, e, 1.0)
