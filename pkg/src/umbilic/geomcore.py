"""Extrinsic geometry of sampled immersions.

Normalization used throughout: for surfaces ``2H = g^{ij} alpha_ij`` and for
n-dimensional submanifolds ``nH = g^{ij} alpha_ij``.  Vectors returned here
are ambient (Euclidean) vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .numerics import (GridChart2D, central_diff, complete_frame, gram_schmidt, interior_mask,
                       mixed_diff, second_diff)

DET_TOL = 1e-10
COLLAR = 2


class DegenerateMetricError(ValueError):
    pass


class InvalidSurfaceError(ValueError):
    pass


@dataclass(eq=False)
class ImmersionGrid:
    """Sampled surface ``g: U -> R^m`` with density vector ``e`` and exponent ``a``.

    ``points`` has shape ``(ns, nt, m)``; the height is ``phi = <g, e>``.
    """

    chart: GridChart2D
    points: np.ndarray
    e: np.ndarray
    a: float = 1.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.e = np.asarray(self.e, dtype=float)
        if self.points.ndim != 3 or self.points.shape[:2] != self.chart.shape:
            raise InvalidSurfaceError(f"points shape {self.points.shape} does not match chart {self.chart.shape}")
        if self.points.shape[2] < 3 or self.e.shape != (self.points.shape[2],):
            raise InvalidSurfaceError("ambient dimension must be >= 3 and match the density vector")
        if abs(np.linalg.norm(self.e) - 1.0) > 1e-12:
            raise InvalidSurfaceError(f"density vector must be unit, |e| = {np.linalg.norm(self.e)!r}")
        if not np.all(np.isfinite(self.points)):
            raise InvalidSurfaceError("non-finite surface coordinates")
        if np.any(self.phi <= 0):
            raise InvalidSurfaceError(f"surface leaves the half space phi > 0 (min phi = {self.phi.min():.3g})")

    @property
    def m(self):
        return self.points.shape[2]

    @property
    def phi(self):
        return self.points @ self.e

    def with_points(self, points):
        return ImmersionGrid(self.chart, points, self.e, self.a)

    def interior(self, collar=COLLAR):
        return interior_mask(self.chart.shape, collar)

    @cached_property
    def fields(self) -> "SurfaceFields":
        return SurfaceFields.compute(self)


def _dot(u, v):
    return np.einsum("...k,...k->...", u, v)


@dataclass(eq=False)
class SurfaceFields:
    """Grid-wide first and second order data; invalid nodes hold NaN."""

    gs: np.ndarray
    gt: np.ndarray
    gss: np.ndarray
    gst: np.ndarray
    gtt: np.ndarray
    metric: np.ndarray       # (ns, nt, 2, 2)
    inverse: np.ndarray
    det: np.ndarray
    alpha: np.ndarray        # (ns, nt, 2, 2, m), normal-valued
    H: np.ndarray            # (ns, nt, m)

    @classmethod
    def compute(cls, surf: ImmersionGrid):
        P, c = surf.points, surf.chart
        gs, gt = central_diff(P, c.hs, 0), central_diff(P, c.ht, 1)
        gss, gtt = second_diff(P, c.hs, 0), second_diff(P, c.ht, 1)
        gst = mixed_diff(P, c.hs, c.ht, 0, 1)
        E, F, G = _dot(gs, gs), _dot(gs, gt), _dot(gt, gt)
        metric = np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)
        det = E * G - F * F
        inside = surf.interior(1)
        if np.any(det[inside] <= DET_TOL):
            bad = np.argwhere(inside & (det <= DET_TOL))[0]
            raise DegenerateMetricError(f"metric determinant {det[tuple(bad)]:.3e} <= {DET_TOL} at node {tuple(bad)}")
        inverse = np.stack([np.stack([G, -F], -1), np.stack([-F, E], -1)], -2) / det[..., None, None]
        second = np.stack([np.stack([gss, gst], -2), np.stack([gst, gtt], -2)], -3)
        tang = np.stack([gs, gt], -2)
        alpha = normal_part(second, tang, inverse)
        H = 0.5 * np.einsum("...ij,...ijk->...k", inverse, alpha)
        return cls(gs, gt, gss, gst, gtt, metric, inverse, det, alpha, H)

    @property
    def tangents(self):
        return np.stack([self.gs, self.gt], -2)


def normal_part(v, tangents, inverse):
    """Remove the metric-orthogonal tangential projection from ``v``.

    ``tangents`` is ``(..., d, m)`` and ``inverse`` the inverse metric
    ``(..., d, d)``; ``v`` may carry extra axes between the node axes and
    the component axis as long as they broadcast.
    """
    d = tangents.shape[-2]
    lead = v.ndim - tangents.ndim + 1  # extra axes in v such as (i, j) of second partials
    T = tangents.reshape(tangents.shape[:-2] + (1,) * lead + tangents.shape[-2:])
    Ginv = inverse.reshape(inverse.shape[:-2] + (1,) * lead + (d, d))
    coeff = np.einsum("...ak,...k->...a", T, v)
    return v - np.einsum("...a,...ab,...bk->...k", coeff, Ginv, T)


@dataclass
class FundamentalData:
    metric: np.ndarray
    inverse_metric: np.ndarray
    normal_frame: list
    second_form: dict = field(default_factory=dict)
    mean_curvature: np.ndarray | None = None


def _check_node(shape, node, collar):
    i, j = node
    if not (collar <= i < shape[0] - collar and collar <= j < shape[1] - collar):
        raise ValueError(f"node {node} is not interior (needs {collar} layers from each boundary)")


def fundamental_data(surf: ImmersionGrid, node) -> FundamentalData:
    _check_node(surf.chart.shape, node, COLLAR)
    fl = surf.fields
    i, j = node
    tangents = gram_schmidt([fl.gs[i, j], fl.gt[i, j]])
    frame = complete_frame(tangents, surf.m, surf.m - 2)
    a = fl.alpha[i, j]
    return FundamentalData(
        metric=fl.metric[i, j].copy(),
        inverse_metric=fl.inverse[i, j].copy(),
        normal_frame=frame,
        second_form={"ss": a[0, 0].copy(), "st": a[0, 1].copy(), "tt": a[1, 1].copy()},
        mean_curvature=fl.H[i, j].copy(),
    )


def tangential_part(surf: ImmersionGrid, vector):
    """Tangential projection of a constant ambient vector at every node."""
    fl = surf.fields
    vec = np.broadcast_to(np.asarray(vector, dtype=float), surf.points.shape)
    return vec - normal_part(vec, fl.tangents, fl.inverse)


def e_perp(surf: ImmersionGrid):
    """Normal component of the density vector, computed by metric projection."""
    fl = surf.fields
    e = np.broadcast_to(surf.e, surf.points.shape)
    return normal_part(e, fl.tangents, fl.inverse)


def gradient_norm_sq(surf: ImmersionGrid, scalar):
    c, fl = surf.chart, surf.fields
    d = np.stack([central_diff(scalar, c.hs, 0), central_diff(scalar, c.ht, 1)], -1)
    return np.einsum("...i,...ij,...j->...", d, fl.inverse, d)


def laplace_beltrami_field(surf: ImmersionGrid, scalar):
    """``(1/sqrt det) d_i (sqrt det g^{ij} d_j u)`` by nested central differences."""
    c, fl = surf.chart, surf.fields
    u = np.asarray(scalar, dtype=float)
    du = np.stack([central_diff(u, c.hs, 0), central_diff(u, c.ht, 1)], -1)
    root = np.sqrt(fl.det)
    flux = root[..., None] * np.einsum("...ij,...j->...i", fl.inverse, du)
    div = central_diff(flux[..., 0], c.hs, 0) + central_diff(flux[..., 1], c.ht, 1)
    return div / root


def laplace_beltrami(surf: ImmersionGrid, scalar, node):
    _check_node(surf.chart.shape, node, COLLAR)
    return float(laplace_beltrami_field(surf, scalar)[tuple(node)])


def shape_operator(surf: ImmersionGrid, node, normal, tol=1e-8):
    """Matrix of ``A_xi`` in the coordinate tangent basis (``g^{-1} B``)."""
    _check_node(surf.chart.shape, node, 1)
    fl = surf.fields
    i, j = node
    xi = np.asarray(normal, dtype=float)
    for tvec in (fl.gs[i, j], fl.gt[i, j]):
        if abs(np.dot(tvec, xi)) > tol * np.linalg.norm(tvec) * max(np.linalg.norm(xi), 1.0):
            raise ValueError("vector is not normal to the surface at this node")
    B = np.einsum("abk,k->ab", fl.alpha[i, j], xi)
    return fl.inverse[i, j] @ B


@dataclass(eq=False)
class ImmersionGridND:
    """Sampled n-parameter submanifold; ``points`` has shape ``(*sizes, m)``."""

    origins: tuple
    spacings: tuple
    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.origins = tuple(float(o) for o in self.origins)
        self.spacings = tuple(float(h) for h in self.spacings)
        if len(self.spacings) != self.n or len(self.origins) != self.n:
            raise InvalidSurfaceError("one origin and spacing per parameter axis required")
        if any(h <= 0 for h in self.spacings):
            raise InvalidSurfaceError("spacings must be positive")

    @property
    def n(self):
        return self.points.ndim - 1

    @property
    def m(self):
        return self.points.shape[-1]

    @property
    def sizes(self):
        return self.points.shape[:-1]

    def axis(self, k):
        return self.origins[k] + self.spacings[k] * np.arange(self.sizes[k])

    @cached_property
    def fields(self):
        return _nd_fields(self)


def _nd_fields(sub: ImmersionGridND):
    n, P, hs = sub.n, sub.points, sub.spacings
    tang = np.stack([central_diff(P, hs[i], i) for i in range(n)], -2)
    second = np.empty(sub.sizes + (n, n, sub.m))
    for i in range(n):
        second[..., i, i, :] = second_diff(P, hs[i], i)
        for j in range(i + 1, n):
            second[..., i, j, :] = second[..., j, i, :] = mixed_diff(P, hs[i], hs[j], i, j)
    metric = np.einsum("...ik,...jk->...ij", tang, tang)
    inner = tuple(slice(1, -1) for _ in range(n))
    det = np.linalg.det(metric[inner])
    if np.any(det <= DET_TOL):
        raise DegenerateMetricError(f"n-dim metric determinant {det.min():.3e} <= {DET_TOL}")
    inverse = np.full_like(metric, np.nan)
    inverse[inner] = np.linalg.inv(metric[inner])
    alpha = normal_part(second, tang, inverse)
    trace = np.einsum("...ij,...ijk->...k", inverse, alpha)
    return {"tangents": tang, "second": second, "metric": metric, "inverse": inverse,
            "alpha": alpha, "trace": trace}


def mean_curvature_nd(sub: ImmersionGridND, node):
    """Return ``nH`` (the trace of the second fundamental form) at ``node``."""
    node = tuple(node)
    if any(not (1 <= k < size - 1) for k, size in zip(node, sub.sizes)):
        raise ValueError(f"node {node} is not interior")
    return sub.fields["trace"][node].copy()
