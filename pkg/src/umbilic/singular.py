"""Singular minimal surfaces: defining residual, energy potential, first
variation, and the conformal (weighted metric) characterization.

A surface with density vector ``e``, height ``phi = <g, e>`` and exponent
``a`` is a-singular minimal when ``2H = (a / phi) e_perp``.  Equivalently it
is minimal for the ambient metric ``sigma**a <., .>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geomcore import (COLLAR, ImmersionGrid, InvalidSurfaceError, e_perp, gradient_norm_sq,
                       laplace_beltrami_field, normal_part)
from .reports import ResidualReport, threshold_for

DEFAULT_DT = 1e-4


def _report(name, values, surf: ImmersionGrid, threshold=None, keep_field=False, collar=COLLAR):
    c = surf.chart
    if threshold is None:
        threshold = threshold_for(name, c.h)
    return ResidualReport.from_field(name, values, surf.interior(collar), c.hs * c.ht, c.h,
                                     threshold, keep_field)


def sm_field(surf: ImmersionGrid):
    """Per-node ``2H - (a / phi) e_perp``."""
    return 2.0 * surf.fields.H - (surf.a / surf.phi)[..., None] * e_perp(surf)


def sm_residual(surf: ImmersionGrid, threshold=None, keep_field=False) -> ResidualReport:
    return _report("sm_residual", sm_field(surf), surf, threshold, keep_field)


def energy(surf: ImmersionGrid) -> float:
    """Midpoint-cell quadrature of ``phi**a dA`` over the whole chart.

    Tangents at a cell centre are averaged edge differences, so the rule is
    second order and needs no boundary collar.
    """
    P, c = surf.points, surf.chart
    ds = 0.5 * ((P[1:, :-1] - P[:-1, :-1]) + (P[1:, 1:] - P[:-1, 1:])) / c.hs
    dt = 0.5 * ((P[:-1, 1:] - P[:-1, :-1]) + (P[1:, 1:] - P[1:, :-1])) / c.ht
    mid = 0.25 * (P[:-1, :-1] + P[1:, :-1] + P[:-1, 1:] + P[1:, 1:])
    area = np.sqrt(np.maximum(np.sum(ds * ds, -1) * np.sum(dt * dt, -1) - np.sum(ds * dt, -1) ** 2, 0.0))
    phi = mid @ surf.e
    return float(np.sum(phi**surf.a * area) * c.hs * c.ht)


@dataclass(eq=False)
class VariationField:
    """Normal variation field vanishing on a boundary collar of ``collar`` nodes."""

    eta: np.ndarray
    collar: int = COLLAR

    def validate(self, surf: ImmersionGrid, tol=1e-8):
        eta = np.asarray(self.eta, dtype=float)
        if eta.shape != surf.points.shape:
            raise ValueError(f"variation shape {eta.shape} does not match surface {surf.points.shape}")
        if self.collar < COLLAR:
            raise ValueError(f"support collar must be at least {COLLAR} nodes")
        mask = surf.interior(self.collar)
        if np.any(eta[~mask] != 0):
            raise ValueError("variation must vanish on the boundary collar")
        fl = surf.fields
        scale = np.linalg.norm(eta, axis=-1)[mask].max()
        for tang in (fl.gs, fl.gt):
            dots = np.abs(np.sum(eta * tang, -1))[mask]
            if np.any(dots > tol * scale * np.linalg.norm(tang, axis=-1)[mask]):
                raise ValueError("variation field is not normal to the surface")
        return eta


def bump_variation(surf: ImmersionGrid, direction=None, collar=COLLAR, amplitude=1.0) -> VariationField:
    """``sin^4`` bump on the support times the normal part of ``direction`` (default e)."""
    c = surf.chart
    direction = surf.e if direction is None else np.asarray(direction, dtype=float)
    u = np.zeros(c.ns)
    v = np.zeros(c.nt)
    u[collar:c.ns - collar] = np.sin(np.pi * np.arange(c.ns - 2 * collar) / (c.ns - 2 * collar - 1)) ** 4
    v[collar:c.nt - collar] = np.sin(np.pi * np.arange(c.nt - 2 * collar) / (c.nt - 2 * collar - 1)) ** 4
    bump = amplitude * np.outer(u, v)
    fl = surf.fields
    normal = normal_part(np.broadcast_to(direction, surf.points.shape), fl.tangents, fl.inverse)
    eta = np.where(surf.interior(collar)[..., None], bump[..., None] * normal, 0.0)
    return VariationField(eta, collar)


def first_variation_check(surf: ImmersionGrid, var: VariationField, dt=DEFAULT_DT):
    """Return ``(numeric, analytic)`` first variations of the energy potential.

    The numeric value is a central difference of :func:`energy`; the analytic
    value integrates ``phi**(a-1) <a e_perp - 2 phi H, eta>`` over the nodes.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    eta = var.validate(surf)
    try:
        plus = surf.with_points(surf.points + dt * eta)
        minus = surf.with_points(surf.points - dt * eta)
    except InvalidSurfaceError as exc:
        raise ValueError(f"perturbed surface is invalid: {exc}") from exc
    numeric = (energy(plus) - energy(minus)) / (2 * dt)
    fl, phi, c = surf.fields, surf.phi, surf.chart
    integrand = phi ** (surf.a - 1) * np.sum((surf.a * e_perp(surf) - 2 * phi[..., None] * fl.H) * eta, -1)
    mask = surf.interior(var.collar)
    analytic = float(np.sum((integrand * np.sqrt(fl.det))[mask]) * c.hs * c.ht)
    return float(numeric), analytic


def weighted_mean_curvature(surf: ImmersionGrid):
    """Mean curvature for the metric ``sigma**a <.,.>`` from the conformal relation."""
    phi = surf.phi[..., None]
    return 0.5 * phi ** (-surf.a) * (2.0 * surf.fields.H - surf.a / phi * e_perp(surf))


def _conformal_second_form(surf: ImmersionGrid):
    """Second fundamental form and mean curvature for the weighted metric.

    Uses the Levi-Civita connection of ``G(x) = sigma(x)**a I`` built from
    the general Christoffel formula, projections orthogonal for ``G`` and the
    weighted induced metric, sharing nothing with the Euclidean route beyond
    the coordinate derivatives.
    """
    a, e, m = surf.a, surf.e, surf.m
    fl = surf.fields
    sigma = surf.points @ e
    w = sigma**a
    dw = (a * sigma ** (a - 1))[..., None] * e                     # d_l of the conformal weight
    eye = np.eye(m)
    # Gamma^k_ij = (1/2w)(dw_i d_jk + dw_j d_ik - dw_k d_ij)
    gamma = 0.5 / w[..., None, None, None] * (
        np.einsum("...i,jk->...kij", dw, eye) + np.einsum("...j,ik->...kij", dw, eye)
        - np.einsum("...k,ij->...kij", dw, eye))
    tang = fl.tangents                                                # (..., 2, m)
    second = np.stack([np.stack([fl.gss, fl.gst], -2), np.stack([fl.gst, fl.gtt], -2)], -3)
    cov = second + np.einsum("...kij,...ai,...bj->...abk", gamma, tang, tang)
    wmetric = w[..., None, None] * np.einsum("...ak,...bk->...ab", tang, tang)
    winv = np.linalg.inv(np.where(np.isfinite(wmetric), wmetric, np.eye(2)))
    winv = np.where(np.isfinite(wmetric), winv, np.nan)
    # G-orthogonal tangential projection: sum_ab winv^ab G(v, t_a) t_b
    Gv_t = w[..., None, None, None] * np.einsum("...abk,...ck->...abc", cov, tang)
    alpha2 = cov - np.einsum("...abc,...cd,...dk->...abk", Gv_t, winv, tang)
    H2 = 0.5 * np.einsum("...ab,...abk->...k", winv, alpha2)
    return alpha2, H2


def weighted_mean_curvature_direct(surf: ImmersionGrid):
    return _conformal_second_form(surf)[1]


def conformal_agreement(surf: ImmersionGrid, threshold=None) -> ResidualReport:
    diff = weighted_mean_curvature(surf) - weighted_mean_curvature_direct(surf)
    return _report("conformal_agreement", diff, surf, threshold)


def weighted_mean_curvature_report(surf: ImmersionGrid, threshold=None) -> ResidualReport:
    return _report("weighted_mean_curvature", weighted_mean_curvature(surf), surf, threshold)


def second_form_conformal_residual(surf: ImmersionGrid, threshold=None) -> ResidualReport:
    """Residual of ``alpha_2 = alpha_1 - (a / 2 phi) <X, Y> e_perp``."""
    alpha2, _ = _conformal_second_form(surf)
    fl = surf.fields
    coef = (surf.a / (2 * surf.phi))[..., None, None, None]
    predicted = fl.alpha - coef * fl.metric[..., None] * e_perp(surf)[..., None, None, :]
    return _report("second_form_conformal", (alpha2 - predicted).reshape(alpha2.shape[:2] + (-1,)), surf, threshold)


def laplacian_identity_residual(surf: ImmersionGrid, threshold=None) -> ResidualReport:
    """``|Delta phi - (a / phi) |e_perp|^2|`` at interior nodes."""
    phi = surf.phi
    lap = laplace_beltrami_field(surf, phi)
    ep = e_perp(surf)
    return _report("laplacian_identity", lap - surf.a / phi * np.sum(ep * ep, -1), surf, threshold)


def product_rule_residual(surf: ImmersionGrid, threshold=None) -> ResidualReport:
    """``1/2 Delta phi^2 - (phi Delta phi + |grad phi|^2)``, a pure calculus identity."""
    phi = surf.phi
    lhs = 0.5 * laplace_beltrami_field(surf, phi**2)
    rhs = phi * laplace_beltrami_field(surf, phi) + gradient_norm_sq(surf, phi)
    return _report("laplacian_identity", lhs - rhs, surf, threshold)


def laplacian_inequality(surf: ImmersionGrid, threshold=None) -> ResidualReport:
    """Violation of ``1/2 Delta phi^2 >= 1``; the report's l_inf is ``max(0, 1 - min)``."""
    half = 0.5 * laplace_beltrami_field(surf, surf.phi**2)
    violation = np.maximum(0.0, 1.0 - half)
    rep = _report("laplacian_inequality", violation, surf, threshold)
    rep.notes["min_half_laplacian_phi_sq"] = float(np.min(half[surf.interior()]))
    return rep


def first_variation_report(surf: ImmersionGrid, var: VariationField | None = None, dt=DEFAULT_DT,
                           threshold=None) -> ResidualReport:
    """Both first variations against a threshold scaled by the energy.

    The report's l_inf is the larger magnitude of the two values; the gap
    between them is kept in the notes.
    """
    var = bump_variation(surf) if var is None else var
    numeric, analytic = first_variation_check(surf, var, dt)
    if threshold is None:
        threshold = threshold_for("first_variation", surf.chart.h) * energy(surf)
    worst = max(abs(numeric), abs(analytic))
    rep = ResidualReport("first_variation", worst, worst, surf.chart.h, threshold)
    rep.notes.update({"numeric": numeric, "analytic": analytic, "gap": abs(numeric - analytic), "dt": dt})
    return rep
