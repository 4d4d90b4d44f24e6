"""Weierstrass-type representation of (n-2)-singular minimal surfaces.

The weighted half space ``(R^{p+2}_+, x_{p+2}^{n-2} <.,.>)`` is isometric,
through ``tau``, to the warped product ``R^{p+1} x R_+`` with metric
``e^eta sum dy_i^2 + d omega^2``.  On an isothermal chart ``z = s + i t``
of the image ``Y = tau(g)``:

    phi_i = e^{eta/2} y_{i,z}  (i <= p+1),   phi_{p+2} = omega_z,
    Psi = phi_1 - i phi_2,      G_j = phi_{j+2} / Psi  (j = 1..p).

Pairings on C^p: ``<z, w> = sum z_j w_j`` (bilinear) and
``|z|^2 = sum |z_j|^2`` (Hermitian).

A real potential ``u`` "with derivative f" means ``u_z = f``, so that
``du = f dz + conj(f) dzbar``; every integral below is of this kind.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geomcore import ImmersionGrid
from .numerics import GridChart2D, potential_field, wirtinger
from .reports import ResidualReport, threshold_for

PSI_TOL = 1e-10
F_TOL = 1e-10
GP_TOL = 1e-10
ISO_TOL = 1e-2
COLLAR = 2


class WeierstrassError(ValueError):
    pass


# ---------------------------------------------------------------- tau, eta, F

def tau(x, n):
    x = np.asarray(x, dtype=float)
    if np.any(x[..., -1] <= 0):
        raise ValueError("tau needs a positive last coordinate")
    y = x.copy()
    y[..., -1] = (2.0 / n) * x[..., -1] ** (n / 2.0)
    return y


def tau_inv(y, n):
    y = np.asarray(y, dtype=float)
    if np.any(y[..., -1] <= 0):
        raise ValueError("tau_inv needs a positive last coordinate")
    x = y.copy()
    x[..., -1] = (n / 2.0 * y[..., -1]) ** (2.0 / n)
    return x


def tau_jacobian(x, n):
    """Jacobian of :func:`tau` at a single point."""
    x = np.asarray(x, dtype=float)
    J = np.eye(x.shape[-1])
    J[-1, -1] = x[-1] ** (n / 2.0 - 1.0)
    return J


def eta(omega, n):
    return 2.0 * (n - 2) / n * np.log(n / 2.0 * np.asarray(omega))


def eta_prime(omega, n):
    return 2.0 * (n - 2) / (n * np.asarray(omega))


def warped_metric(y, n):
    """Matrix of ``e^eta sum dy_i^2 + d omega^2`` at ``y``."""
    y = np.asarray(y, dtype=float)
    d = np.ones(y.shape[-1])
    d[:-1] = np.exp(eta(y[-1], n))
    return np.diag(d)


def bilinear(u, v):
    return np.sum(np.asarray(u) * np.asarray(v), axis=-1)


def hermitian_sq(u):
    return np.sum(np.abs(np.asarray(u)) ** 2, axis=-1)


def F_map(z):
    """``F(z) = ((1 + |<z,z>|^2)/2 + |z|^2) e_p - z_p (conj<z,z> z + conj z)``; ``z`` is ``(..., p)``."""
    z = np.asarray(z, dtype=complex)
    zz = bilinear(z, z)
    out = -z[..., -1:] * (np.conj(zz)[..., None] * z + np.conj(z))
    out[..., -1] += 0.5 * (1 + np.abs(zz) ** 2) + hermitian_sq(z)
    return out


def phi_from_psi_g(Psi, G):
    """``1/2 Psi (1 - <G,G>, i (1 + <G,G>), 2 G)``."""
    Psi = np.asarray(Psi)
    GG = bilinear(G, G)
    first = 0.5 * Psi * (1 - GG)
    second = 0.5j * Psi * (1 + GG)
    return np.concatenate([first[..., None], second[..., None], Psi[..., None] * G], axis=-1)


def psi_g_from_phi(phi):
    """``Psi = phi_1 - i phi_2``, ``G_j = phi_{j+2} / Psi``; inverts :func:`phi_from_psi_g` on the null quadric."""
    phi = np.asarray(phi, dtype=complex)
    Psi = phi[..., 0] - 1j * phi[..., 1]
    return Psi, phi[..., 2:] / Psi[..., None]


# ---------------------------------------------------------------- data

@dataclass(eq=False)
class WeierstrassData:
    """Complex data on ``chart`` (the source chart trimmed by one node).

    ``frame`` is the orthogonal matrix applied to ``(y_1..y_{p+1})`` before
    extraction so that ``Psi`` vanishes nowhere.
    """

    chart: GridChart2D
    n: int
    p: int
    phi: np.ndarray
    Psi: np.ndarray
    G: np.ndarray
    omega: np.ndarray
    lambda_sq: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        if np.any(np.abs(self.Psi) <= PSI_TOL):
            raise WeierstrassError("Psi vanishes on the chart")
        if np.any(self.omega <= 0):
            raise WeierstrassError("omega must be positive")
        if np.any(np.abs(self.G[..., -1]) <= GP_TOL):
            raise WeierstrassError("G_p vanishes on the chart")

    @property
    def eta_prime(self):
        return eta_prime(self.omega, self.n)


def psi_frames(p):
    """Deterministic fallback list of orthogonal maps of ``R^{p+1}``.

    Identity, the reflection ``y_2 -> -y_2`` (rotations of the ``(y_1, y_2)``
    plane only change the phase of Psi), then rotations by pi/4, pi/2 and
    3pi/4 in the other coordinate planes, padded with rotations by pi/6 and
    pi/3 in the ``(y_1, y_2)`` plane composed with the reflection.
    """
    d = p + 1
    out = [np.eye(d)]
    refl = np.eye(d)
    refl[1, 1] = -1.0
    out.append(refl)
    for a, b in itertools.combinations(range(d), 2):
        if (a, b) == (0, 1):
            continue
        for ang in (np.pi / 4, np.pi / 2, 3 * np.pi / 4):
            R = np.eye(d)
            R[a, a] = R[b, b] = np.cos(ang)
            R[a, b], R[b, a] = -np.sin(ang), np.sin(ang)
            out.append(R)
    for ang in (np.pi / 6, np.pi / 3):
        R = np.eye(d)
        R[0, 0] = R[1, 1] = np.cos(ang)
        R[0, 1], R[1, 0] = -np.sin(ang), np.sin(ang)
        out.append(R @ refl)
    return out


def _trim(arr, k=1):
    return arr[k:-k, k:-k]


def extract(surf: ImmersionGrid, n, iso_tol=ISO_TOL) -> WeierstrassData:
    """Weierstrass data of the image under ``tau`` of a surface in ``R^{p+2}_+``.

    The density vector must be the last coordinate axis.
    """
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n}")
    m = surf.m
    p = m - 2
    e_last = np.zeros(m)
    e_last[-1] = 1.0
    if not np.allclose(surf.e, e_last, atol=1e-14):
        raise WeierstrassError("extraction needs the density vector along the last axis")
    chart = surf.chart
    height = surf.points[..., -1]
    omega_full = (2.0 / n) * height ** (n / 2.0)
    ez = np.exp(0.5 * eta(_trim(omega_full), n))
    yz, _ = wirtinger(surf.points[..., :-1], chart)
    wz, _ = wirtinger(omega_full, chart)
    yz, wz = _trim(yz), _trim(wz)
    omega = _trim(omega_full)
    sub = chart.sub(1)

    base = np.concatenate([ez[..., None] * yz, wz[..., None]], axis=-1)
    lam_half = hermitian_sq(base)
    iso = np.abs(bilinear(base, base)) / lam_half
    if iso.max() > iso_tol:
        raise WeierstrassError("chart is not isothermal for the warped metric "
                               f"(max |<d,d>|/(lambda^2/2) = {iso.max():.3g})")

    # every frame with nonvanishing Psi is admissible; keep the best conditioned one
    best = None
    for Q in psi_frames(p):
        phi = base.copy()
        phi[..., :-1] = base[..., :-1] @ Q.T
        Psi = phi[..., 0] - 1j * phi[..., 1]
        low = np.abs(Psi).min()
        if low > PSI_TOL and (best is None or low > best[0]):
            best = (low, Q, phi, Psi)
    if best is None:
        raise WeierstrassError("Psi vanishes somewhere for every frame in the fallback list")
    _, Q, phi, _ = best
    Psi, G = psi_g_from_phi(phi)
    return WeierstrassData(sub, int(n), p, phi, Psi, G, omega, 2.0 * lam_half, Q)


# ---------------------------------------------------------------- residuals

def _mask(shape, values, collar=COLLAR):
    mask = np.zeros(shape, dtype=bool)
    mask[collar:shape[0] - collar, collar:shape[1] - collar] = True
    finite = np.all(np.isfinite(values.reshape(shape + (-1,))), axis=-1)
    return mask & finite


def _report(name, values, chart, threshold=None, notes=None):
    mask = _mask(chart.shape, np.asarray(values))
    if threshold is None:
        threshold = threshold_for(name, chart.h)
    rep = ResidualReport.from_field(name, values, mask, chart.hs * chart.ht, chart.h, threshold)
    rep.notes.update(notes or {})
    return rep


def quadric_report(data: WeierstrassData, threshold=None) -> ResidualReport:
    """``|sum phi_i^2|`` and ``|sum |phi_i|^2 - lambda^2/2|``, both relative to ``lambda^2/2``.

    The second vanishes by construction.  Relative values keep the tolerance
    independent of the height scale, which grows like ``x_{p+2}^{n-2}``.
    """
    half = 0.5 * data.lambda_sq
    q1 = np.abs(bilinear(data.phi, data.phi)) / half
    q2 = np.abs(hermitian_sq(data.phi) - half) / half
    return _report("quadric", np.stack([q1, q2], -1), data.chart, threshold,
                   {"null_quadric": float(q1[_mask(data.chart.shape, q1)].max())})


def fi_fields(data: WeierstrassData):
    """Residual fields of ``2 phi_{i,zbar} + eta' conj(phi_i) phi_{p+2}`` and
    ``2 phi_{p+2,zbar} - eta' sum_{i<=p+1} |phi_i|^2``."""
    _, dzb = wirtinger(data.phi, data.chart)
    ep = data.eta_prime
    r1 = 2 * dzb[..., :-1] + ep[..., None] * np.conj(data.phi[..., :-1]) * data.phi[..., -1:]
    r2 = 2 * dzb[..., -1] - ep * hermitian_sq(data.phi[..., :-1])
    return r1, r2


def residual_fi(data: WeierstrassData, threshold=None) -> ResidualReport:
    r1, r2 = fi_fields(data)
    both = np.concatenate([r1, r2[..., None]], -1)
    m1 = _mask(data.chart.shape, r1)
    return _report("residual_fi", both, data.chart, threshold,
                   {"eq_i": float(np.max(np.linalg.norm(r1, axis=-1)[m1])),
                    "eq_ii": float(np.max(np.abs(r2)[m1]))})


def residual_fi2(data: WeierstrassData, threshold=None) -> ResidualReport:
    """Psi_zbar, G_zbar and omega_z relations."""
    chart, ep, Psi, G = data.chart, data.eta_prime, data.Psi, data.G
    _, Psi_zb = wirtinger(Psi, chart)
    _, G_zb = wirtinger(G, chart)
    w_z, _ = wirtinger(data.omega, chart)
    GG = bilinear(G, G)
    r_psi = Psi_zb - 0.5 * ep * np.abs(Psi) ** 2 * np.conj(GG) * G[..., -1]
    r_g = G_zb - 0.5 * (ep * np.conj(Psi))[..., None] * F_map(G)
    r_w = w_z - Psi * G[..., -1]
    all_r = np.concatenate([r_psi[..., None], r_g, r_w[..., None]], -1)
    mask = _mask(chart.shape, all_r)
    return _report("residual_fi2", all_r, chart, threshold,
                   {"psi_zbar": float(np.abs(r_psi)[mask].max()),
                    "g_zbar": float(np.linalg.norm(r_g, axis=-1)[mask].max()),
                    "omega_z": float(np.abs(r_w)[mask].max())})


def _check_F(G):
    F = F_map(G)
    normF = np.sqrt(hermitian_sq(F))
    finite = np.isfinite(normF)
    if np.any(normF[finite] <= F_TOL):
        raise WeierstrassError("F(G) vanishes on the chart")
    return F, normF**2


def _b0(G, chart):
    """``B0 = <G_zbar, conj F> / |F|^2`` with the derivatives it was built from."""
    F, nF2 = _check_F(G)
    _, G_zb = wirtinger(G, chart)
    return bilinear(G_zb, np.conj(F)) / nF2, F, nF2, G_zb


def residual_eq0(G, chart: GridChart2D, n, threshold=None, require_nonholomorphic=True) -> ResidualReport:
    """Residual of the second-order equation for G.

    ``G_{zbar z}`` is ``d_z`` applied to the ``d_zbar`` grid, and ``F(G)_z``
    differences the composed grid ``F(G)``.
    """
    G = np.asarray(G, dtype=complex)
    B0, F, nF2, G_zb = _b0(G, chart)
    gz = hermitian_sq(G_zb)
    if require_nonholomorphic and np.nanmax(gz) <= 1e-20:
        raise WeierstrassError("G is holomorphic; the representation needs G_zbar != 0")
    G_zbz, _ = wirtinger(G_zb, chart)
    F_z, _ = wirtinger(F, chart)
    ratio = gz / nF2
    Gp = G[..., -1]
    rhs = (-(n / (n - 2)) * (ratio * Gp)[..., None] * F
           + (ratio * bilinear(G, G) * np.conj(Gp))[..., None] * F
           + B0[..., None] * F_z)
    return _report("residual_eq0", G_zbz - rhs, chart, threshold)


def residual_cond0(G, chart: GridChart2D, threshold=None) -> ResidualReport:
    """All 2x2 minors of ``[G_zbar | F(G)]``; identically zero for p = 1."""
    G = np.asarray(G, dtype=complex)
    F, _ = _check_F(G)
    _, G_zb = wirtinger(G, chart)
    p = G.shape[-1]
    minors = [G_zb[..., a] * F[..., b] - G_zb[..., b] * F[..., a] for a, b in itertools.combinations(range(p), 2)]
    field = np.stack(minors, -1) if minors else np.zeros(G.shape[:-1] + (1,))
    if not minors:
        field = np.where(np.isfinite(G_zb[..., :1]), field, np.nan)
    return _report("residual_cond0", field, chart, threshold, {"minors": len(minors)})


def omega_form(G, chart: GridChart2D):
    """``B = 1/2 B0 conj(G_p)``; the 1-form is ``conj(B) dz + B dzbar``."""
    B0 = _b0(np.asarray(G, dtype=complex), chart)[0]
    return 0.5 * B0 * np.conj(np.asarray(G)[..., -1])


def closedness_residual(G, chart: GridChart2D, threshold=None) -> ResidualReport:
    B = omega_form(G, chart)
    B_z, _ = wirtinger(B, chart)
    return _report("closedness", np.imag(B_z), chart, threshold)


# ---------------------------------------------------------------- integration

def omega_to_height(omega, n):
    """Last coordinate ``((n/2) omega)^{2/n}`` of ``tau_inv``."""
    return (n / 2.0 * np.asarray(omega)) ** (2.0 / n)


def h_from_potential(re_int, n):
    """``h = (n/2)^{2/n} exp((2/(n-2)) R) / (n-2)`` for ``R`` with ``omega = exp((n/(n-2)) R)``."""
    return (n / 2.0) ** (2.0 / n) * np.exp(2.0 / (n - 2) * np.asarray(re_int)) / (n - 2)


@dataclass(eq=False)
class Representation:
    surface: ImmersionGrid
    omega: np.ndarray
    nu: np.ndarray
    h: np.ndarray
    Psi: np.ndarray
    path_dependence: ResidualReport


def integrate_representation(G, chart: GridChart2D, n, base, omega0=None, nu0=0.0, position0=None,
                             frame=None, threshold=None) -> Representation:
    """Rebuild the surface in ``R^{p+2}`` from ``G``.

    The output lives on ``chart.sub(1)``; ``base`` is a node of that chart.
    Gauge: ``omega`` at ``base`` equals ``omega0`` when given, else the
    potential ``nu`` takes the value ``nu0`` there; the first ``p+1``
    coordinates at ``base`` equal ``position0`` (default 0).
    """
    G = np.asarray(G, dtype=complex)
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n}")
    p = G.shape[-1]
    if np.any(np.abs(G[..., -1]) <= GP_TOL):
        raise WeierstrassError("G_p vanishes on the chart")
    B0 = _b0(G, chart)[0]
    sub = chart.sub(1)
    B0, Gs = _trim(B0), _trim(G)
    bi, bj = base
    if not (0 <= bi < sub.ns and 0 <= bj < sub.nt):
        raise ValueError(f"base node {base} outside the {sub.ns}x{sub.nt} integration chart")

    nu_z = 0.5 * np.conj(B0) * Gs[..., -1]
    nu_st = potential_field(nu_z, np.conj(nu_z), sub, base, "st").real
    nu_ts = potential_field(nu_z, np.conj(nu_z), sub, base, "ts").real
    if threshold is None:
        threshold = threshold_for("path_dependence", sub.h)
    dep = ResidualReport.from_field("path_dependence", nu_st - nu_ts, np.ones(sub.shape, bool),
                                    sub.hs * sub.ht, sub.h, threshold)
    if not dep.passed:
        raise WeierstrassError(f"path dependence {dep.l_inf:.3g} exceeds {threshold:.3g}; the 1-form is not closed")
    k = 2.0 * n / (n - 2)
    if omega0 is not None:
        nu0 = np.log(omega0) / k
    nu = 0.5 * (nu_st + nu_ts) + nu0
    omega = np.exp(k * nu)
    Psi = (n * omega / (n - 2)) * np.conj(B0)
    phi = phi_from_psi_g(Psi, Gs)
    yz = np.exp(-0.5 * eta(omega, n))[..., None] * phi[..., :-1]
    pos0 = np.zeros(p + 1) if position0 is None else np.asarray(position0, dtype=float)
    Q = np.eye(p + 1) if frame is None else np.asarray(frame, dtype=float)
    pos0 = Q @ pos0
    ys = np.stack([potential_field(yz[..., i], np.conj(yz[..., i]), sub, base).real + pos0[i]
                   for i in range(p + 1)], -1)
    ys = ys @ Q                                                   # back to the original frame
    height = omega_to_height(omega, n)
    points = np.concatenate([ys, height[..., None]], -1)
    e = np.zeros(p + 2)
    e[-1] = 1.0
    surf = ImmersionGrid(sub, points, e, float(n - 2))
    return Representation(surf, omega, nu, height / (n - 2), Psi, dep)


def roundtrip(surf: ImmersionGrid, n, base=None, threshold=None):
    """Extract, integrate with the gauge matched at ``base``, and compare coordinates."""
    data = extract(surf, n)
    sub = data.chart.sub(1)
    if base is None:
        base = (sub.ns // 2, sub.nt // 2)
    orig = surf.points[2:-2, 2:-2]
    bi, bj = base
    rep = integrate_representation(data.G, data.chart, n, base, omega0=data.omega[bi + 1, bj + 1],
                                   position0=orig[bi, bj, :-1], frame=data.frame)
    disp = np.linalg.norm(rep.surface.points - orig, axis=-1)
    if threshold is None:
        threshold = threshold_for("roundtrip", sub.h)
    report = ResidualReport.from_field("roundtrip", disp, np.ones(sub.shape, bool), sub.hs * sub.ht,
                                       sub.h, threshold)
    return data, rep, report
