"""Finite differences, Wirtinger derivatives, RK4, path integrals and small
linear-algebra helpers on uniform 2D charts.

Grid arrays are stored with the s-axis first and the t-axis second; any
trailing axes hold vector components.  Derivatives are second-order central
differences and the nodes where a stencil would leave the grid are filled
with NaN, so invalid layers propagate through nested derivatives and are
excluded from every norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.integrate import cumulative_trapezoid

MIN_NODES = 5
FRAME_TOL = 1e-10
ROOT_TOL = 1e-12


class GridError(ValueError):
    """Raised for charts or grids that cannot support the requested stencil."""


class DegenerateFrameError(ValueError):
    pass


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridChart2D:
    """Uniform chart ``z = s + i t`` with origin ``(s0, t0)``."""

    s0: float
    t0: float
    hs: float
    ht: float
    ns: int
    nt: int

    def __post_init__(self):
        if not (self.hs > 0 and self.ht > 0):
            raise GridError(f"spacings must be positive, got hs={self.hs}, ht={self.ht}")
        if self.ns < MIN_NODES or self.nt < MIN_NODES:
            raise GridError(f"chart needs at least {MIN_NODES} nodes per axis, got {self.ns}x{self.nt}")

    @classmethod
    def from_ranges(cls, s_range, t_range, ns, nt):
        (sa, sb), (ta, tb) = s_range, t_range
        return cls(float(sa), float(ta), (sb - sa) / (ns - 1), (tb - ta) / (nt - 1), int(ns), int(nt))

    @property
    def shape(self):
        return (self.ns, self.nt)

    @property
    def h(self):
        return max(self.hs, self.ht)

    @property
    def s(self):
        return self.s0 + self.hs * np.arange(self.ns)

    @property
    def t(self):
        return self.t0 + self.ht * np.arange(self.nt)

    def mesh(self):
        return np.meshgrid(self.s, self.t, indexing="ij")

    def z(self):
        S, T = self.mesh()
        return S + 1j * T

    def sub(self, collar):
        """Chart of the nodes at least ``collar`` layers away from the boundary."""
        return GridChart2D(self.s0 + collar * self.hs, self.t0 + collar * self.ht, self.hs, self.ht,
                           self.ns - 2 * collar, self.nt - 2 * collar)

    def refined(self):
        """Same domain with both spacings halved."""
        return GridChart2D(self.s0, self.t0, self.hs / 2, self.ht / 2, 2 * self.ns - 1, 2 * self.nt - 1)

    def to_dict(self):
        return {"s0": self.s0, "t0": self.t0, "hs": self.hs, "ht": self.ht, "ns": self.ns, "nt": self.nt}


def interior_mask(shape, collar=2):
    """Boolean mask over the leading two axes, true on nodes ``collar`` away from the edge."""
    mask = np.zeros(shape[:2], dtype=bool)
    mask[collar:shape[0] - collar, collar:shape[1] - collar] = True
    return mask


def _invalid(values):
    return np.nan + 1j * np.nan if np.iscomplexobj(values) else np.nan


def _check_axis(values, axis, width=MIN_NODES):
    if values.shape[axis] < width:
        raise GridError(f"axis {axis} has {values.shape[axis]} nodes; central stencils need {width}")


def central_diff(values, h, axis):
    """Second-order central first derivative along ``axis``; boundary layer set to NaN."""
    values = np.asarray(values)
    _check_axis(values, axis)
    out = np.full(values.shape, _invalid(values), dtype=np.result_type(values, float))
    inner = [slice(None)] * values.ndim
    plus, minus = list(inner), list(inner)
    inner[axis], plus[axis], minus[axis] = slice(1, -1), slice(2, None), slice(None, -2)
    out[tuple(inner)] = (values[tuple(plus)] - values[tuple(minus)]) / (2.0 * h)
    return out


def second_diff(values, h, axis):
    """Compact three-point second derivative along ``axis``."""
    values = np.asarray(values)
    _check_axis(values, axis)
    out = np.full(values.shape, _invalid(values), dtype=np.result_type(values, float))
    inner = [slice(None)] * values.ndim
    plus, minus = list(inner), list(inner)
    inner[axis], plus[axis], minus[axis] = slice(1, -1), slice(2, None), slice(None, -2)
    out[tuple(inner)] = (values[tuple(plus)] - 2.0 * values[tuple(inner)] + values[tuple(minus)]) / h**2
    return out


def mixed_diff(values, h0, h1, axis0, axis1):
    """Four-point cross stencil for the mixed second derivative."""
    values = np.asarray(values)
    _check_axis(values, axis0)
    _check_axis(values, axis1)
    out = np.full(values.shape, _invalid(values), dtype=np.result_type(values, float))

    def sl(d0, d1):
        idx = [slice(None)] * values.ndim
        idx[axis0] = slice(1 + d0, values.shape[axis0] - 1 + d0)
        idx[axis1] = slice(1 + d1, values.shape[axis1] - 1 + d1)
        return tuple(idx)

    out[sl(0, 0)] = (values[sl(1, 1)] - values[sl(1, -1)] - values[sl(-1, 1)] + values[sl(-1, -1)]) / (4.0 * h0 * h1)
    return out


def wirtinger(values, chart: GridChart2D):
    """Return ``(d_z, d_zbar)`` with d = (d_s -/+ i d_t) / 2."""
    values = np.asarray(values)
    if values.shape[:2] != chart.shape:
        raise GridError(f"grid shape {values.shape[:2]} does not match chart {chart.shape}")
    ds = central_diff(values, chart.hs, 0)
    dt = central_diff(values, chart.ht, 1)
    return 0.5 * (ds - 1j * dt), 0.5 * (ds + 1j * dt)


def rk4(f: Callable, y0, s_span, step, stop: Callable | None = None):
    """Classical fixed-step Runge-Kutta integration of ``y' = f(s, y)``.

    ``s_span = (s_start, s_end)`` may run backwards; the step is always
    positive.  Integration ends early (exclusive of the failing sample) when
    ``stop(s, y)`` returns true.  Returns ``(s, Y)`` with one row per sample.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    s_start, s_end = s_span
    nsteps = int(round(abs(s_end - s_start) / step))
    h = step if s_end >= s_start else -step
    y = np.array(y0, dtype=float)
    ss = [s_start]
    ys = [y.copy()]
    s = s_start
    for i in range(nsteps):
        k1 = f(s, y)
        k2 = f(s + h / 2, y + h / 2 * k1)
        k3 = f(s + h / 2, y + h / 2 * k2)
        k4 = f(s + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s = s_start + (i + 1) * h
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state {y} at s={s:.6g} after {i + 1} steps")
        if stop is not None and stop(s, y):
            break
        ss.append(s)
        ys.append(y.copy())
    return np.array(ss), np.array(ys)


def path_integral(form_z, form_zbar, chart: GridChart2D, start, end, order="st"):
    """Trapezoid integral of ``form_z dz + form_zbar dzbar`` along a staircase path.

    ``order="st"`` walks along s first, then t; ``"ts"`` the reverse.
    """
    (i0, j0), (i1, j1) = start, end
    for i, j in (start, end):
        if not (0 <= i < chart.ns and 0 <= j < chart.nt):
            raise GridError(f"node ({i}, {j}) outside {chart.ns}x{chart.nt} grid")
    along_s = np.asarray(form_z) + np.asarray(form_zbar)
    along_t = 1j * (np.asarray(form_z) - np.asarray(form_zbar))

    def leg(vals, h):
        # vals ordered by increasing index; sign restores direction
        return h * (vals.sum() - 0.5 * (vals[0] + vals[-1])) if len(vals) > 1 else 0.0

    def leg_s(i_from, i_to, j):
        lo, hi = sorted((i_from, i_to))
        return np.sign(i_to - i_from) * leg(along_s[lo:hi + 1, j], chart.hs)

    def leg_t(j_from, j_to, i):
        lo, hi = sorted((j_from, j_to))
        return np.sign(j_to - j_from) * leg(along_t[i, lo:hi + 1], chart.ht)

    if order == "st":
        return complex(leg_s(i0, i1, j0) + leg_t(j0, j1, i1))
    if order == "ts":
        return complex(leg_t(j0, j1, i0) + leg_s(i0, i1, j1))
    raise ValueError(f"unknown path order {order!r}")


def potential_field(form_z, form_zbar, chart: GridChart2D, base, order="st"):
    """Integrate the 1-form from ``base`` to every node along staircase paths.

    Equivalent to calling :func:`path_integral` for every end node, but done
    with cumulative sums.
    """
    i0, j0 = base
    along_s = np.asarray(form_z) + np.asarray(form_zbar)
    along_t = 1j * (np.asarray(form_z) - np.asarray(form_zbar))
    cs = cumulative_trapezoid(along_s, dx=chart.hs, axis=0, initial=0)
    ct = cumulative_trapezoid(along_t, dx=chart.ht, axis=1, initial=0)
    if order == "st":
        first = cs[:, j0] - cs[i0, j0]
        return first[:, None] + (ct - ct[:, j0:j0 + 1])
    if order == "ts":
        first = ct[i0, :] - ct[i0, j0]
        return first[None, :] + (cs - cs[i0:i0 + 1, :])
    raise ValueError(f"unknown path order {order!r}")


def gram_schmidt(vectors: Sequence, against: Sequence = (), tol=FRAME_TOL):
    """Orthonormalize ``vectors`` after removing their components along ``against``."""
    basis = [np.asarray(a, dtype=float) for a in against]
    out = []
    for v in vectors:
        w = np.asarray(v, dtype=float).copy()
        scale = np.linalg.norm(w)
        for _ in range(2):
            for b in basis + out:
                w -= np.dot(w, b) * b
        norm = np.linalg.norm(w)
        if scale == 0 or norm <= tol * max(scale, 1.0):
            raise DegenerateFrameError(f"vector {v} is dependent on the frame (residual norm {norm:.3e})")
        out.append(w / norm)
    return out


def complete_frame(against: Sequence, dim: int, count: int, tol=1e-6):
    """First ``count`` standard basis vectors (index order) that survive Gram-Schmidt
    against ``against``; near-tangent candidates are skipped."""
    basis = [np.asarray(a, dtype=float) for a in against]
    out = []
    for k in range(dim):
        if len(out) == count:
            break
        try:
            out.extend(gram_schmidt([np.eye(dim)[k]], basis + out, tol=tol))
        except DegenerateFrameError:
            continue
    if len(out) < count:
        raise DegenerateFrameError(f"could only build {len(out)} of {count} frame vectors")
    return out


def bisect(f: Callable, lo, hi, tol=ROOT_TOL):
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f={flo:.3g}, {fhi:.3g}")
    return float(optimize.bisect(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=400))
