"""Residual reports, convergence-order estimates and threshold calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

# Threshold constants C in ``threshold = C * h**2 * kappa**3``.  Observed
# constants on the reference instances (catenary cylinders n = 3..6 with
# unit peak curvature, chart angles 0 and 0.5, h in [0.00625, 0.1], and
# their Weierstrass round trips) are listed on the right; each C keeps
# roughly a factor of 10 of headroom.  ``kappa`` is the curvature scale of
# the instance (1 for the reference family).
CALIBRATION = {
    "sm_residual": 2.0,                  # 0.15
    "weighted_mean_curvature": 0.5,      # 0.04
    "conformal_agreement": 1.0,          # rounding only
    "second_form_conformal": 1.0,        # rounding only
    "laplacian_identity": 10.0,          # 0.67 (product rule 1.0)
    "laplacian_inequality": 1.0,         # 0.002
    "first_variation": 0.1,              # 0.009, times the energy
    "variation_gap": 1.0,                # 0.12 on analytic patches, times the energy
    "structural_mean_curvature": 2.0,    # same field as sm_residual
    "nd_mean_curvature": 3.0,            # 0.25
    "quadric": 0.5,                      # 0.033, relative to lambda^2/2
    "residual_fi": 4.0,                  # 0.37
    "residual_fi2": 2.0,                 # 0.18
    "residual_eq0": 2.0,                 # 0.13
    "residual_cond0": 2.0,               # 0.0015 (p = 2)
    "closedness": 0.1,                   # 0.004
    "path_dependence": 0.05,             # 0.002
    "roundtrip": 2.0,                    # 0.13
}


def threshold_for(name, h, C=None, kappa=1.0):
    return (CALIBRATION[name] if C is None else C) * h**2 * kappa**3


@dataclass
class ResidualReport:
    """Norms of a residual field over the interior nodes of a chart."""

    name: str
    l_inf: float
    l2: float
    h: float
    threshold: float | None = None
    order_estimate: float | None = None
    values: np.ndarray | None = dc_field(default=None, repr=False)
    notes: dict = dc_field(default_factory=dict)

    @property
    def passed(self):
        if self.threshold is None:
            return bool(np.isfinite(self.l_inf))
        return bool(self.l_inf <= self.threshold)

    @classmethod
    def from_field(cls, name, values, mask, cell_area, h, threshold=None, keep_field=False):
        """Build a report from a per-node residual (scalar or vector valued)."""
        values = np.asarray(values)
        extra = tuple(range(mask.ndim, values.ndim))
        mag = np.abs(values) if not extra else np.linalg.norm(values, axis=extra)
        sel = mag[mask]
        if sel.size == 0:
            raise ValueError(f"{name}: no interior nodes to evaluate")
        if not np.all(np.isfinite(sel)):
            raise ValueError(f"{name}: residual is not finite on interior nodes")
        return cls(name, float(sel.max()), float(math.sqrt(np.sum(sel**2) * cell_area)), float(h),
                   threshold, values=values if keep_field else None)

    def with_order(self, finer: "ResidualReport"):
        """Attach the observed order from this report (spacing h) and one at h/2."""
        self.order_estimate = observed_order(self.l_inf, finer.l_inf, self.h / finer.h)
        return self

    def to_dict(self):
        out = {"name": self.name, "l_inf": self.l_inf, "l2": self.l2, "h": self.h,
               "pass": self.passed, "threshold": self.threshold}
        if self.order_estimate is not None:
            out["order_estimate"] = self.order_estimate
        out.update(self.notes)
        return out


def observed_order(coarse, fine, ratio=2.0):
    if fine <= 0 or coarse <= 0:
        return float("nan")
    return math.log(coarse / fine) / math.log(ratio)


def richardson_ratio(coarse, fine):
    return coarse / fine if fine > 0 else float("inf")
