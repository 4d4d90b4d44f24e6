"""Command line entry point ``umbilic``.

Exit codes: 0 every requested check passed, 1 a check exceeded its
threshold, 2 invalid parameters, 3 malformed input file, 4 numerical
failure, 5 file I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import formats
from .catenary import CatenaryParams, build_cylinder, k_max, reconstruct_curve, solve_curvature
from .geomcore import DegenerateMetricError
from .numerics import DegenerateFrameError, GridError, IntegrationError
from .reports import ResidualReport, threshold_for
from .rotational import (RotationalSpec, build_rotational, numeric_vs_structural, structural_report,
                         umbilic_genericity_check)
from .singular import (VariationField, bump_variation, energy, first_variation_check, laplacian_identity_residual,
                       laplacian_inequality, sm_residual)
from .weierstrass import (WeierstrassError, closedness_residual, extract, integrate_representation,
                          quadric_report, residual_cond0, residual_eq0, residual_fi, residual_fi2, roundtrip)

EXIT_OK, EXIT_THRESHOLD, EXIT_PARAM, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = range(6)


class ParamError(ValueError):
    pass


def _range(text):
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    return a, b


def _thr(args, name, h, kappa=1.0):
    return threshold_for(name, h, args.C, kappa)


def _bundle(name, reports, extra=None):
    """Top-level report: the first check's fields, every check, and the overall verdict."""
    out = reports[0].to_dict() if reports else {"name": name}
    out["name"] = name
    out["pass"] = all(r.passed for r in reports)
    out["checks"] = [r.to_dict() for r in reports]
    out.update(extra or {})
    return out


def _finish(args, bundle):
    if args.report:
        formats.write_json(args.report, bundle)
    else:
        sys.stdout.write(formats.dumps(bundle))
    return EXIT_OK if bundle["pass"] else EXIT_THRESHOLD


# ---------------------------------------------------------------- commands

def cmd_catenary(args):
    try:
        params = CatenaryParams(args.n, args.lam, tuple(args.s_range), args.step)
    except ValueError as exc:
        raise ParamError(str(exc)) from exc
    curve = reconstruct_curve(solve_curvature(params), params)
    if args.out_curve:
        formats.write_curve_csv(args.out_curve, curve)
    s_lo, s_hi = curve.s[0], curve.s[-1]
    h = args.h
    span = (s_hi - s_lo) - 1e-9
    cells = int(span // h)
    sr = (s_lo + 0.5 * (span - cells * h), s_lo + 0.5 * (span - cells * h) + cells * h)
    surf = build_cylinder(curve, sr, (0.0, args.width), h)
    if args.out_obj:
        formats.write_obj(args.out_obj, surf.points)
    kappa = k_max(args.n, args.lam)
    rep = sm_residual(surf, _thr(args, "sm_residual", h, kappa))
    inv = curve.invariants()
    return _finish(args, _bundle("catenary", [rep], {"curve": inv, "kappa": kappa, "samples": int(curve.s.size)}))


def cmd_verify(args):
    surf = formats.read_surface(args.input)
    h = surf.chart.h
    reports = [sm_residual(surf, _thr(args, "sm_residual", h, args.kappa))]
    if args.laplacian:
        reports.append(laplacian_identity_residual(surf, _thr(args, "laplacian_identity", h, args.kappa)))
    if args.inequality:
        reports.append(laplacian_inequality(surf, _thr(args, "laplacian_inequality", h, args.kappa)))
    return _finish(args, _bundle("verify", reports))


def _weierstrass_reports(args, G, chart, n, data=None):
    h = chart.h
    reports = []
    if data is not None:
        reports += [quadric_report(data, _thr(args, "quadric", h)),
                    residual_fi(data, _thr(args, "residual_fi", h)),
                    residual_fi2(data, _thr(args, "residual_fi2", h))]
    reports.append(residual_eq0(G, chart, n, _thr(args, "residual_eq0", h)))
    extra = {}
    if G.shape[-1] == 1:
        extra["cond0"] = "skipped: p = 1 has no 2x2 minors"
    else:
        reports.append(residual_cond0(G, chart, _thr(args, "residual_cond0", h)))
    reports.append(closedness_residual(G, chart, _thr(args, "closedness", h)))
    return reports, extra


def cmd_weierstrass(args):
    if args.action in ("extract", "roundtrip"):
        surf = formats.read_surface(args.input)
        n = args.n if args.n is not None else int(round(surf.a)) + 2
        if abs(surf.a - (n - 2)) > 1e-12:
            raise ParamError(f"surface exponent a = {surf.a} does not match n - 2 = {n - 2}")
        if args.action == "extract":
            data = extract(surf, n)
            if args.out:
                formats.write_json(args.out, formats.weierstrass_to_dict(data))
            reports, extra = _weierstrass_reports(args, data.G, data.chart, n, data)
            return _finish(args, _bundle("weierstrass_extract", reports, extra))
        data, rep, rt = roundtrip(surf, n, threshold=_thr(args, "roundtrip", surf.chart.h))
        if args.out:
            formats.write_surface(args.out, rep.surface)
        return _finish(args, _bundle("weierstrass_roundtrip", [rt, rep.path_dependence], {"frame": data.frame}))

    chart, n, G, extras = formats.weierstrass_from_dict(formats.read_json(args.input))
    if args.n is not None and args.n != n:
        raise ParamError(f"--n {args.n} disagrees with n = {n} in the data file")
    sub = chart.sub(1)
    base = (sub.ns // 2, sub.nt // 2)
    omega0 = None
    if "omega" in extras and not args.zero_gauge:
        omega0 = extras["omega"][base[0] + 1, base[1] + 1]
    rep = integrate_representation(G, chart, n, base, omega0=omega0, nu0=0.0, frame=extras.get("frame"),
                                   threshold=_thr(args, "path_dependence", sub.h))
    if args.out:
        formats.write_surface(args.out, rep.surface)
    reports, extra = _weierstrass_reports(args, G, chart, n)
    reports = [sm_residual(rep.surface, _thr(args, "sm_residual", sub.h))] + reports + [rep.path_dependence]
    return _finish(args, _bundle("weierstrass_integrate", reports, extra))


def _sphere_windows(n, h, nodes):
    """Angle windows for S^{n-2}: polar angles centred on pi/2, the last angle from 0."""
    half = 0.5 * (nodes - 1) * h
    if np.pi / 2 - half < 0.2:
        raise ParamError("sphere window reaches the pole margin; reduce --angle-h or --angle-nodes")
    wins = [(np.pi / 2 - half, np.pi / 2 + half) for _ in range(n - 3)]
    wins.append((0.0, (nodes - 1) * h))
    return tuple(wins)


def _slice_obj(spec, f, count):
    """3-dim slices (fixed t index) of an n = 3 rotational manifold, in 3D coordinates.

    The axis part of each slice is projected onto its principal direction;
    the discarded component is returned as ``projection_residual``.
    """
    P = f.points
    p = spec.p
    idx = np.unique(np.linspace(0, P.shape[1] - 1, count).round().astype(int))
    grids, worst = [], 0.0
    for j in idx:
        sl = P[:, j]                                   # (ns, na, n+p)
        hpart = sl[..., :p + 1].reshape(-1, p + 1)
        centre = hpart.mean(0)
        _, sv, vt = np.linalg.svd(hpart - centre, full_matrices=False)
        coord = (hpart - centre) @ vt[0]
        worst = max(worst, float(sv[1:].max()) / np.sqrt(len(hpart)) if sv.size > 1 else 0.0)
        grids.append(np.concatenate([coord.reshape(sl.shape[:2] + (1,)), sl[..., p + 1:]], -1))
    return grids, worst


def cmd_rotate(args):
    prof = formats.read_surface(args.profile)
    if args.n < 3:
        raise ParamError("n must be an integer >= 3")
    ah = args.angle_h if args.angle_h else prof.chart.h
    if args.n == 3:
        nodes = int(np.ceil(2 * np.pi / ah)) + 1
        ah = 2 * np.pi / (nodes - 1)
        wins = ((0.0, 2 * np.pi),)
    else:
        wins = _sphere_windows(args.n, ah, args.angle_nodes)
    try:
        spec = RotationalSpec(prof, args.n, wins, ah)
    except ValueError as exc:
        raise ParamError(str(exc)) from exc
    h = prof.chart.h
    reports = [structural_report(spec, _thr(args, "structural_mean_curvature", h, args.kappa))]
    extra = {"structural_norm_max": reports[0].l_inf}
    if args.n == 3 and args.out_obj:
        f = build_rotational(spec)
        grids, resid = _slice_obj(spec, f, args.slices)
        formats.write_obj(args.out_obj, grids)
        extra["slices"] = len(grids)
        extra["projection_residual"] = resid
    if args.n == 4 and prof.m == 3:
        f = build_rotational(spec)
        cmp = numeric_vs_structural(spec, f, _thr(args, "nd_mean_curvature", max(f.spacings), args.kappa))
        reports.append(cmp)
        node = tuple(s // 2 for s in f.sizes)
        tol = _thr(args, "nd_mean_curvature", max(f.spacings), args.kappa)
        umb = umbilic_genericity_check(f, node, [2, 3], tol=tol)
        extra["umbilic"] = umb
        extra["generic"] = umb["generic"]
    return _finish(args, _bundle("rotate", reports, extra))


def cmd_energy(args):
    if not args.dt > 0:
        raise ParamError("dt must be positive")
    surf = formats.read_surface(args.input)
    if args.variation == "bump":
        var = bump_variation(surf)
    else:
        d = formats.read_json(args.variation)
        try:
            eta = np.array(d["eta"], dtype=float).reshape(surf.points.shape)
            var = VariationField(eta, int(d.get("collar", 2)))
        except (KeyError, TypeError, ValueError) as exc:
            raise formats.SchemaError(f"bad variation file: {exc}") from exc
    E = energy(surf)
    numeric, analytic = first_variation_check(surf, var, args.dt)
    h = surf.chart.h
    gap = ResidualReport("variation_gap", abs(numeric - analytic), abs(numeric - analytic), h,
                         _thr(args, "variation_gap", h, args.kappa) * E)
    reports = [gap]
    if args.critical:
        worst = max(abs(numeric), abs(analytic))
        reports.append(ResidualReport("first_variation", worst, worst, h,
                                      _thr(args, "first_variation", h, args.kappa) * E))
    return _finish(args, _bundle("energy", reports, {"energy": E, "numeric": numeric, "analytic": analytic,
                                                     "gap": abs(numeric - analytic), "dt": args.dt}))


# ---------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(prog="umbilic", description="Numerical checks for singular minimal surfaces, "
                                 "their rotational lifts and Weierstrass data.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", help="write the JSON report here (default: stdout)")
        p.add_argument("--C", type=float, default=None, help="override the threshold constant C in C*h^2")
        return p

    p = common(sub.add_parser("catenary", help="solve the profile ODE and verify the cylinder"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--s-range", type=_range, default=(-2.0, 2.0))
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--h", type=float, default=0.05, help="cylinder grid spacing")
    p.add_argument("--width", type=float, default=1.0, help="extent of the ruling direction")
    p.add_argument("--out-curve")
    p.add_argument("--out-obj")
    p.set_defaults(func=cmd_catenary)

    p = common(sub.add_parser("verify", help="singular-minimal residuals of a surface file"))
    p.add_argument("--input", required=True)
    p.add_argument("--laplacian", action="store_true")
    p.add_argument("--inequality", action="store_true")
    p.add_argument("--kappa", type=float, default=1.0, help="curvature scale for thresholds")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("weierstrass", help="Weierstrass data extraction and integration"))
    p.add_argument("action", choices=("extract", "roundtrip", "integrate"))
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.add_argument("--zero-gauge", action="store_true", help="integrate with nu = 0 at the base node")
    p.set_defaults(func=cmd_weierstrass)

    p = common(sub.add_parser("rotate", help="rotational submanifold over a profile"))
    p.add_argument("--profile", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--slices", type=int, default=5)
    p.add_argument("--angle-h", type=float, default=None)
    p.add_argument("--angle-nodes", type=int, default=9)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--out-obj")
    p.set_defaults(func=cmd_rotate)

    p = common(sub.add_parser("energy", help="energy and first variation"))
    p.add_argument("--input", required=True)
    p.add_argument("--variation", default="bump", help="'bump' or a JSON file with 'eta' rows")
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--critical", action="store_true", help="also require both variations below threshold")
    p.add_argument("--kappa", type=float, default=1.0)
    p.set_defaults(func=cmd_energy)
    return ap


def _join_ranges(argv):
    # "--s-range -2:2" would otherwise read "-2:2" as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--s-range":
            out.append(f"--s-range={next(it, '')}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_ranges(argv))
    try:
        return args.func(args)
    except ParamError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except formats.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (WeierstrassError, DegenerateMetricError, DegenerateFrameError, IntegrationError, GridError,
            ValueError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
