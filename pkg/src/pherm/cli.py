"""Command-line interface: analyze, sweep, brieskorn, lambda1.

Reports are JSON documents with keys family, params, provenance, samples,
summary; --csv flattens sample records for plotting. Exit codes: 0 ok,
1 assertion failure (--assert), 2 argument error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .catalog import FAMILIES, AmbientMetric, builtin_family, parse_metric, start_map_for
from .curvature import analyze, lambda1_report
from .expr import ParseError, defining_function
from .webster3 import tw_direct

_CIRCLE_ANGLES = (0.0, np.pi / 3, 1.1, np.pi / 2, 2.2, np.pi, 4.0, 5.5)


def _add_shared(p: argparse.ArgumentParser):
    p.add_argument("--family", choices=sorted(FAMILIES), help="built-in surface family")
    p.add_argument("--rho", help="defining-function expression (alternative to --family)")
    p.add_argument("--metric", help='ambient metric: "identity", "diag:a,b", or JSON matrix')
    p.add_argument("--points", type=int, default=100, help="number of surface samples")
    p.add_argument("--dirs", type=int, default=10, help="directions per sample")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--tol", type=float, default=1e-7, help="direct-solver residual tolerance")
    p.add_argument("--out", help="write the JSON report here (default stdout)")
    p.add_argument("--csv", help="also write flattened sample records as CSV")
    p.add_argument("--assert", dest="do_assert", action="store_true",
                   help="exit 1 when a verified bound fails")
    p.add_argument("--direct", action="store_true",
                   help="also run the direct 3-dim solver per sample (n = 1)")
    # family parameters
    p.add_argument("--n", type=int, help="CR dimension for generalizable families")
    p.add_argument("--t", type=float, help="hartogs parameter")
    p.add_argument("--eps", type=float, help="reinhardt parameter")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--axes", help="ellipsoid axis coefficients a,b,c,d")


def _collect_params(args) -> dict:
    params = {}
    for key in ("n", "t", "eps", "alpha", "beta", "gamma", "sigma"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    if getattr(args, "axes", None):
        params["axes"] = tuple(float(x) for x in args.axes.split(","))
    return params


def _resolve(args):
    """(fn, metric, family name, params, start_map) from CLI arguments."""
    if args.rho and args.family:
        raise ValueError("give either --family or --rho, not both")
    if args.rho:
        fn = defining_function(args.rho)
        metric = parse_metric(args.metric or "identity", fn.dimension)
        return fn, metric, "custom", {"rho": args.rho}, None
    if not args.family:
        raise ValueError("need --family or --rho")
    params = _collect_params(args)
    fn, metric = builtin_family(args.family, params or None)
    if args.metric:
        metric = parse_metric(args.metric, fn.dimension)
    shown = dict(params)
    if "axes" in shown:
        shown["axes"] = list(shown["axes"])
    return fn, metric, args.family, shown, start_map_for(args.family)


def _emit(report: dict, args) -> None:
    text = json.dumps(report, sort_keys=True, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        _write_csv(report["samples"], args.csv)


def _flatten(row: dict) -> dict:
    flat = {}
    for key, val in row.items():
        if key == "directions":
            ks = [d["K"] for d in val if "K" in d]
            flat["K_min"] = min(ks) if ks else ""
            flat["K_max"] = max(ks) if ks else ""
            flat["abs_torsion_max"] = max(d["abs_torsion"] for d in val)
        elif isinstance(val, list) and val and isinstance(val[0], list) and len(val[0]) == 2:
            for i, (re, im) in enumerate(val):
                flat[f"{key}_{i}_re"] = re
                flat[f"{key}_{i}_im"] = im
        elif isinstance(val, (int, float, str, bool)) or val is None:
            flat[key] = val
    return flat


def _write_csv(samples: list, path: str) -> None:
    rows = [_flatten(s) for s in samples]
    fields = sorted({k for r in rows for k in r})
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)


def _attach_direct(report: dict, fn, tol: float) -> None:
    """Per-sample direct-solver results appended to an analyze report."""
    if fn.dimension != 2:
        raise ValueError("--direct needs a 3-dimensional surface (2 complex variables)")
    rs, ratios, worst = [], [], 0.0
    for s in report["samples"]:
        p = np.array([complex(a, b) for a, b in s["point"]])
        st = tw_direct(fn, p, tol=tol)
        s["R_direct"] = st.scalar_curvature
        s["A_ratio_direct"] = st.A_ratio
        s["structural_residual"] = st.residual
        rs.append(st.scalar_curvature)
        ratios.append(st.A_ratio)
        worst = max(worst, st.residual)
    report["summary"]["R_direct_min"] = min(rs)
    report["summary"]["R_direct_max"] = max(rs)
    report["summary"]["R_direct_mean"] = float(np.mean(rs))
    report["summary"]["A_ratio_min"] = min(ratios)
    report["summary"]["A_ratio_max"] = max(ratios)
    report["summary"]["max_structural_residual"] = worst


def _analyze_failures(summary: dict, tol: float) -> list:
    bad = []
    if summary["convex"] and not summary["torsion_bound_holds"]:
        bad.append("convex sample set violates the torsion bound")
    if summary.get("bound_verified") is False:
        bad.append("curvature lower bound failed on a sample")
    if summary.get("max_structural_residual", 0.0) > 1e-7:
        bad.append("structural residual above 1e-7")
    return bad


def cmd_analyze(args) -> int:
    fn, metric, family, params, smap = _resolve(args)
    report = analyze(
        fn, metric, args.points, args.dirs, args.seed,
        family=family, params=params, start_map=smap,
    )
    report["provenance"]["tol"] = args.tol
    if args.direct:
        _attach_direct(report, fn, args.tol)
    _emit(report, args)
    if args.do_assert:
        bad = _analyze_failures(report["summary"], args.tol)
        if bad:
            print("; ".join(bad), file=sys.stderr)
            return 1
    return 0


def cmd_sweep(args) -> int:
    if not args.family:
        raise ValueError("sweep needs --family")
    values = np.linspace(args.start, args.stop, args.steps)
    base_params = _collect_params(args)
    records = []
    failures = []
    for v in values:
        params = dict(base_params)
        if args.param in ("a", "b", "c", "d"):
            axes = list(params.get("axes", (1.0, 2.0, 3.0, 4.0)))
            axes["abcd".index(args.param)] = float(v)
            params["axes"] = tuple(axes)
        else:
            params[args.param] = float(v)
        fn, metric = builtin_family(args.family, params)
        rep = analyze(
            fn, metric, args.points, args.dirs, args.seed,
            family=args.family, params={k: (list(p) if isinstance(p, tuple) else p) for k, p in params.items()},
            start_map=start_map_for(args.family),
        )
        rec = {"value": float(v), "summary": rep["summary"]}
        if args.at_circle:
            rs = []
            for tau in _CIRCLE_ANGLES:
                p = np.array([0.0, np.exp(1j * tau)], dtype=complex)
                if abs(fn(p)) > 1e-9:
                    raise ArithmeticError(f"(0, e^(i {tau:.3f})) is not on the surface")
                rs.append(tw_direct(fn, p, tol=args.tol).scalar_curvature)
            rec["R_circle_min"] = min(rs)
            rec["R_circle_max"] = max(rs)
            rec["R_circle_mean"] = float(np.mean(rs))
        records.append(rec)
        failures.extend(_analyze_failures(rep["summary"], args.tol))
    report = {
        "family": args.family,
        "params": {"swept": args.param, "values": [float(v) for v in values]},
        "provenance": {
            "seed": args.seed, "n_points": args.points, "n_dirs": args.dirs,
            "tol": args.tol, "version": __version__,
        },
        "samples": records,
        "summary": {
            "swept": args.param,
            "bp_min": min(r["summary"]["bp_min"] for r in records),
            "min_torsion_margin": min(r["summary"]["min_torsion_margin"] for r in records),
        },
    }
    _emit(report, args)
    if args.do_assert and failures:
        print("; ".join(failures), file=sys.stderr)
        return 1
    return 0


def cmd_brieskorn(args) -> int:
    from .brieskorn import BrieskornLink, scan

    exps = tuple(int(x) for x in args.exponents.split(","))
    if len(exps) < 3:
        raise ValueError("need >= 3 exponents")
    link = BrieskornLink.create(exps, args.r)
    result = scan(link, args.points, args.seed)
    report = {
        "family": "brieskorn",
        "params": {"exponents": list(exps), "r": args.r},
        "provenance": {"seed": args.seed, "n_points": args.points, "tol": args.tol, "version": __version__},
        "samples": result["rows"],
        "summary": result["summary"],
    }
    _emit(report, args)
    if args.do_assert:
        s = result["summary"]
        bad = []
        if s["max_constraint_residual"] > 1e-10:
            bad.append("constraint residual above 1e-10")
        if s["max_Ktilde"] > 1e-12:
            bad.append("positive ambient sectional curvature found")
        if s["max_identity_residual"] > 1e-10:
            bad.append("Gauss identity residual above 1e-10")
        if bad:
            print("; ".join(bad), file=sys.stderr)
            return 1
    return 0


def cmd_lambda1(args) -> int:
    fn, metric, family, params, smap = _resolve(args)
    base = analyze(
        fn, metric, args.points, args.dirs, args.seed,
        family=family, params=params, start_map=smap,
    )
    bounds = lambda1_report(fn, metric, base, n_rays=args.rays, seed=args.seed)
    report = {
        "family": family,
        "params": params,
        "provenance": dict(base["provenance"], n_rays=args.rays, tol=args.tol),
        "samples": base["samples"],
        "summary": dict(
            base["summary"],
            lambda1={
                "lower_bounds": bounds["lower_bounds"],
                "upper_bound": bounds["upper_bound"],
                "best_lower": bounds["best_lower"],
                "consistent": bounds["consistent"],
            },
        ),
    }
    _emit(report, args)
    if args.do_assert and bounds["consistent"] is False:
        print("lambda1 lower bound exceeds upper bound", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pherm",
        description="pseudohermitian geometry of real hypersurfaces: curvature, torsion, convexity",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="sample a surface and verify the curvature bound")
    _add_shared(pa)
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("sweep", help="repeat analyze over a family parameter range")
    _add_shared(ps)
    ps.add_argument("--param", required=True, help="family parameter to sweep")
    ps.add_argument("--from", dest="start", type=float, required=True)
    ps.add_argument("--to", dest="stop", type=float, required=True)
    ps.add_argument("--steps", type=int, required=True)
    ps.add_argument("--at-circle", dest="at_circle", action="store_true",
                    help="also run the direct solver at (0, e^(i tau))")
    ps.set_defaults(func=cmd_sweep)

    pb = sub.add_parser("brieskorn", help="curvature scan of a Brieskorn-Pham link")
    pb.add_argument("--exponents", required=True, help="comma-separated integers >= 2")
    pb.add_argument("--r", type=float, default=1.0, help="link radius parameter (|z|^2 = r)")
    pb.add_argument("--points", type=int, default=100)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--tol", type=float, default=1e-7)
    pb.add_argument("--out")
    pb.add_argument("--csv")
    pb.add_argument("--assert", dest="do_assert", action="store_true")
    pb.set_defaults(func=cmd_brieskorn)

    pl = sub.add_parser("lambda1", help="first-eigenvalue bounds for the Kohn Laplacian")
    _add_shared(pl)
    pl.add_argument("--rays", type=int, default=2000, help="rays for the surface average")
    pl.set_defaults(func=cmd_lambda1)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ParseError, KeyError) as e:
        print(f"argument error: {e}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
