"""Command-line front end.

Subcommands:
  boundary    sample droplet boundaries to CSV/SVG/PNG
  verify      run the verification suite for one model, JSON report
  thresholds  convexity/univalency constants (and width) for a family
  annulus     identities, period scans, and traces for the annulus case

Sweep syntax for --c: a single value `0.3`, a comma list `0.1,0.3,0.5`, or a
range `lo:hi:step`.  Exit status is 0 iff every selected check passed its
tolerance.  An optional key=value config file overrides check tolerances
(keys: boundary_residual, residue, closed_form, qd_match).  The default
output directory honours $EDROPLETS_OUTDIR.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import annulus as ann
from . import families as fam_mod
from . import geometry, output, verification
from .families import ParameterRangeWarning


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str | None
    params: dict
    n: int
    outdir: str
    formats: tuple
    tolerances: dict


def parse_sweep(text: str) -> list:
    """`0.3`, `0.1,0.2`, or `lo:hi:step` (endpoint included within 1e-12)."""
    if ":" in text:
        lo, hi, step = (float(p) for p in text.split(":"))
        if step <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        count = int(np.floor((hi - lo) / step + 1e-12)) + 1
        return [lo + k * step for k in range(count)]
    return [float(p) for p in text.split(",")]


def load_tolerances(path: str | None) -> dict:
    if path is None:
        return {}
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw.rstrip()}")
            key, value = (p.strip() for p in line.split("=", 1))
            if key not in verification.DEFAULT_TOLERANCES:
                raise ValueError(f"unknown config key {key!r}")
            out[key] = float(value)
    return out


def _family_for(args, c: float) -> fam_mod.DropletFamily:
    tag = args.family
    if tag == "circle":
        return fam_mod.circle()
    if tag == "mcleod":
        return fam_mod.mcleod()
    if tag == "ksv":
        return fam_mod.ksv(c)
    if tag == "twopole":
        return fam_mod.twopole(c)
    if tag == "mpole":
        if args.m is None:
            raise SystemExit("--m is required for the mpole family")
        return fam_mod.mpole(args.m, c)
    raise SystemExit(f"unknown family {tag!r}")


def _pow2(text: str) -> int:
    n = int(text)
    if n < 64 or n & (n - 1):
        raise argparse.ArgumentTypeError("sample count must be a power of two >= 64")
    return n


def _family_slug(args, sweep) -> str:
    parts = [args.family]
    if args.family == "mpole":
        parts.append(f"m{args.m}")
    if sweep:
        parts.append("c" + "-".join(output.fmt(c) for c in sweep))
    return "_".join(parts)


FIXED_VIEWBOXES = {
    # per-family scale so sweep figures are comparable
    "circle": (-1.4, 1.4, -1.4, 1.4),
    "mcleod": (-2.2, 2.2, -2.2, 2.2),
    "ksv": (-3.2, 3.2, -3.2, 3.2),
    "twopole": (-1.6, 1.6, -1.6, 1.6),
    "mpole": (-1.8, 1.8, -1.8, 1.8),
}


def cmd_boundary(args) -> int:
    sweep = args.c if args.c is not None else ([0.0] if args.family in ("circle", "mcleod") else None)
    if sweep is None:
        raise SystemExit("--c is required for this family")
    sweep = sorted(sweep)
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    slug = _family_slug(args, sweep if args.family not in ("circle", "mcleod") else [])
    curves = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        for c in sweep:
            fam = _family_for(args, c)
            trace = fam_mod.boundary_trace(fam, args.n)
            if trace.degenerate_nodes:
                print(f"# degenerate boundary nodes at c={output.fmt(c)}: "
                      f"{trace.degenerate_nodes}", file=sys.stderr)
            label = f"c{output.fmt(c)}" if args.family not in ("circle", "mcleod") else args.family
            curves.append((label, trace))
    meta = f"family={args.family}" \
        + (f" m={args.m}" if args.family == "mpole" else "") \
        + (f" c={','.join(output.fmt(c) for c in sweep)}"
           if args.family not in ("circle", "mcleod") else "") \
        + f" n={args.n}"
    wrote = []
    if "csv" in args.formats:
        for label, trace in curves:
            name = os.path.join(outdir, f"boundary_{slug}_{label}.csv" if len(curves) > 1
                                else f"boundary_{slug}.csv")
            output.write_csv(name, ("theta", "x", "y", "curvature"),
                             output.trace_rows(trace))
            wrote.append(name)
    curveset = output.CurveSet(
        curves=tuple((label, trace.points) for label, trace in curves),
        metadata=meta,
    )
    if "svg" in args.formats:
        name = os.path.join(outdir, f"boundary_{slug}.svg")
        output.write_svg(name, curveset, viewbox=FIXED_VIEWBOXES.get(args.family))
        wrote.append(name)
    if "png" in args.formats:
        name = os.path.join(outdir, f"boundary_{slug}.png")
        output.render_png(name, curveset)
        wrote.append(name)
    for name in wrote:
        print(name)
    return 0


def cmd_verify(args) -> int:
    tol = load_tolerances(args.config)
    c = args.c[0] if args.c else 0.0
    fam = _family_for(args, c)
    report = verification.run_verification(
        fam, n=args.n, tolerances=tol, perturb_tau=args.perturb_tau
    )
    text = report.to_json()
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(args.out)
    else:
        print(text)
    if args.perturb_tau:
        # the perturbed run is expected to break cancellation; report it
        broken = not report.checks["residue_cancellation"]["passed"]
        print(f"# residue cancellation broken by tau perturbation: {broken}",
              file=sys.stderr)
    return 0 if report.passed else 1


def cmd_thresholds(args) -> int:
    fam = _family_for(args, args.c[0] if args.c else 0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        report = geometry.geometry_report(fam, c=args.c[0] if args.c else None)
    payload = report.to_dict()
    text = output.write_json(args.out, payload)
    if args.out:
        print(args.out)
    else:
        print(text, end="")
    ok = isinstance(report.univalency_threshold, float)
    return 0 if ok else 1


def cmd_annulus(args) -> int:
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    xs = args.x
    if args.probe == "identities":
        config = ann.AnnulusConfig(r=args.r, x=xs[0] if xs else None)
        rng = np.random.default_rng(23)
        pts = (config.r + (1 - config.r) * rng.random(100)) \
            * np.exp(2j * np.pi * rng.random(100))
        p_dev = float(np.max(np.abs(
            ann.prime_P(1 / pts, config) + ann.prime_P(pts, config) / pts)))
        p_dev2 = float(np.max(np.abs(
            ann.prime_P(config.r**2 * pts, config) + ann.prime_P(pts, config) / pts)))
        theta_dev = ann.theta_prime_consistency(config)
        payload = {
            "r": config.r,
            "prime_reflection_residual": p_dev,
            "prime_shift_residual": p_dev2,
            "theta_ratio_deviation": theta_dev,
        }
        if xs:
            w = np.sqrt(config.r) * np.exp(2j * np.pi * np.arange(64) / 64)
            prod, theta = ann.annulus_phi_prime(w, config)
            ratio = theta / prod
            payload["phi_prime_form_ratio_deviation"] = float(
                np.max(np.abs(ratio / ratio[0] - 1)))
            payload["singularities"] = {
                k: ([output.fmt(abs(v)) for v in vs] if isinstance(vs, list) else vs)
                for k, vs in ann.annulus_singularities(config).items()
                if k.endswith("in_annulus") or k == "normalization_pole_is_denominator_zero"
            }
        text = output.write_json(args.out, payload)
        print(args.out if args.out else text, end="" if not args.out else "\n")
        tol_ok = p_dev < 1e-12 and p_dev2 < 1e-12 and theta_dev < 1e-10
        return 0 if tol_ok else 1
    if args.probe == "periods":
        if not xs:
            raise SystemExit("--x is required for the period scan")
        rows = []
        for x in sorted(xs):
            config = ann.AnnulusConfig(r=args.r, x=x)
            res = ann.annulus_periods(config, [np.sqrt(args.r)])[0]
            rows.append((x, res["period"].real, res["period"].imag))
        name = args.out or os.path.join(outdir, f"annulus_periods_r{output.fmt(args.r)}.csv")
        output.write_csv(name, ("x", "re_period", "im_period"), rows)
        print(name)
        return 0
    if args.probe == "trace":
        if not xs:
            raise SystemExit("--x is required for traces")
        config = ann.AnnulusConfig(r=args.r, x=xs[0])
        traces = ann.annulus_boundary_trace(config, n=args.n)
        names = []
        for side, poly, defect in (
            ("outer", traces.outer, traces.outer_closure_defect),
            ("inner", traces.inner, traces.inner_closure_defect),
        ):
            theta = np.linspace(0, 2 * np.pi, len(poly.points))
            name = os.path.join(
                outdir,
                f"annulus_trace_{side}_r{output.fmt(args.r)}_x{output.fmt(xs[0])}.csv",
            )
            output.write_csv(
                name, ("theta", "x", "y", "curvature"),
                ((t, z.real, z.imag, float("nan"))
                 for t, z in zip(theta, poly.points)),
            )
            names.append(name)
            print(f"# {side}: closure defect {output.fmt(defect)} "
                  f"open_curve={traces.open_curve}", file=sys.stderr)
        for name in names:
            print(name)
        return 0
    raise SystemExit(f"unknown probe {args.probe!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edroplets",
        description="Exact electrified-droplet solutions: boundaries, verification, thresholds, annulus probes.",
    )
    parser.add_argument("--outdir", default=output.default_outdir(),
                        help="output directory (default $EDROPLETS_OUTDIR or .)")
    parser.add_argument("--config", default=None,
                        help="key=value file overriding check tolerances")
    sub = parser.add_subparsers(dest="command", required=True)

    fam_args = dict(choices=("circle", "mcleod", "ksv", "twopole", "mpole"))

    b = sub.add_parser("boundary", help="sample droplet boundaries")
    b.add_argument("--family", required=True, **fam_args)
    b.add_argument("--c", type=parse_sweep, default=None)
    b.add_argument("--m", type=int, default=None)
    b.add_argument("--n", type=_pow2, default=1024)
    b.add_argument("--csv", action="append_const", dest="formats", const="csv")
    b.add_argument("--svg", action="append_const", dest="formats", const="svg")
    b.add_argument("--png", action="append_const", dest="formats", const="png")
    b.set_defaults(func=cmd_boundary)

    v = sub.add_parser("verify", help="verification report for one model")
    v.add_argument("--family", required=True, **fam_args)
    v.add_argument("--c", type=parse_sweep, default=None)
    v.add_argument("--m", type=int, default=None)
    v.add_argument("--n", type=_pow2, default=4096)
    v.add_argument("--perturb-tau", type=float, default=0.0)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("thresholds", help="convexity/univalency constants")
    t.add_argument("--family", required=True, choices=("ksv", "twopole", "mpole"))
    t.add_argument("--c", type=parse_sweep, default=None)
    t.add_argument("--m", type=int, default=None)
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_thresholds)

    a = sub.add_parser("annulus", help="annulus-case diagnostics")
    a.add_argument("--r", type=float, required=True)
    a.add_argument("--x", type=parse_sweep, default=None)
    a.add_argument("--probe", required=True, choices=("identities", "periods", "trace"))
    a.add_argument("--n", type=_pow2, default=2048)
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_annulus)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "formats", None) is None and args.command == "boundary":
        args.formats = ["csv"]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
