"""Command-line pipeline: phantom generation, forward simulation, noise,
rebinning, reconstruction, diagnostics and rendering.

Every subcommand reads a JSON run configuration (defaults are used where
no file is given), writes its artifacts atomically and prints a one-line
JSON report to stdout.  Failures print a one-line JSON error to stderr
and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dataio, render
from .config import ConfigError, load_config
from .dataio import FormatError
from .forward import PhysicsConstants, forward_scan
from .processing import add_noise, rebin, relative_error, resample_bilinear
from .recon import linear_reconstruct, mnkm_reconstruct, residual_curve


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.handler(args)
    except (ConfigError, FormatError, ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps(report))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintomo",
        description="Polarimetric neutron tomography of magnetic fields: "
        "simulation and reconstruction pipeline.",
    )
    sub = parser.add_subparsers(required=True, metavar="command")

    p = sub.add_parser("phantom", help="build and scale the coil-slice field")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_phantom)

    p = sub.add_parser("forward", help="simulate the spin scan of a field")
    p.add_argument("--field", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_forward)

    p = sub.add_parser("noise", help="add Gaussian noise to sinograms")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_noise)

    p = sub.add_parser("rebin", help="block-mean rebin of sinograms")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--factor", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_rebin)

    p = sub.add_parser("recon-linear", help="linearized Radon inversion")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_recon_linear)

    p = sub.add_parser("recon-mnkm", help="damped Newton-Kantorovich solve")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--config")
    p.add_argument("--truth", help="optional ground-truth field for error metrics")
    p.add_argument("--out", required=True, help="report base path")
    p.set_defaults(handler=_cmd_recon_mnkm)

    p = sub.add_parser(
        "diagnose-nonconvex", help="residual against field scale factor"
    )
    p.add_argument("--field", required=True)
    p.add_argument("--config")
    p.add_argument("--alphas", default="0:300:31", help="start:stop:count")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(handler=_cmd_diagnose)

    p = sub.add_parser("metrics", help="relative errors of an estimate")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("render", help="render a field or sinogram file to PNG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_render)

    return parser


def _data_constants(cfg, geom) -> PhysicsConstants:
    """Physics constants matching the acquisition speed recorded in the data."""
    return PhysicsConstants(cfg.gamma_n, geom.neutron_speed)


def _cmd_phantom(args) -> dict:
    cfg = load_config(args.config)
    f = cfg.build_phantom_field()
    out = dataio.write_field(f, args.out)
    return {
        "command": "phantom",
        "out": str(out),
        "peak_field_t": float(f.magnitude().max()),
        "grid": [f.spec.nx, f.spec.ny],
    }


def _cmd_forward(args) -> dict:
    cfg = load_config(args.config)
    f = dataio.read_field(args.field)
    geom = cfg.scan_geometry()
    sinos, max_angle = forward_scan(f, geom, cfg.constants())
    out = dataio.write_sinograms(sinos, args.out)
    return {
        "command": "forward",
        "out": str(out),
        "max_precession_deg": math.degrees(max_angle),
        "n_rays": geom.n_angles * geom.n_detectors,
    }


def _cmd_noise(args) -> dict:
    data = dataio.read_sinograms(args.infile)
    noisy = add_noise(data, args.level, args.seed)
    out = dataio.write_sinograms(noisy, args.out)
    return {"command": "noise", "out": str(out), "level": args.level, "seed": args.seed}


def _cmd_rebin(args) -> dict:
    data = dataio.read_sinograms(args.infile)
    rb = rebin(data, args.factor)
    out = dataio.write_sinograms(rb, args.out)
    return {
        "command": "rebin",
        "out": str(out),
        "shape": [rb.geom.n_angles, rb.geom.n_detectors],
    }


def _cmd_recon_linear(args) -> dict:
    cfg = load_config(args.config)
    data = dataio.read_sinograms(args.infile)
    consts = _data_constants(cfg, data.geom)
    est = linear_reconstruct(data, consts, cfg.recon_spec())
    out = dataio.write_field(est, args.out)
    return {
        "command": "recon-linear",
        "out": str(out),
        "grid": [est.spec.nx, est.spec.ny],
    }


def _cmd_recon_mnkm(args) -> dict:
    cfg = load_config(args.config)
    data = dataio.read_sinograms(args.infile)
    consts = _data_constants(cfg, data.geom)
    truth = dataio.read_field(args.truth) if args.truth else None
    report = mnkm_reconstruct(data, consts, cfg.recon_spec(), cfg.mnkm_config(), truth)

    base = Path(args.out)
    if base.suffix in (".json", ".csv", ".png"):
        base = base.with_suffix("")
    field_path = dataio.write_field(report.field_estimate, base.parent / (base.name + "_field"))
    csv_path = dataio.write_csv(
        base.with_suffix(".csv"),
        ["iteration", "residual", "alpha", "update_norm"],
        [
            (n + 1, rec.residual, rec.alpha, rec.update_norm)
            for n, rec in enumerate(report.iterations)
        ],
    )
    fig_path = render.render_residual_trace(
        [rec.residual for rec in report.iterations],
        base.with_suffix(".png"),
        initial=report.initial_residual,
    )
    summary = {
        "command": "recon-mnkm",
        "converged": report.converged,
        "iterations": len(report.iterations),
        "initial_residual": report.initial_residual,
        "final_residual": report.iterations[-1].residual if report.iterations else report.initial_residual,
        "field": str(field_path),
        "trace_csv": str(csv_path),
        "trace_figure": str(fig_path),
    }
    if report.per_component_relative_error is not None:
        e1, e2, e3, emag = report.per_component_relative_error
        summary["relative_errors"] = {"B1": e1, "B2": e2, "B3": e3, "mag": emag}
    summary["report"] = str(dataio.write_json(summary, base.with_suffix(".json")))
    return summary


def _parse_alphas(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("--alphas expects start:stop:count")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 3:
        raise ValueError("--alphas needs at least three samples")
    return np.linspace(start, stop, count)


def _cmd_diagnose(args) -> dict:
    cfg = load_config(args.config)
    f = dataio.read_field(args.field)
    alphas = _parse_alphas(args.alphas)
    geom = cfg.scan_geometry()
    curve = residual_curve(f, alphas, geom, _data_constants(cfg, geom))
    csv_path = dataio.write_csv(args.out, ["alpha", "residual"], curve)
    fig_path = render.render_curve(
        [a for a, _ in curve], [r for _, r in curve], Path(args.out).with_suffix(".png")
    )
    second = np.diff([r for _, r in curve], 2)
    return {
        "command": "diagnose-nonconvex",
        "out": str(csv_path),
        "figure": str(fig_path),
        "convex": bool(np.all(second >= -1e-12 * max(r for _, r in curve))),
    }


def _cmd_metrics(args) -> dict:
    est = dataio.read_field(args.est)
    truth = dataio.read_field(args.truth)
    if truth.spec != est.spec:
        truth = resample_bilinear(truth, est.spec)
    e1, e2, e3, emag = relative_error(est, truth)
    return {
        "command": "metrics",
        "relative_errors": {"B1": e1, "B2": e2, "B3": e3, "mag": emag},
    }


def _cmd_render(args) -> dict:
    kind = dataio.peek_kind(args.infile)
    if kind == "sinograms":
        out = render.render_sinogram_set(dataio.read_sinograms(args.infile), args.out)
    else:
        out = render.render_field(dataio.read_field(args.infile), args.out)
    return {"command": "render", "kind": kind, "out": str(out)}


if __name__ == "__main__":
    sys.exit(main())
