"""Command-line front end: ``dualsu11 {sweep,map,validate,optimize-phi}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .config import ConfigError, config_from_dict, config_to_dict, load_document, parse_axis, parse_number
from .metrology import NoSensitiveWorkingPoint, optimize_phi_su, sensitivity_at
from .sweep import (
    SweepRequest,
    default_map_axes,
    locate_minimum,
    run_map,
    run_phase_sweep,
    run_validation,
    write_map_csv,
    write_map_json,
    write_pgm,
    write_sweep_csv,
    write_sweep_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISMATCH = 3
EXIT_UNCONVERGED = 4

log = logging.getLogger("dualsu11")


def _section(doc, name, allowed):
    sec = doc.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected a mapping")
    for k in sec:
        if k not in allowed:
            raise ConfigError(f"{name}.{k}", "unknown key")
    return sec


def _bool(sec, key, path, default=False):
    v = sec.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", "expected true or false")
    return v


def _int(sec, key, path, default, minimum):
    v = sec.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{path}.{key}", f"expected an integer >= {minimum}")
    return v


def _optimizer(doc):
    sec = _section(doc, "optimizer", {"grid_points", "tol"})
    grid = _int(sec, "grid_points", "optimizer", 64, 8)
    tol = parse_number(sec.get("tol", 1e-6), "optimizer.tol")
    if tol <= 0:
        raise ConfigError("optimizer.tol", "must be positive")
    return grid, tol


def sweep_request(doc, optimize_flag=False) -> SweepRequest:
    cfg = config_from_dict(doc)
    sec = _section(doc, "sweep", {"axis1", "optimize_phi_su"})
    if "axis1" in sec:
        axis1 = parse_axis(sec["axis1"], "sweep.axis1")
    else:
        axis1 = default_map_axes()[0]
    if axis1.parameter != "sample_phase_phi_b":
        raise ConfigError("sweep.axis1.parameter", "a phase sweep runs over sample_phase_phi_b")
    grid, _ = _optimizer(doc)
    opt = optimize_flag or _bool(sec, "optimize_phi_su", "sweep")
    return SweepRequest(cfg, axis1, None, opt, grid)


def map_request(doc, optimize_flag=False) -> SweepRequest:
    cfg = config_from_dict(doc)
    sec = _section(doc, "map", {"axis1", "axis2", "optimize_phi_su"})
    d1, d2 = default_map_axes()
    axis1 = parse_axis(sec["axis1"], "map.axis1") if "axis1" in sec else d1
    axis2 = parse_axis(sec["axis2"], "map.axis2") if "axis2" in sec else d2
    if axis1.parameter != "sample_phase_phi_b":
        raise ConfigError("map.axis1.parameter", "must be sample_phase_phi_b")
    if axis2.parameter != "sample_axis_delta":
        raise ConfigError("map.axis2.parameter", "must be sample_axis_delta")
    grid, _ = _optimizer(doc)
    opt = optimize_flag or _bool(sec, "optimize_phi_su", "map")
    return SweepRequest(cfg, axis1, axis2, opt, grid)


def _formats(fmt):
    return {"csv": ("csv",), "json": ("json",), "both": ("csv", "json")}[fmt]


def cmd_sweep(args, doc):
    req = sweep_request(doc, args.optimize_phi_su)
    table = run_phase_sweep(req)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in _formats(args.format):
        write_sweep_csv(table, out / "sweep.csv")
    if "json" in _formats(args.format):
        write_sweep_json(table, req, out / "sweep.json")
    s2 = table.column("S2_db")
    k = int(s2.argmin())
    print(f"min S2 = {s2[k]:.4f} dB at phi_b = {table.rows[k]['phi_b']:.6g} ({len(table.rows)} points)")
    return EXIT_OK


def cmd_map(args, doc):
    req = map_request(doc, args.optimize_phi_su)
    result = run_map(req, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in _formats(args.format):
        write_map_csv(result, out / "map.csv")
    if "json" in _formats(args.format):
        write_map_json(result, req, out / "map.json")
    if args.pgm:
        write_pgm(result, out / "map.pgm")
    pb, dl, s2 = result.argmin()
    print(f"grid min S2 = {s2:.4f} dB at phi_b = {pb:.6g}, delta = {dl:.6g}")
    if not result.optimized:
        pb, dl, s2 = locate_minimum(result)
        print(f"refined min S2 = {s2:.4f} dB at phi_b = {pb:.6g}, delta = {dl:.6g}")
    return EXIT_OK


def cmd_validate(args, doc):
    cfg = config_from_dict(doc)
    sec = _section(doc, "validation", {"cutoff", "max_cutoff", "tolerance"})
    cutoff = _int(sec, "cutoff", "validation", 16, 2)
    max_cutoff = _int(sec, "max_cutoff", "validation", 64, cutoff)
    tol = parse_number(sec.get("tolerance", 1e-6), "validation.tolerance")
    rep = run_validation(cfg, cutoff=cutoff, tolerance=tol, max_cutoff=max_cutoff)
    print(f"{'subset':<10}{'gauss mean':>16}{'fock mean':>16}{'gauss var':>16}{'fock var':>16}{'rel err':>11}")
    for r in rep.rows:
        err = max(r["rel_err_mean"], r["rel_err_var"])
        print(
            f"{r['subset']:<10}{r['gaussian_mean']:>16.9g}{r['fock_mean']:>16.9g}"
            f"{r['gaussian_var']:>16.9g}{r['fock_var']:>16.9g}{err:>11.2e}"
        )
    print(
        f"max relative error {rep.max_rel_error:.3e} (tolerance {tol:g}); cutoff {rep.cutoff}, "
        f"edge probability {rep.leakage:.2e}, cutoff stability {rep.stability:.2e}, "
        f"certified {'yes' if rep.converged else 'no'}"
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        doc_out = {
            "kind": "validation",
            "config": config_to_dict(cfg),
            "rows": rep.rows,
            "max_rel_error": rep.max_rel_error,
            "tolerance": tol,
            "cutoff": rep.cutoff,
            "leakage": rep.leakage,
            "stability": rep.stability if math.isfinite(rep.stability) else None,
            "converged": rep.converged,
        }
        (out / "validation.json").write_text(json.dumps(doc_out, indent=1, sort_keys=True) + "\n")
    if not rep.converged:
        return EXIT_UNCONVERGED
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def cmd_optimize_phi(args, doc):
    cfg = config_from_dict(doc)
    grid, tol = _optimizer(doc)
    try:
        x, res = optimize_phi_su(cfg, grid, tol=tol)
    except NoSensitiveWorkingPoint as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    at_cfg = sensitivity_at(cfg)
    print(f"phi_su = {x:.9f} rad  S2 = {res.S2_db:.4f} dB  (configured phi_su {cfg.phi_su:.6g}: {at_cfg.S2_db:.4f} dB)")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        doc_out = {
            "kind": "optimize-phi",
            "config": config_to_dict(cfg),
            "phi_su": x,
            "S2_db": float(res.S2_db),
            "delta_phi_sq": float(res.delta_phi_sq),
            "snl_sq": float(res.snl_sq),
        }
        (out / "optimize_phi.json").write_text(json.dumps(doc_out, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualsu11", description="Dual-polarization SU(1,1) birefringence sensing")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", required=True, help="YAML or JSON experiment description")
        p.add_argument("--out", required=out_required, help="output directory")

    p = sub.add_parser("sweep", help="sensitivity versus sample phase")
    common(p)
    p.add_argument("--format", choices=("csv", "json", "both"), default="csv")
    p.add_argument("--optimize-phi-su", action="store_true", help="optimize the SU(1,1) phase per point")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("map", help="sensitivity over (sample phase, sample axis)")
    common(p)
    p.add_argument("--format", choices=("csv", "json", "both"), default="csv")
    p.add_argument("--pgm", action="store_true", help="also write map.pgm")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--optimize-phi-su", action="store_true", help="optimize the SU(1,1) phase per point")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("validate", help="compare against the Fock-space oracle")
    common(p, out_required=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("optimize-phi", help="best SU(1,1) phase at the configured working point")
    common(p, out_required=False)
    p.set_defaults(func=cmd_optimize_phi)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        doc = load_document(args.config)
        return args.func(args, doc)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
