"""Command-line entry points for runs, closed-form examples, and verification.

Exit codes are a stable contract:

* 0 — success,
* 1 — a solve failed or stored artifacts violate an invariant,
* 2 — input data violates a hypothesis of the construction,
* 64 — malformed configuration or usage (with a field/line diagnostic).

The environment variable KML_OUT, when set, overrides the output directory
for every subcommand (including an explicit --out).  No subcommand touches
the network.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from kottler import __version__
from kottler.errors import ConfigError, HypothesisViolation, SolverFailure
from kottler.geon import (
    SMOOTH_CLOSURE_PERIOD,
    GeonConfig,
    counterexample_report,
    geon_boundary_geometry,
    geon_static_mass,
    geon_sweep,
)
from kottler.pipeline import (
    REPORT_SCHEMA_VERSION,
    config_hash,
    load_config,
    run_pipeline,
    verify_artifacts,
)
from kottler.radial import mass_integrand_diagnostic, penrose_constant, solve_radial

__all__ = ["main", "resolve_out_dir", "resolve_radial_args", "run_radial_case"]

_DEFAULT_OUT = "kottler-out"


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 64, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def resolve_out_dir(flag_value: str | None) -> Path:
    """Output directory: KML_OUT overrides --out, which overrides the default."""
    env = os.environ.get("KML_OUT")
    if env:
        return Path(env)
    if flag_value:
        return Path(flag_value)
    return Path(_DEFAULT_OUT)


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_manifest(out: Path, sha256: str, command: str, outputs: list[str],
                    wall_time: float) -> None:
    _write_text(out / "manifest.json", _dump_json({
        "config_sha256": sha256,
        "command": command,
        "version": __version__,
        "outputs": sorted(set(outputs) | {"manifest.json"}),
        "wall_time_s": float(wall_time),
    }))


# -- run --------------------------------------------------------------------


def _cmd_run(args) -> int:
    config = load_config(args.config)
    out = resolve_out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = run_pipeline(config, out_dir=out)
    wall = time.perf_counter() - t0
    command = f"kottler run --config {args.config} --out {out}"
    _write_manifest(out, config.sha256, command, list(result.artifacts), wall)
    mass = result.report["mass"]
    print(f"m_by_static          = {mass['m_by_static']:.12g}")
    print(f"m_total              = {mass['m_total']:.12g}")
    print(f"inequality gap       = {mass['gap']:.12g}")
    print(f"monotonicity defect  = {mass['monotonicity_violation']:.3g}")
    print(f"artifacts written to {out}")
    return 0


# -- geon -------------------------------------------------------------------


def _parse_radii(text: str) -> list[float]:
    radii = [float(part) for part in text.split(",") if part.strip()]
    if not radii:
        raise ValueError("empty radius list")
    return radii


def _cmd_geon(args) -> int:
    cfg = GeonConfig(r_h=args.rh, r_0=args.r0, p_xi=args.p_xi,
                     p_theta=args.p_theta)
    out = resolve_out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    report = counterexample_report(cfg)
    boundary = geon_boundary_geometry(cfg)
    mass = geon_static_mass(cfg)
    canonical = {"r_h": float(cfg.r_h), "r_0": float(cfg.r_0),
                 "p_xi": float(cfg.p_xi), "p_theta": float(cfg.p_theta)}
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "geon",
        "config": canonical,
        "mass_negative": bool(report.mass_negative),
        "trapping_violated": bool(report.trapping_violated),
        "homotopy_case": bool(report.homotopy_case),
        "m_exact": float(mass.m_exact),
        "m_leading": float(mass.m_leading),
        "remainder": float(mass.remainder),
        "h_outer": float(boundary.h_outer),
        "h_inner_outward": float(boundary.h_inner_outward),
        "h_inner_inward": float(boundary.h_inner_inward),
        "area_outer": float(boundary.area_outer),
    }
    _write_text(out / "geon_report.json", _dump_json(payload))
    outputs = ["geon_report.json"]

    if args.sweep:
        sweep = geon_sweep(args.sweep_radii, p_xi=cfg.p_xi, p_theta=cfg.p_theta)
        lines = [f"# remainder_slope={_fmt(sweep.remainder_slope)}",
                 "r0,mass,mass_leading,remainder,h_boundary"]
        for k in range(len(sweep.r_0)):
            lines.append(",".join(_fmt(x) for x in (
                sweep.r_0[k], sweep.mass[k], sweep.mass_leading[k],
                sweep.remainder[k], sweep.h_boundary[k])))
        _write_text(out / "geon_sweep.csv", "\n".join(lines) + "\n")
        outputs.append("geon_sweep.csv")
        print(f"sweep remainder slope = {sweep.remainder_slope:.6g}")

    wall = time.perf_counter() - t0
    command = (f"kottler geon --rh {args.rh} --r0 {args.r0} "
               f"--p-xi {args.p_xi} --p-theta {args.p_theta}"
               + (" --sweep" if args.sweep else "") + f" --out {out}")
    _write_manifest(out, config_hash(canonical), command, outputs, wall)
    print(f"m_exact          = {payload['m_exact']:.12g}")
    print(f"mass_negative    = {payload['mass_negative']}")
    print(f"trapping_violated= {payload['trapping_violated']}")
    print(f"homotopy_case    = {payload['homotopy_case']}")
    print(f"artifacts written to {out}")
    return 0


# -- radial -------------------------------------------------------------------


_RADIAL_KEYS = {"warp", "warp_slope", "amplitude", "s_start", "s_end",
                "points", "u_start", "slope_end"}


def resolve_radial_args(args: dict) -> dict:
    """Normalize a radial case description; raise ConfigError when malformed."""
    unknown = sorted(set(args) - _RADIAL_KEYS)
    if unknown:
        raise ConfigError(f"radial config: unknown key '{unknown[0]}'")
    warp = args.get("warp", "kottler")
    if warp not in ("kottler", "linear", "perturbed"):
        raise ConfigError(f"radial config: unknown warp '{warp}' "
                          f"(expected kottler, linear, or perturbed)")
    try:
        case = {
            "warp": warp,
            "warp_slope": float(args.get("warp_slope", 1.5)),
            "amplitude": float(args.get("amplitude", 0.1)),
            "s_start": float(args.get("s_start", 0.0)),
            "s_end": float(args.get("s_end", 6.0)),
            "points": int(args.get("points", 2001)),
            "u_start": float(args.get("u_start", 1.0)),
        }
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"radial config: {exc}") from None
    slope_end = args.get("slope_end")
    if slope_end is None:
        # Unit boundary slope for the reference warp: u' = 1 at s_start.
        slope_end = math.exp(case["s_end"] - case["s_start"])
    case["slope_end"] = float(slope_end)
    return case


def run_radial_case(case: dict) -> tuple:
    """Solve one normalized radial case; return (solution, summary values)."""
    warps = {
        "kottler": (lambda s: s, lambda s: np.ones_like(s)),
        "linear": (lambda s: case["warp_slope"] * s,
                   lambda s: np.full_like(s, case["warp_slope"])),
        "perturbed": (lambda s: s + case["amplitude"] * np.sin(s),
                      lambda s: 1.0 + case["amplitude"] * np.cos(s)),
    }
    warp, warp_prime = warps[case["warp"]]
    sol = solve_radial(warp, case["s_start"], case["s_end"], case["points"],
                       case["u_start"], case["slope_end"], warp_prime=warp_prime)
    values = {
        "penrose_constant": float(penrose_constant(sol)),
        "boundary_slope": float(sol.du[0]),
        "max_integrand": float(np.max(mass_integrand_diagnostic(sol))),
    }
    return sol, values


def _cmd_radial(args) -> int:
    case = resolve_radial_args({
        "warp": args.warp, "warp_slope": args.warp_slope,
        "amplitude": args.amplitude, "s_start": args.s0, "s_end": args.s1,
        "points": args.points, "u_start": args.u0, "slope_end": args.slope_end,
    })
    out = resolve_out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    sol, values = run_radial_case(case)
    integrand = mass_integrand_diagnostic(sol)
    lines = ["s,u,du,integrand"]
    for k in range(len(sol.s_grid)):
        lines.append(",".join(_fmt(x) for x in (
            sol.s_grid[k], sol.u[k], sol.du[k], integrand[k])))
    _write_text(out / "radial.csv", "\n".join(lines) + "\n")
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "radial",
        "config": case,
        **values,
    }
    _write_text(out / "radial_report.json", _dump_json(payload))
    wall = time.perf_counter() - t0
    command = (f"kottler radial --warp {case['warp']} --s0 {case['s_start']} "
               f"--s1 {case['s_end']} --points {case['points']} --out {out}")
    _write_manifest(out, config_hash(case), command,
                    ["radial.csv", "radial_report.json"], wall)
    print(f"boundary slope u'(s0) = {values['boundary_slope']:.12g}")
    print(f"penrose constant      = {values['penrose_constant']:.12g}")
    print(f"max mass integrand    = {values['max_integrand']:.6g}")
    print(f"artifacts written to {out}")
    return 0


# -- verify ---------------------------------------------------------------------


def _cmd_verify(args) -> int:
    out = resolve_out_dir(args.out)
    violations = verify_artifacts(out)
    for message in violations:
        print(f"violation: {message}")
    if violations:
        print(f"verification FAILED: {len(violations)} violation(s) in {out}")
        return 1
    print(f"verification OK: {out}")
    return 0


# -- entry point ------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="kottler",
                     description="Torus graph flows, scalar-curvature "
                                 "extensions, and quasilocal mass reports.")
    parser.add_argument("--version", action="version",
                        version=f"kottler {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")

    p_run = sub.add_parser("run", help="run one configuration end to end")
    p_run.add_argument("--config", required=True, help="JSON configuration file")
    p_run.add_argument("--out", default=None,
                       help=f"output directory (default {_DEFAULT_OUT}; "
                            f"KML_OUT overrides)")
    p_run.set_defaults(func=_cmd_run)

    p_geon = sub.add_parser("geon", help="closed-form negative-mass example")
    p_geon.add_argument("--rh", type=float, default=1.0,
                        help="inner boundary radius (default 1, the horizon)")
    p_geon.add_argument("--r0", type=float, default=100.0,
                        help="outer boundary radius (default 100)")
    p_geon.add_argument("--p-xi", type=float, default=SMOOTH_CLOSURE_PERIOD,
                        help="period of the first cycle (default 4*pi/3)")
    p_geon.add_argument("--p-theta", type=float, default=2.0 * math.pi,
                        help="period of the second cycle (default 2*pi)")
    p_geon.add_argument("--sweep", action="store_true",
                        help="also sweep the outer radius and fit the "
                             "remainder decay")
    p_geon.add_argument("--sweep-radii", type=_parse_radii,
                        default=[4.0, 8.0, 16.0, 32.0],
                        help="comma-separated radii for --sweep "
                             "(default 4,8,16,32)")
    p_geon.add_argument("--out", default=None)
    p_geon.set_defaults(func=_cmd_geon)

    p_rad = sub.add_parser("radial", help="radially symmetric profile solve")
    p_rad.add_argument("--warp", default="kottler",
                       choices=("kottler", "linear", "perturbed"))
    p_rad.add_argument("--warp-slope", type=float, default=1.5,
                       help="slope for --warp linear (default 1.5)")
    p_rad.add_argument("--amplitude", type=float, default=0.1,
                       help="perturbation amplitude for --warp perturbed")
    p_rad.add_argument("--s0", type=float, default=0.0, help="domain start")
    p_rad.add_argument("--s1", type=float, default=6.0, help="domain end")
    p_rad.add_argument("--points", type=int, default=2001)
    p_rad.add_argument("--u0", type=float, default=1.0,
                       help="profile value at s0")
    p_rad.add_argument("--slope-end", type=float, default=None,
                       help="profile slope at s1 (default exp(s1 - s0), "
                            "which normalizes u'(s0) = 1 for the kottler warp)")
    p_rad.add_argument("--out", default=None)
    p_rad.set_defaults(func=_cmd_radial)

    p_ver = sub.add_parser("verify",
                           help="re-check the invariants of stored artifacts")
    p_ver.add_argument("--out", default=None,
                       help="artifact directory to verify")
    p_ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --version
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        print("kottler: error: a subcommand is required", file=sys.stderr)
        return 64
    try:
        return args.func(args)
    except HypothesisViolation as exc:
        print(f"kottler: hypothesis violation: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"kottler: solver failure: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"kottler: configuration error: {exc}", file=sys.stderr)
        return 64
    except (OSError, ValueError) as exc:
        print(f"kottler: error: {exc}", file=sys.stderr)
        return 64


if __name__ == "__main__":
    sys.exit(main())
