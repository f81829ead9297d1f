"""End-to-end driver: JSON config -> flow -> lapse extension -> mass report.

This module owns three responsibilities that sit above the individual solvers:

* parsing and validating run configurations (strict: unknown keys are
  rejected, Fourier data must be band-limited below the grid Nyquist),
* orchestrating one full run with the hypotheses checked in a fixed order,
  so a failure always names the first violated precondition, and
* the on-disk artifact layout (report.json plus CSV dumps) together with
  re-verification of stored artifacts.

Artifacts are deterministic: two runs of the same configuration produce
byte-identical report.json and CSV files (fixed summation orders, no
time-based seeding, floats printed with 17 significant digits).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from kottler.errors import ConfigError, HypothesisViolation, SolverFailure
from kottler.extension import (
    ExtensionParams,
    ExtensionTrajectory,
    LapseLimit,
    assemble_ambient_extension,
    extract_lapse_limit,
    scalar_curvature_residual,
    solve_lapse,
)
from kottler.flow import (
    DecayReport,
    FlowParams,
    FlowTrajectory,
    HeightOffset,
    decay_report,
    extract_height_offset,
    require_admissible,
    run_flow,
)
from kottler.geometry import (
    GraphSurface,
    SurfaceGeometry,
    admissibility_check,
    surface_geometry,
)
from kottler.grid import FlatTorus, Grid
from kottler.mass import MassReport, build_mass_report

__all__ = [
    "PipelineConfig",
    "PipelineResult",
    "REPORT_SCHEMA_VERSION",
    "USER_OBLIGATIONS",
    "config_hash",
    "fourier_field",
    "load_config",
    "parse_config",
    "run_pipeline",
    "verify_artifacts",
]

REPORT_SCHEMA_VERSION = 1

#: Hypotheses that cannot be checked from grid data alone.  They are echoed
#: verbatim into every report so the user sees what they are vouching for.
USER_OBLIGATIONS = (
    "the mean-curvature data describes the boundary of a compact Riemannian "
    "filling with scalar curvature >= -6",
    "the boundary torus is incompressible in that filling",
)

_FLOW_DEFAULTS = {"t_max": 8.0, "dt": 1e-3, "snapshot_stride": 100}

# Snapshot gap (in t) used when extrapolating the lapse limit; commensurate
# gaps keep the extrapolation's own error estimate honest even when the
# trajectory is saved at a much finer cadence for the CSV dumps.
_LIMIT_GAP = 1.0

# The curvature residual of the assembled extension metric is measured on a
# dedicated initial window with snapshot spacing near _RESIDUAL_SPACING (the
# fourth-order time stencils need a fine grid; the artifact cadence is far
# too coarse).  _RESIDUAL_BUDGET caps snapshot count x grid size so the
# (S, n1, n2, 3, 3) assembly stays within memory.
_RESIDUAL_SPACING = 0.01
_RESIDUAL_WINDOW = 1.0
_RESIDUAL_BUDGET = 40_000_000


# -- configuration parsing ------------------------------------------------------


def _fmt(x: float) -> str:
    """Fixed 17-significant-digit decimal form; round-trips every double."""
    return format(float(x), ".17g")


def _require_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _reject_unknown(mapping: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(
            f"{path}: unknown key '{unknown[0]}' (allowed: {', '.join(sorted(allowed))})")


def _as_float(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {type(obj).__name__}")
    x = float(obj)
    if not math.isfinite(x):
        raise ConfigError(f"{path}: must be finite")
    return x


def _as_int(obj, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ConfigError(f"{path}: expected an integer, got {type(obj).__name__}")
    return obj


def fourier_field(grid: Grid, modes) -> np.ndarray:
    """Real trigonometric field from mode rows [k1, k2, cos_amp, sin_amp].

    Each row contributes cos_amp*cos(k1 t1 + k2 t2) + sin_amp*sin(k1 t1 + k2 t2).
    Wavenumbers must be integers strictly below the grid Nyquist bound
    (|k1| < n1/2 and |k2| < n2/2) so the field is represented exactly.
    """
    t1, t2 = grid.mesh
    field = np.zeros(grid.shape)
    for row, entry in enumerate(modes):
        entry = list(entry)
        if len(entry) != 4:
            raise ConfigError(
                f"modes[{row}]: expected [k1, k2, cos_amp, sin_amp], got {entry!r}")
        k1 = _as_int(entry[0], f"modes[{row}][0]")
        k2 = _as_int(entry[1], f"modes[{row}][1]")
        if (k1, k2) == (0, 0):
            raise ConfigError(
                f"modes[{row}]: (0, 0) is the constant mode; use 'constant' instead")
        if abs(k1) >= grid.n1 / 2 or abs(k2) >= grid.n2 / 2:
            raise ConfigError(
                f"modes[{row}]: wavenumbers ({k1},{k2}) are not band-limited below "
                f"the Nyquist bound (|k1| < {grid.n1 // 2}, |k2| < {grid.n2 // 2})")
        cos_amp = _as_float(entry[2], f"modes[{row}][2]")
        sin_amp = _as_float(entry[3], f"modes[{row}][3]")
        phase = k1 * t1 + k2 * t2
        if cos_amp:
            field += cos_amp * np.cos(phase)
        if sin_amp:
            field += sin_amp * np.sin(phase)
    return field


def _parse_modes(obj, grid: Grid, path: str) -> list[list]:
    if not isinstance(obj, list):
        raise ConfigError(f"{path}: expected a list of [k1, k2, cos_amp, sin_amp] rows")
    canonical = []
    for row, entry in enumerate(obj):
        if not isinstance(entry, list) or len(entry) != 4:
            raise ConfigError(
                f"{path}[{row}]: expected [k1, k2, cos_amp, sin_amp], got {entry!r}")
        canonical.append([
            _as_int(entry[0], f"{path}[{row}][0]"),
            _as_int(entry[1], f"{path}[{row}][1]"),
            _as_float(entry[2], f"{path}[{row}][2]"),
            _as_float(entry[3], f"{path}[{row}][3]"),
        ])
    try:
        fourier_field(grid, canonical)  # re-validates wavenumbers against the grid
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return canonical


@dataclass(frozen=True)
class CurvatureSpec:
    """Prescribed physical mean curvature: reference data, a scaling, or a field."""

    kind: str                      # "reference" | "scale" | "field"
    scale: float = 1.0
    constant: float = 0.0
    modes: tuple = ()

    def resolve(self, grid: Grid, reference: np.ndarray) -> np.ndarray:
        if self.kind == "reference":
            return reference
        if self.kind == "scale":
            return self.scale * reference
        return self.constant + fourier_field(grid, [list(m) for m in self.modes])


@dataclass(frozen=True)
class PipelineConfig:
    """Fully validated run configuration (grid, data fields, numerics)."""

    grid: Grid
    surface: GraphSurface
    curvature: CurvatureSpec
    flow_params: FlowParams
    ext_params: ExtensionParams
    canonical: dict

    @property
    def sha256(self) -> str:
        return config_hash(self.canonical)


def config_hash(canonical: dict) -> str:
    """SHA-256 of the canonical (sorted-key, compact) JSON form of a config."""
    blob = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("ascii")).hexdigest()


def _parse_stepping(obj, path: str, cls):
    obj = _require_mapping(obj, path)
    _reject_unknown(obj, {"t_max", "dt", "snapshot_stride"}, path)
    merged = dict(_FLOW_DEFAULTS)
    for key in obj:
        merged[key] = obj[key]
    t_max = _as_float(merged["t_max"], f"{path}.t_max")
    dt = _as_float(merged["dt"], f"{path}.dt")
    stride = _as_int(merged["snapshot_stride"], f"{path}.snapshot_stride")
    try:
        params = cls(t_max=t_max, dt=dt, snapshot_stride=stride)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return params, {"t_max": t_max, "dt": dt, "snapshot_stride": stride}


def parse_config(raw: dict) -> PipelineConfig:
    """Validate a raw configuration mapping and resolve it onto a grid.

    Rejects unknown keys at every level (nothing is silently dropped) and
    names the offending field in every error message.
    """
    raw = _require_mapping(raw, "config")
    allowed = {"grid", "grid_n", "sigma", "initial_height",
               "physical_mean_curvature", "flow", "extension"}
    _reject_unknown(raw, allowed, "config")

    # grid and torus
    if ("grid" in raw) == ("grid_n" in raw):
        raise ConfigError("config: give exactly one of 'grid_n' or 'grid'")
    if "grid_n" in raw:
        n1 = n2 = _as_int(raw["grid_n"], "config.grid_n")
    else:
        pair = raw["grid"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError("config.grid: expected [n1, n2]")
        n1 = _as_int(pair[0], "config.grid[0]")
        n2 = _as_int(pair[1], "config.grid[1]")
    sigma_rows = raw.get("sigma", [[1.0, 0.0], [0.0, 1.0]])
    if (not isinstance(sigma_rows, list) or len(sigma_rows) != 2
            or any(not isinstance(r, list) or len(r) != 2 for r in sigma_rows)):
        raise ConfigError("config.sigma: expected a 2x2 matrix [[a, b], [b, c]]")
    sigma = np.array([[_as_float(sigma_rows[i][j], f"config.sigma[{i}][{j}]")
                       for j in range(2)] for i in range(2)])
    try:
        grid = Grid(FlatTorus(sigma), n1, n2)
    except ValueError as exc:
        raise ConfigError(f"config.grid/sigma: {exc}") from None

    # initial height v
    height = _require_mapping(raw.get("initial_height", {}), "config.initial_height")
    _reject_unknown(height, {"constant", "modes"}, "config.initial_height")
    v_const = _as_float(height.get("constant", 0.0), "config.initial_height.constant")
    v_modes = _parse_modes(height.get("modes", []), grid, "config.initial_height.modes")
    values = v_const + fourier_field(grid, v_modes)
    surface = GraphSurface(grid, values)

    # physical mean curvature
    spec = raw.get("physical_mean_curvature", "reference")
    path = "config.physical_mean_curvature"
    if spec == "reference":
        curvature = CurvatureSpec(kind="reference")
        canonical_spec = "reference"
    elif isinstance(spec, str):
        raise ConfigError(f"{path}: unknown form {spec!r} (expected 'reference', "
                          f"an object with 'scale', or one with 'constant'/'modes')")
    else:
        spec = _require_mapping(spec, path)
        if "scale" in spec:
            _reject_unknown(spec, {"scale"}, path)
            scale = _as_float(spec["scale"], f"{path}.scale")
            if scale <= 0:
                raise ConfigError(f"{path}.scale: must be positive")
            curvature = CurvatureSpec(kind="scale", scale=scale)
            canonical_spec = {"scale": scale}
        else:
            _reject_unknown(spec, {"constant", "modes"}, path)
            if not spec:
                raise ConfigError(f"{path}: empty object; give 'scale' or "
                                  f"'constant'/'modes'")
            constant = _as_float(spec.get("constant", 0.0), f"{path}.constant")
            modes = _parse_modes(spec.get("modes", []), grid, f"{path}.modes")
            curvature = CurvatureSpec(kind="field", constant=constant,
                                      modes=tuple(tuple(m) for m in modes))
            canonical_spec = {"constant": constant, "modes": modes}

    flow_params, flow_canon = _parse_stepping(raw.get("flow", {}), "config.flow",
                                              FlowParams)
    ext_params, ext_canon = _parse_stepping(raw.get("extension", raw.get("flow", {})),
                                            "config.extension", ExtensionParams)

    canonical = {
        "grid": [n1, n2],
        "sigma": [[float(sigma[i, j]) for j in range(2)] for i in range(2)],
        "initial_height": {"constant": v_const, "modes": v_modes},
        "physical_mean_curvature": canonical_spec,
        "flow": flow_canon,
        "extension": ext_canon,
    }
    return PipelineConfig(grid=grid, surface=surface, curvature=curvature,
                          flow_params=flow_params, ext_params=ext_params,
                          canonical=canonical)


def load_config(path) -> PipelineConfig:
    """Parse a JSON configuration file; syntax errors keep their line/column."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(raw)


# -- running --------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    """Everything one run produces, in memory plus (optionally) on disk."""

    config: PipelineConfig
    geometry: SurfaceGeometry
    flow: FlowTrajectory
    decay: DecayReport
    extension: ExtensionTrajectory
    offset: HeightOffset
    limit: LapseLimit
    mass: MassReport
    curvature_residual: dict | None
    report: dict
    artifacts: tuple[str, ...]


def _limit_view(ext: ExtensionTrajectory, min_gap: float) -> ExtensionTrajectory:
    """Thin a finely sampled trajectory to three snapshots spaced >= min_gap.

    The lapse-limit extrapolation uses the last two snapshots and their gap
    sets its error estimate, so the gap must stay commensurate with the decay
    scale even when snapshots are saved every 0.1 for the CSV dumps.
    """
    s = ext.n_snapshots
    if s < 3:
        return ext
    dt_snap = float(ext.times[1] - ext.times[0])
    k = max(1, min(round(min_gap / dt_snap), (s - 1) // 2))
    idx = [s - 1 - 2 * k, s - 1 - k, s - 1]
    return dataclasses.replace(
        ext,
        times=ext.times[idx],
        offsets=ext.offsets[idx],
        lapse_excess=ext.lapse_excess[idx],
        scaled_gap=ext.scaled_gap[idx],
        w_min=ext.w_min[idx],
        w_max=ext.w_max[idx],
        barrier_low=ext.barrier_low[idx],
        barrier_high=ext.barrier_high[idx],
        scaled_gap_max=ext.scaled_gap_max[idx],
    )


def _residual_params(config: PipelineConfig) -> ExtensionParams | None:
    """Stepping for the dedicated curvature-residual window, or None to skip.

    The window covers roughly the first time unit (where the lapse transients
    are largest) with snapshots near _RESIDUAL_SPACING apart; the snapshot
    stride must divide the step count, so the closest divisor from below is
    used.  Returns None when the run is too short for the time stencils or
    the assembly would exceed the memory budget.
    """
    dt = config.ext_params.dt
    n_res = min(config.ext_params.n_steps, round(_RESIDUAL_WINDOW / dt))
    if n_res < 4:
        return None
    target = max(1, int(_RESIDUAL_SPACING / dt))
    stride = max(k for k in range(1, target + 1) if n_res % k == 0)
    slices = n_res // stride + 1
    if slices * config.grid.n1 * config.grid.n2 > _RESIDUAL_BUDGET:
        return None
    return ExtensionParams(t_max=n_res * dt, dt=dt, snapshot_stride=stride)


def _resolve_curvature(config: PipelineConfig, geom: SurfaceGeometry):
    """Physical mean curvature and initial lapse, with positivity enforced.

    Returns (h_phys, w0) where w0 = H/h_phys is the lapse boundary value.
    The reference and pure-scaling forms keep w0 exactly constant.
    """
    spec = config.curvature
    h_phys = spec.resolve(config.grid, geom.mean_curvature)
    bad = ~(np.isfinite(h_phys) & (h_phys > 0.0))
    if np.any(bad):
        i, j = np.unravel_index(int(np.argmax(bad)), h_phys.shape)
        raise HypothesisViolation(
            f"H_phys > 0 fails at grid point ({i},{j}): "
            f"H_phys = {h_phys[i, j]:.6g}")
    if spec.kind == "reference":
        return h_phys, 1.0
    if spec.kind == "scale":
        return h_phys, np.full(config.grid.shape, 1.0 / spec.scale)
    return h_phys, geom.mean_curvature / h_phys


def run_pipeline(config: PipelineConfig, out_dir=None) -> PipelineResult:
    """Run one configuration end to end and optionally persist its artifacts.

    Hypotheses are checked in a fixed order (K > -1, H > 0, second form > 0,
    H_phys > 0) and the first violation aborts with a message naming it and
    the offending grid point.  After the solves, monotonicity of the mass
    series and the mass inequality are asserted; a violation beyond numerical
    tolerance aborts as a solver failure rather than being reported quietly.
    """
    geom = surface_geometry(config.surface)
    require_admissible(geom)
    h_phys, w0 = _resolve_curvature(config, geom)

    flow = run_flow(config.surface, config.flow_params)
    decay = decay_report(flow)
    ext = solve_lapse(flow, w0, config.ext_params)
    offset = extract_height_offset(flow)
    limit = extract_lapse_limit(_limit_view(ext, _LIMIT_GAP), offset)
    mass = build_mass_report(geom, h_phys, w0, flow, ext, limit)

    m0 = float(mass.series[0, 1])
    mono_tol = 1e-8 * (1.0 + abs(m0))
    if not (mass.monotonicity_violation <= mono_tol):
        raise SolverFailure(
            f"quasilocal mass series is not monotone within tolerance "
            f"(violation {mass.monotonicity_violation:.3g} > {mono_tol:.3g}); "
            f"refine dt or the grid")
    if not (mass.inequality_gap >= -1e-6):
        raise SolverFailure(
            f"mass inequality violated beyond tolerance "
            f"(gap {mass.inequality_gap:.3g} < -1e-06); refine the run")

    residual = None
    res_params = _residual_params(config)
    if res_params is not None:
        res_ext = solve_lapse(flow, w0, res_params)
        residual = {
            "max": float(scalar_curvature_residual(
                assemble_ambient_extension(res_ext))),
            "t_spacing": float(res_params.dt * res_params.snapshot_stride),
            "t_window": float(res_params.t_max),
        }

    adm = admissibility_check(geom)
    report = _build_report(config, adm, decay, ext, limit, mass, residual)
    artifacts: tuple[str, ...] = ()
    if out_dir is not None:
        artifacts = tuple(_persist_run(out_dir, config, geom, flow, decay, ext,
                                       offset, limit, mass, report))
    return PipelineResult(config=config, geometry=geom, flow=flow, decay=decay,
                          extension=ext, offset=offset, limit=limit, mass=mass,
                          curvature_residual=residual, report=report,
                          artifacts=artifacts)


def _none_if_nan(x: float) -> float | None:
    x = float(x)
    return None if math.isnan(x) else x


def _build_report(config: PipelineConfig, adm, decay: DecayReport,
                  ext: ExtensionTrajectory, limit: LapseLimit, mass: MassReport,
                  residual: dict | None) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "flow_run",
        "config_sha256": config.sha256,
        "user_obligations": list(USER_OBLIGATIONS),
        "admissibility": {
            "min_gauss_curvature": float(adm.min_gauss_curvature),
            "min_mean_curvature": float(adm.min_mean_curvature),
            "min_shape_eigenvalue": float(adm.min_shape_eigenvalue),
        },
        "flow": dict(config.canonical["flow"]),
        "decay": {
            "slope_speed_excess": _none_if_nan(decay.slope_speed_excess),
            "slope_shape_deviation": _none_if_nan(decay.slope_shape_deviation),
            "speed_at_floor": bool(decay.speed_at_floor),
            "shape_at_floor": bool(decay.shape_at_floor),
            "bound_excess": float(decay.bound_excess),
        },
        "extension": {
            **config.canonical["extension"],
            "snapshots": int(ext.n_snapshots),
            "total_substeps": int(ext.total_substeps),
            "w_min_final": float(ext.w_min[-1]),
            "w_max_final": float(ext.w_max[-1]),
            "scaled_gap_max_final": float(ext.scaled_gap_max[-1]),
        },
        "limit": {
            "time": float(limit.time),
            "error_estimate": float(limit.error_estimate),
            "correction": float(limit.correction),
            "mean": float(np.mean(limit.values)),
            "min": float(np.min(limit.values)),
            "max": float(np.max(limit.values)),
        },
        "curvature_residual": residual if residual is None else dict(residual),
        "mass": {
            "m_by_static": float(mass.m_by_static),
            "m_total": float(mass.m_total),
            "gap": float(mass.inequality_gap),
            "monotonicity_violation": float(mass.monotonicity_violation),
            "series": "series.csv",
        },
    }


# -- artifact writers -----------------------------------------------------------


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _field_csv(grid: Grid, values: np.ndarray) -> str:
    lines = ["theta1,theta2,value"]
    t1, t2 = grid.theta1, grid.theta2
    for i in range(grid.n1):
        for j in range(grid.n2):
            lines.append(f"{_fmt(t1[i])},{_fmt(t2[j])},{_fmt(values[i, j])}")
    return "\n".join(lines) + "\n"


def _table_csv(comments: dict, header: list[str], columns: list[np.ndarray]) -> str:
    lines = [f"# {key}={_fmt(val)}" for key, val in comments.items()]
    lines.append(",".join(header))
    for row in zip(*columns):
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def _persist_run(out_dir, config: PipelineConfig, geom: SurfaceGeometry,
                 flow: FlowTrajectory, decay: DecayReport,
                 ext: ExtensionTrajectory, offset: HeightOffset,
                 limit: LapseLimit, mass: MassReport, report: dict) -> list[str]:
    out = Path(out_dir)
    (out / "fields").mkdir(parents=True, exist_ok=True)

    _write_text(out / "config.json", _dump_json(config.canonical))
    _write_text(out / "report.json", _dump_json(report))
    _write_text(out / "series.csv", _table_csv(
        {"m_total": mass.m_total},
        ["t", "quasilocal_mass"],
        [mass.series[:, 0], mass.series[:, 1]]))
    _write_text(out / "decay.csv", _table_csv(
        {"slope_speed_excess": decay.slope_speed_excess,
         "slope_shape_deviation": decay.slope_shape_deviation},
        ["t", "speed_excess", "shape_deviation", "v_min", "v_max"],
        [decay.times, decay.speed_excess, decay.shape_deviation,
         decay.v_min, decay.v_max]))
    _write_text(out / "extension.csv", _table_csv(
        {},
        ["t", "w_min", "w_max", "barrier_low", "barrier_high", "scaled_gap_max"],
        [ext.times, ext.w_min, ext.w_max, ext.barrier_low, ext.barrier_high,
         ext.scaled_gap_max]))
    _write_text(out / "fields" / "initial_height.csv",
                _field_csv(config.grid, config.surface.values))
    _write_text(out / "fields" / "height_offset.csv",
                _field_csv(config.grid, offset.richardson))
    _write_text(out / "fields" / "lapse_limit.csv",
                _field_csv(config.grid, limit.values))
    return sorted([
        "config.json", "report.json", "series.csv", "decay.csv", "extension.csv",
        "fields/initial_height.csv", "fields/height_offset.csv",
        "fields/lapse_limit.csv",
    ])


# -- verification of stored artifacts -------------------------------------------


def _read_table(path: Path) -> tuple[dict, list[str], np.ndarray]:
    """Strict CSV reader: `# key=value` comments, one header row, float body."""
    comments: dict[str, float] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    for ln, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            raise ValueError(f"{path.name} line {ln}: blank line")
        if line.startswith("#"):
            if header is not None:
                raise ValueError(f"{path.name} line {ln}: comment after header")
            key, _, val = line[1:].strip().partition("=")
            comments[key.strip()] = float(val)
            continue
        cells = line.split(",")
        if header is None:
            header = [c.strip() for c in cells]
            continue
        if len(cells) != len(header):
            raise ValueError(f"{path.name} line {ln}: expected {len(header)} cells")
        rows.append([float(c) for c in cells])
    if header is None or not rows:
        raise ValueError(f"{path.name}: no data rows")
    return comments, header, np.array(rows)


def _match(actual: float, recorded: float, rel: float = 1e-12) -> bool:
    if math.isnan(actual) and math.isnan(recorded):
        return True
    return abs(actual - recorded) <= rel * max(1.0, abs(actual), abs(recorded))


_REPORT_KEYS = {"schema_version", "kind", "config_sha256", "user_obligations",
                "admissibility", "flow", "decay", "extension", "limit",
                "curvature_residual", "mass"}


def _verify_run_dir(out: Path, manifest: dict, bad: list[str]) -> None:
    try:
        config = load_config(out / "config.json")
    except (OSError, ConfigError) as exc:
        bad.append(f"config.json unusable: {exc}")
        return
    if config.sha256 != manifest.get("config_sha256"):
        bad.append("config.json hash does not match the manifest")

    try:
        report = json.loads((out / "report.json").read_text())
    except (OSError, ValueError) as exc:
        bad.append(f"report.json unusable: {exc}")
        return
    if report.get("schema_version") != REPORT_SCHEMA_VERSION:
        bad.append(f"report.json: unsupported schema_version "
                   f"{report.get('schema_version')!r}")
        return
    for key in sorted(set(report) - _REPORT_KEYS):
        bad.append(f"report.json: unexpected key '{key}' (unknown keys are "
                   f"never silently dropped)")
    for key in sorted(_REPORT_KEYS - set(report)):
        bad.append(f"report.json: missing key '{key}'")
        return

    # initial geometry: admissibility and the compatibility identity
    geom = surface_geometry(config.surface)
    adm = admissibility_check(geom)
    if not adm.admissible:
        bad.append("stored config fails the admissibility hypotheses")
    identity = (geom.mean_curvature ** 2 - geom.second_form_norm2
                - 2.0 * geom.gauss_curvature - 2.0)
    # Spectral truncation sets the attainable residual; coarse demo grids
    # legitimately sit orders of magnitude above production resolutions.
    identity_tol = 1e-6 if min(config.grid.n1, config.grid.n2) >= 32 else 1e-3
    if float(np.max(np.abs(identity))) > identity_tol:
        bad.append(f"compatibility identity residual "
                   f"{float(np.max(np.abs(identity))):.3g} exceeds "
                   f"{identity_tol:g}")
    for key, value in (("min_gauss_curvature", adm.min_gauss_curvature),
                       ("min_mean_curvature", adm.min_mean_curvature),
                       ("min_shape_eigenvalue", adm.min_shape_eigenvalue)):
        if not _match(value, report["admissibility"].get(key, math.nan), 1e-9):
            bad.append(f"report.json admissibility.{key} does not match a "
                       f"recomputation from config.json")

    mass = report["mass"]
    limit_info = report["limit"]

    # series.csv: label, monotonicity, convergence to the recorded total
    try:
        comments, header, table = _read_table(out / "series.csv")
        if header != ["t", "quasilocal_mass"]:
            raise ValueError(f"series.csv: unexpected header {header}")
    except (OSError, ValueError) as exc:
        bad.append(f"series.csv unusable: {exc}")
    else:
        if not _match(comments.get("m_total", math.nan), mass["m_total"]):
            bad.append("series.csv m_total label disagrees with report.json")
        series = table[:, 1]
        mono = float(np.max(np.diff(series))) if len(series) > 1 else 0.0
        mono_tol = 1e-8 * (1.0 + abs(float(series[0])))
        if mono > mono_tol:
            bad.append(f"mass series is not monotone: max forward difference "
                       f"{mono:.3g} > {mono_tol:.3g}")
        if not _match(mass["monotonicity_violation"], max(mono, 0.0), 1e-9):
            bad.append("report.json monotonicity_violation disagrees with series.csv")
        budget = max(5.0 * limit_info["error_estimate"],
                     1e-10 * (1.0 + abs(mass["m_total"])))
        if abs(float(series[-1]) - mass["m_total"]) > budget:
            bad.append(f"series endpoint {float(series[-1]):.6g} is not within "
                       f"{budget:.3g} of m_total {mass['m_total']:.6g}")

    # extension.csv: barrier bracketing at every snapshot
    try:
        _, header, table = _read_table(out / "extension.csv")
        if header != ["t", "w_min", "w_max", "barrier_low", "barrier_high",
                      "scaled_gap_max"]:
            raise ValueError(f"extension.csv: unexpected header {header}")
    except (OSError, ValueError) as exc:
        bad.append(f"extension.csv unusable: {exc}")
    else:
        slack = 1e-8
        low_bad = table[:, 1] < table[:, 3] - slack
        high_bad = table[:, 2] > table[:, 4] + slack
        if np.any(low_bad | high_bad):
            k = int(np.argmax(low_bad | high_bad))
            bad.append(f"barrier bracketing fails at t={table[k, 0]:.6g}: "
                       f"w in [{table[k, 1]:.9g}, {table[k, 2]:.9g}], barriers "
                       f"[{table[k, 3]:.9g}, {table[k, 4]:.9g}]")

    # decay.csv: slope labels and (for long runs) the decay-rate window
    try:
        comments, header, table = _read_table(out / "decay.csv")
        if header != ["t", "speed_excess", "shape_deviation", "v_min", "v_max"]:
            raise ValueError(f"decay.csv: unexpected header {header}")
    except (OSError, ValueError) as exc:
        bad.append(f"decay.csv unusable: {exc}")
    else:
        for key in ("slope_speed_excess", "slope_shape_deviation"):
            recorded = report["decay"][key]
            labeled = comments.get(key, math.nan)
            if not _match(labeled, math.nan if recorded is None else recorded):
                bad.append(f"decay.csv {key} label disagrees with report.json")
            if (recorded is not None and config.flow_params.t_max >= 3.0
                    and not (-2.2 <= recorded <= -1.8)):
                bad.append(f"decay exponent {key}={recorded:.4g} is outside "
                           f"[-2.2, -1.8]")
        speed0 = float(table[0, 1])
        if report["decay"]["bound_excess"] > 1e-8 * (1.0 + speed0):
            bad.append(f"speed excess exceeds its t=0 envelope by "
                       f"{report['decay']['bound_excess']:.3g}")

    # field dumps: shapes, and the limit field must reproduce m_total
    grid = config.grid
    for name in ("initial_height", "height_offset", "lapse_limit"):
        try:
            _, header, table = _read_table(out / "fields" / f"{name}.csv")
            if header != ["theta1", "theta2", "value"]:
                raise ValueError(f"{name}.csv: unexpected header {header}")
            if table.shape[0] != grid.n1 * grid.n2:
                raise ValueError(f"{name}.csv: expected {grid.n1 * grid.n2} rows, "
                                 f"found {table.shape[0]}")
        except (OSError, ValueError) as exc:
            bad.append(f"fields/{name}.csv unusable: {exc}")
            continue
        values = table[:, 2].reshape(grid.shape)
        if name == "initial_height":
            if float(np.max(np.abs(values - config.surface.values))) > 1e-12:
                bad.append("fields/initial_height.csv disagrees with config.json")
        if name == "lapse_limit":
            total = float(np.mean(values)) * grid.torus.area / (4.0 * np.pi)
            if not _match(total, mass["m_total"], 1e-10):
                bad.append(f"lapse-limit field integrates to {total:.9g}, but "
                           f"report.json records m_total {mass['m_total']:.9g}")

    residual = report["curvature_residual"]
    if residual is not None and residual["max"] > 1e-2:
        bad.append(f"extension curvature residual {residual['max']:.3g} "
                   f"exceeds 1e-02")
    if mass["gap"] < -1e-6:
        bad.append(f"mass inequality gap {mass['gap']:.3g} is below -1e-06")


def _verify_geon_dir(out: Path, manifest: dict, bad: list[str]) -> None:
    from kottler.geon import GeonConfig, counterexample_report, geon_sweep

    try:
        report = json.loads((out / "geon_report.json").read_text())
        args = report["config"]
        cfg = GeonConfig(r_h=args["r_h"], r_0=args["r_0"],
                         p_xi=args["p_xi"], p_theta=args["p_theta"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        bad.append(f"geon_report.json unusable: {exc}")
        return
    fresh = counterexample_report(cfg)
    for key, value in (("m_exact", fresh.m_exact),
                       ("h_inner_outward", fresh.h_inner_outward)):
        if not _match(value, report.get(key, math.nan)):
            bad.append(f"geon_report.json {key} does not match a recomputation")
    if report.get("mass_negative") != bool(fresh.mass_negative):
        bad.append("geon_report.json mass_negative does not match a recomputation")

    if "geon_sweep.csv" in manifest.get("outputs", []):
        try:
            comments, header, table = _read_table(out / "geon_sweep.csv")
            if header != ["r0", "mass", "mass_leading", "remainder", "h_boundary"]:
                raise ValueError(f"geon_sweep.csv: unexpected header {header}")
        except (OSError, ValueError) as exc:
            bad.append(f"geon_sweep.csv unusable: {exc}")
            return
        try:
            sweep = geon_sweep(table[:, 0], p_xi=cfg.p_xi, p_theta=cfg.p_theta)
        except ValueError as exc:
            bad.append(f"geon_sweep.csv radii unusable: {exc}")
            return
        if not _match(comments.get("remainder_slope", math.nan),
                      sweep.remainder_slope):
            bad.append("geon_sweep.csv remainder_slope label does not match a "
                       "recomputation")
        if np.any(table[:, 1] >= 0.0):
            bad.append("geon_sweep.csv contains a non-negative mass")
        if np.any(table[:, 4] <= 2.0):
            bad.append("geon_sweep.csv contains a boundary mean curvature <= 2")


def _verify_radial_dir(out: Path, manifest: dict, bad: list[str]) -> None:
    from kottler.cli import resolve_radial_args, run_radial_case

    try:
        report = json.loads((out / "radial_report.json").read_text())
        args = report["config"]
    except (OSError, ValueError, KeyError) as exc:
        bad.append(f"radial_report.json unusable: {exc}")
        return
    try:
        sol, fresh = run_radial_case(resolve_radial_args(args))
    except (KeyError, TypeError, ValueError) as exc:
        bad.append(f"radial_report.json config unusable: {exc}")
        return
    for key in ("penrose_constant", "boundary_slope", "max_integrand"):
        if not _match(fresh[key], report.get(key, math.nan), 1e-9):
            bad.append(f"radial_report.json {key} does not match a recomputation")
    try:
        _, header, table = _read_table(out / "radial.csv")
        if header != ["s", "u", "du", "integrand"]:
            raise ValueError(f"radial.csv: unexpected header {header}")
    except (OSError, ValueError) as exc:
        bad.append(f"radial.csv unusable: {exc}")
        return
    if table.shape[0] != len(sol.s_grid):
        bad.append(f"radial.csv has {table.shape[0]} rows; expected "
                   f"{len(sol.s_grid)}")
        return
    if np.any(table[:, 2] <= 0.0):
        bad.append("radial.csv contains a non-positive derivative (branch breach)")
    if float(np.max(np.abs(table[:, 1] - sol.u))) > 1e-9 * max(1.0, float(np.max(np.abs(sol.u)))):
        bad.append("radial.csv profile does not match a recomputation")


def verify_artifacts(out_dir) -> list[str]:
    """Re-check every invariant a stored run vouches for; return violations.

    A missing or unreadable manifest raises ConfigError (the directory cannot
    be interpreted at all); everything else is reported as a violation string.
    """
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.is_file():
        raise ConfigError(f"{manifest_path}: manifest not found")
    try:
        manifest = json.loads(manifest_path.read_text())
    except ValueError as exc:
        raise ConfigError(f"{manifest_path}: invalid JSON: {exc}") from None
    if not isinstance(manifest, dict):
        raise ConfigError(f"{manifest_path}: expected an object")

    bad: list[str] = []
    for key in ("config_sha256", "command", "version", "outputs", "wall_time_s"):
        if key not in manifest:
            bad.append(f"manifest.json: missing key '{key}'")
    outputs = manifest.get("outputs", [])
    if not isinstance(outputs, list):
        bad.append("manifest.json: outputs must be a list")
        outputs = []
    for name in outputs:
        if not (out / name).is_file():
            bad.append(f"listed output is missing: {name}")

    command = manifest.get("command", "")
    tokens = str(command).split()
    kind = next((t for t in tokens if t in ("run", "geon", "radial")), "")
    try:
        if kind == "run":
            _verify_run_dir(out, manifest, bad)
        elif kind == "geon":
            _verify_geon_dir(out, manifest, bad)
        elif kind == "radial":
            _verify_radial_dir(out, manifest, bad)
        else:
            bad.append(f"manifest.json: unrecognized command {command!r}")
    except (KeyError, TypeError, ValueError) as exc:
        bad.append(f"stored artifacts are structurally invalid: {exc}")
    return bad
