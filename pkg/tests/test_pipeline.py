"""Tests for configuration parsing, the end-to-end driver, and verification.

The reference configuration (physical data equal to the construction's own
mean curvature) must produce exact zeros; flat profiles have closed forms
for every reported mass; generic runs are held to the structural
guarantees.  Artifact verification is tested both on healthy directories
and against targeted corruption of each artifact kind.
"""

import json
import math
import shutil

import numpy as np
import pytest

from kottler import (
    ConfigError,
    Grid,
    HypothesisViolation,
    config_hash,
    fourier_field,
    parse_config,
    run_pipeline,
    verify_artifacts,
)

TORUS_AREA = 4.0 * np.pi ** 2


def reference_config() -> dict:
    return {
        "grid_n": 8,
        "initial_height": {"constant": 0.1},
        "physical_mean_curvature": "reference",
        "flow": {"t_max": 1.0, "dt": 5e-3, "snapshot_stride": 10},
    }


def flat_config() -> dict:
    return {
        "grid_n": 8,
        "initial_height": {"constant": 0.0},
        "physical_mean_curvature": {"constant": 2.0 / 1.5},
        "flow": {"t_max": 5.0, "dt": 2e-3, "snapshot_stride": 50},
    }


def generic_config() -> dict:
    return {
        "grid_n": 16,
        "sigma": [[1.3, 0.2], [0.2, 0.8]],
        "initial_height": {"modes": [[1, 0, 0.0, 0.2], [0, 1, 0.1, 0.0]]},
        "physical_mean_curvature": {"scale": 0.95},
        "flow": {"t_max": 3.0, "dt": 2e-3, "snapshot_stride": 50},
    }


@pytest.fixture(scope="module")
def flat_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("flat")
    return run_pipeline(parse_config(flat_config()), out_dir=out), out


@pytest.fixture(scope="module")
def generic_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("generic")
    return run_pipeline(parse_config(generic_config()), out_dir=out), out


# -- field construction ----------------------------------------------------


def test_fourier_field_matches_direct_evaluation():
    grid = Grid.square(16)
    t1, t2 = grid.mesh
    field = fourier_field(grid, [[1, 0, 0.0, 0.2], [2, -1, 0.3, 0.0]])
    expected = 0.2 * np.sin(t1) + 0.3 * np.cos(2.0 * t1 - t2)
    assert np.max(np.abs(field - expected)) == 0.0


def test_fourier_field_rejects_bad_modes():
    grid = Grid.square(8)
    with pytest.raises(ConfigError, match="Nyquist"):
        fourier_field(grid, [[4, 0, 0.1, 0.0]])
    with pytest.raises(ConfigError, match="Nyquist"):
        fourier_field(grid, [[0, -4, 0.1, 0.0]])
    with pytest.raises(ConfigError, match="constant"):
        fourier_field(grid, [[0, 0, 0.1, 0.0]])
    with pytest.raises(ConfigError, match="modes\\[0\\]"):
        fourier_field(grid, [[1, 0, 0.1]])
    assert np.all(fourier_field(grid, [[3, 0, 0.1, 0.0]]) == 0.1 * np.cos(
        3.0 * grid.mesh[0]))


# -- configuration parsing ---------------------------------------------------


def test_parse_config_fills_canonical_defaults():
    cfg = parse_config({"grid_n": 8})
    canon = cfg.canonical
    assert canon["grid"] == [8, 8]
    assert canon["sigma"] == [[1.0, 0.0], [0.0, 1.0]]
    assert canon["initial_height"] == {"constant": 0.0, "modes": []}
    assert canon["physical_mean_curvature"] == "reference"
    assert canon["flow"] == {"t_max": 8.0, "dt": 1e-3, "snapshot_stride": 100}
    assert canon["extension"] == canon["flow"]


def test_config_hash_ignores_formatting_but_not_values():
    a = parse_config(generic_config())
    reordered = dict(reversed(list(generic_config().items())))
    b = parse_config(reordered)
    assert a.sha256 == b.sha256 == config_hash(a.canonical)
    changed = generic_config()
    changed["physical_mean_curvature"] = {"scale": 0.96}
    assert parse_config(changed).sha256 != a.sha256


def test_extension_block_defaults_to_flow_block():
    raw = {"grid_n": 8, "flow": {"t_max": 2.0, "dt": 4e-3,
                                 "snapshot_stride": 10}}
    cfg = parse_config(raw)
    assert cfg.ext_params.t_max == 2.0
    assert cfg.ext_params.dt == 4e-3
    raw["extension"] = {"t_max": 1.0}
    cfg = parse_config(raw)
    assert cfg.ext_params.t_max == 1.0
    assert cfg.ext_params.dt == 1e-3  # its own default, not the flow value


@pytest.mark.parametrize("raw, fragment", [
    ({"grid_n": 8, "bogus": 1}, "bogus"),
    ({"grid_n": 8, "flow": {"dt_max": 1}}, "config.flow"),
    ({"grid_n": 8, "initial_height": {"amplitude": 1}}, "config.initial_height"),
    ({}, "grid_n"),
    ({"grid_n": 8, "grid": [8, 8]}, "exactly one"),
    ({"grid": [8]}, "expected \\[n1, n2\\]"),
    ({"grid_n": 7}, "even"),
    ({"grid_n": 8, "sigma": [[1.0, 0.0]]}, "sigma"),
    ({"grid_n": 8, "sigma": [[1.0, 2.0], [2.0, 1.0]]}, "config.grid/sigma"),
    ({"grid_n": 8, "initial_height": {"modes": [[4, 0, 0.1, 0.0]]}}, "Nyquist"),
    ({"grid_n": 8, "physical_mean_curvature": "refrence"}, "unknown form"),
    ({"grid_n": 8, "physical_mean_curvature": {}}, "empty object"),
    ({"grid_n": 8, "physical_mean_curvature": {"scale": -1.0}}, "positive"),
    ({"grid_n": 8, "physical_mean_curvature": {"scale": 1.0, "modes": []}},
     "unknown key"),
    ({"grid_n": 8, "flow": {"t_max": 1.0, "snapshot_stride": 7}},
     "config.flow"),
    ({"grid_n": 8, "flow": {"t_max": "fast"}}, "expected a number"),
    ({"grid_n": True}, "expected an integer"),
])
def test_parse_config_names_offending_field(raw, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(raw)


# -- reference and flat oracles -----------------------------------------------


def test_reference_run_is_exactly_rigid(tmp_path):
    result = run_pipeline(parse_config(reference_config()), out_dir=tmp_path)
    assert result.mass.m_by_static == 0.0
    assert result.mass.m_total == 0.0
    assert result.mass.inequality_gap == 0.0
    assert np.all(result.mass.series[:, 1] == 0.0)
    assert np.all(result.limit.values == 0.0)


def test_flat_run_reproduces_closed_forms(flat_result):
    result, _ = flat_result
    w0 = 1.5
    m_by = (2.0 - 2.0 / 1.5) * TORUS_AREA / (8.0 * np.pi)
    m_total = (1.0 - w0 ** -2) * TORUS_AREA / (8.0 * np.pi)
    gap = (1.0 - 1.0 / w0) ** 2 * TORUS_AREA / (8.0 * np.pi)
    assert abs(result.mass.m_by_static - m_by) <= 1e-6
    assert abs(result.mass.m_total - m_total) <= 1e-6
    assert abs(result.mass.inequality_gap - gap) <= 1e-6
    assert result.mass.monotonicity_violation == 0.0
    assert result.curvature_residual["max"] <= 1e-3
    assert result.curvature_residual["t_spacing"] == pytest.approx(0.01)


def test_generic_run_meets_structural_guarantees(generic_result):
    result, _ = generic_result
    report = result.report
    assert -2.2 <= report["decay"]["slope_speed_excess"] <= -1.8
    assert -2.2 <= report["decay"]["slope_shape_deviation"] <= -1.8
    assert report["mass"]["gap"] >= -1e-6
    m0 = float(result.mass.series[0, 1])
    assert report["mass"]["monotonicity_violation"] <= 1e-8 * (1.0 + abs(m0))
    assert report["curvature_residual"]["max"] <= 1e-2
    assert math.isfinite(report["limit"]["error_estimate"])
    # limit extrapolation must use unit-scale snapshot gaps, not the fine
    # artifact cadence, so its error estimate stays commensurate
    assert report["limit"]["time"] == pytest.approx(3.0)
    budget = 5.0 * report["limit"]["error_estimate"]
    assert abs(float(result.mass.series[-1, 1]) - result.mass.m_total) <= budget


def test_persisted_artifact_set(generic_result):
    _, out = generic_result
    names = {p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file()}
    assert names == {"config.json", "report.json", "series.csv", "decay.csv",
                     "extension.csv", "fields/initial_height.csv",
                     "fields/height_offset.csv", "fields/lapse_limit.csv"}
    report = json.loads((out / "report.json").read_text())
    assert report["schema_version"] == 1
    assert report["mass"]["series"] == "series.csv"
    assert len(report["user_obligations"]) == 2


def test_field_dump_format(generic_result):
    _, out = generic_result
    lines = (out / "fields" / "initial_height.csv").read_text().splitlines()
    assert lines[0] == "theta1,theta2,value"
    assert len(lines) == 1 + 16 * 16
    # row-major: the second block of 16 rows starts at theta1 = 2 pi / 16
    first = lines[1].split(",")
    second_block = lines[1 + 16].split(",")
    assert float(first[0]) == 0.0
    assert float(second_block[0]) == pytest.approx(2.0 * np.pi / 16.0)
    # 17 significant digits round-trip exactly
    v = float(lines[1].split(",")[2])
    assert format(v, ".17g") == lines[1].split(",")[2]


def test_pipeline_is_deterministic(tmp_path):
    cfg = {"grid_n": 8, "initial_height": {"modes": [[1, 0, 0.0, 0.1]]},
           "physical_mean_curvature": {"scale": 0.9},
           "flow": {"t_max": 1.0, "dt": 5e-3, "snapshot_stride": 10}}
    run_pipeline(parse_config(cfg), out_dir=tmp_path / "a")
    run_pipeline(parse_config(cfg), out_dir=tmp_path / "b")
    for name in ["report.json", "series.csv", "decay.csv", "extension.csv",
                 "fields/initial_height.csv", "fields/height_offset.csv",
                 "fields/lapse_limit.csv"]:
        assert (tmp_path / "a" / name).read_bytes() \
            == (tmp_path / "b" / name).read_bytes(), name


# -- precondition ordering ----------------------------------------------------


def test_first_violated_hypothesis_is_named(tmp_path):
    raw = reference_config()
    raw["grid_n"] = 16
    raw["initial_height"] = {"modes": [[1, 0, 0.0, 1.5]]}
    raw["physical_mean_curvature"] = {"constant": -1.0}
    # admissibility is checked before the physical data, so the curvature
    # hypothesis wins even though H_phys is also bad
    with pytest.raises(HypothesisViolation, match="K > -1 fails at grid point"):
        run_pipeline(parse_config(raw))


def test_nonpositive_physical_curvature_is_named(tmp_path):
    raw = reference_config()
    raw["physical_mean_curvature"] = {"constant": 0.5, "modes": [[1, 0, 1.0, 0.0]]}
    with pytest.raises(HypothesisViolation,
                       match="H_phys > 0 fails at grid point"):
        run_pipeline(parse_config(raw))


# -- verification of stored artifacts ------------------------------------------


def _copy(src, tmp_path, name):
    dst = tmp_path / name
    shutil.copytree(src, dst)
    return dst


def _manifest_for(out_dir):
    outputs = sorted(p.relative_to(out_dir).as_posix()
                     for p in out_dir.rglob("*") if p.is_file())
    config = json.loads((out_dir / "config.json").read_text())
    return {"config_sha256": config_hash(config),
            "command": "kottler run --config cfg.json",
            "version": "0.1.0",
            "outputs": outputs + ["manifest.json"],
            "wall_time_s": 1.0}


@pytest.fixture(scope="module")
def verified_dir(generic_result, tmp_path_factory):
    """Generic artifacts plus a manifest, passing verification as-is."""
    _, out = generic_result
    base = tmp_path_factory.mktemp("verified") / "run"
    shutil.copytree(out, base)
    (base / "manifest.json").write_text(
        json.dumps(_manifest_for(base), sort_keys=True, indent=2) + "\n")
    assert verify_artifacts(base) == []
    return base


def test_verify_accepts_flat_run(flat_result, tmp_path):
    _, out = flat_result
    run = _copy(out, tmp_path, "run")
    (run / "manifest.json").write_text(
        json.dumps(_manifest_for(run), sort_keys=True, indent=2) + "\n")
    assert verify_artifacts(run) == []


def test_verify_requires_manifest(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    (run / "manifest.json").unlink()
    with pytest.raises(ConfigError, match="manifest not found"):
        verify_artifacts(run)


def test_verify_flags_missing_output(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    (run / "decay.csv").unlink()
    assert any("missing" in v and "decay.csv" in v for v in verify_artifacts(run))


def test_verify_flags_config_tampering(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    config = json.loads((run / "config.json").read_text())
    config["physical_mean_curvature"] = {"scale": 0.94}
    (run / "config.json").write_text(json.dumps(config))
    violations = verify_artifacts(run)
    assert any("hash" in v for v in violations)


def test_verify_flags_unknown_report_key(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    report = json.loads((run / "report.json").read_text())
    report["extra_conclusion"] = 1.0
    (run / "report.json").write_text(json.dumps(report))
    violations = verify_artifacts(run)
    assert any("unexpected key 'extra_conclusion'" in v for v in violations)
    assert any("never silently dropped" in v for v in violations)


def test_verify_flags_unparseable_series(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    text = (run / "series.csv").read_text()
    (run / "series.csv").write_text(text.replace(",", ",oops,", 1))
    assert any("series.csv" in v for v in verify_artifacts(run))


def test_verify_flags_broken_monotonicity(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    lines = (run / "series.csv").read_text().splitlines()
    t, m = lines[-1].split(",")
    lines[-1] = f"{t},{float(m) + 1.0}"
    (run / "series.csv").write_text("\n".join(lines) + "\n")
    violations = verify_artifacts(run)
    assert any("not monotone" in v for v in violations)


def test_verify_flags_barrier_breach(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    lines = (run / "extension.csv").read_text().splitlines()
    cells = lines[-1].split(",")
    cells[1] = format(float(cells[3]) - 1e-3, ".17g")  # w_min below barrier_low
    lines[-1] = ",".join(cells)
    (run / "extension.csv").write_text("\n".join(lines) + "\n")
    violations = verify_artifacts(run)
    assert any("barrier bracketing fails" in v for v in violations)


def test_verify_flags_tampered_limit_field(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    lines = (run / "fields" / "lapse_limit.csv").read_text().splitlines()
    cells = lines[1].split(",")
    cells[2] = format(float(cells[2]) + 0.5, ".17g")
    lines[1] = ",".join(cells)
    (run / "fields" / "lapse_limit.csv").write_text("\n".join(lines) + "\n")
    violations = verify_artifacts(run)
    assert any("lapse-limit field integrates" in v for v in violations)


def test_verify_flags_tampered_slope_label(verified_dir, tmp_path):
    run = _copy(verified_dir, tmp_path, "run")
    lines = (run / "decay.csv").read_text().splitlines()
    assert lines[0].startswith("# slope_speed_excess=")
    lines[0] = "# slope_speed_excess=-1.5"
    (run / "decay.csv").write_text("\n".join(lines) + "\n")
    violations = verify_artifacts(run)
    assert any("slope_speed_excess label disagrees" in v for v in violations)
