"""A generic run end to end: artifacts on disk, then verified from disk.

Genuinely varying boundary data exercises the full machinery: admissibility
checks, the outward flow with its decay diagnostics, the lapse solve with
its comparison barriers, and the mass report.  This script drives the same
entry points as the `kottler` command: `run` persists a manifest plus all
artifacts, and `verify` replays every invariant against the stored files.
"""

import json
import tempfile
from pathlib import Path

from kottler.cli import main

config = {
    "grid_n": 32,
    "sigma": [[1.3, 0.2], [0.2, 0.8]],
    "initial_height": {"modes": [[1, 0, 0.0, 0.2], [0, 1, 0.1, 0.0]]},
    "physical_mean_curvature": {"scale": 0.9},
    "flow": {"t_max": 6.0, "dt": 2e-3, "snapshot_stride": 100},
}

workdir = Path(tempfile.mkdtemp(prefix="kottler-demo-"))
config_path = workdir / "config.json"
config_path.write_text(json.dumps(config, indent=2))
out = workdir / "run"

code = main(["run", "--config", str(config_path), "--out", str(out)])
assert code == 0, f"run exited with {code}"

manifest = json.loads((out / "manifest.json").read_text())
print(f"\nartifacts in {out}:")
for name in manifest["outputs"]:
    print(f"  {name}  ({(out / name).stat().st_size} bytes)")

report = json.loads((out / "report.json").read_text())
print("\nrun summary")
print(f"  decay exponents    : {report['decay']['slope_speed_excess']:.4f}, "
      f"{report['decay']['slope_shape_deviation']:.4f}  (expected near -2)")
print(f"  static mass        : {report['mass']['m_by_static']:.8f}")
print(f"  total mass         : {report['mass']['m_total']:.8f}")
print(f"  inequality gap     : {report['mass']['gap']:.3e}  (must be >= -1e-6)")
print(f"  monotonicity breach: {report['mass']['monotonicity_violation']:.1e}")
print(f"  curvature residual : {report['curvature_residual']['max']:.2e}")

print("\nreplaying invariants from the stored files:")
code = main(["verify", "--out", str(out)])
assert code == 0, f"verify exited with {code}"
print("stored artifacts replay cleanly")
