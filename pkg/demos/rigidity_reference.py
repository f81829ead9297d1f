"""Rigidity case: boundary data that exactly matches the reference embedding.

When the prescribed physical mean curvature equals the embedded mean
curvature, the lapse seed is identically one and the whole construction
collapses: the lapse stays pinned at one, every mass in the report is
exactly zero, and the inequality gap closes.  This is the expected
"nothing to prove" behaviour, and it holds to the bit, not to a tolerance.
"""

import numpy as np

from kottler import parse_config, run_pipeline

config = parse_config({
    "grid_n": 32,
    "initial_height": {"constant": 0.25},
    "physical_mean_curvature": "reference",
    "flow": {"t_max": 4.0, "dt": 2e-3, "snapshot_stride": 100},
})

result = run_pipeline(config)

print("rigidity run (matched curvature data)")
print(f"  static mass        : {result.mass.m_by_static!r}")
print(f"  total mass         : {result.mass.m_total!r}")
print(f"  inequality gap     : {result.mass.inequality_gap!r}")
print(f"  lapse drift        : {float(np.max(np.abs(result.extension.lapse_excess)))!r}")
print(f"  mass series range  : [{float(result.mass.series[:, 1].min())!r}, "
      f"{float(result.mass.series[:, 1].max())!r}]")

assert result.mass.m_by_static == 0.0
assert result.mass.m_total == 0.0
assert result.mass.inequality_gap == 0.0
assert np.all(result.extension.lapse_excess == 0.0)
print("all quantities are exactly zero, as rigidity demands")
