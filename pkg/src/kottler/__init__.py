"""Graph tori in a hyperbolic product model: geometry, flows, extensions, mass.

The ambient space is the product manifold R x T^2 carrying the constant-curvature
metric ds^2 + e^{2s} sigma for a flat 2x2 metric sigma on the torus.  The package
builds graph surfaces over the torus, flows them outward at unit normal speed,
solves the scalar-curvature lapse equation on the swept-out collar, and evaluates
the quasi-local and total mass functionals attached to that construction, together
with the explicit soliton counterexample and radial comparison solutions.
"""

from kottler.errors import ConfigError, HypothesisViolation, SolverFailure
from kottler.grid import FlatTorus, Grid
from kottler.geometry import (
    GraphSurface,
    SurfaceGeometry,
    AdmissibilityReport,
    surface_geometry,
    admissibility_check,
    static_identity_residual,
)
from kottler.flow import (
    FlowParams,
    FlowTrajectory,
    HeightOffset,
    DecayReport,
    run_flow,
    require_admissible,
    exact_shape_operator,
    extract_height_offset,
    decay_report,
    evaluate_flow_map,
    invert_flow_map,
    transported_shape_operator,
)
from kottler.extension import (
    ExtensionParams,
    ExtensionTrajectory,
    LapseLimit,
    AmbientExtension,
    solve_lapse,
    extract_lapse_limit,
    assemble_ambient_extension,
    scalar_curvature_residual,
)
from kottler.geon import (
    GeonBoundary,
    GeonConfig,
    GeonMass,
    GeonReport,
    GeonSweep,
    boundary_surface,
    boundary_torus,
    counterexample_report,
    geon_boundary_geometry,
    geon_static_mass,
    geon_sweep,
)
from kottler.radial import (
    RadialSolution,
    mass_integrand_diagnostic,
    penrose_constant,
    solve_radial,
)
from kottler.mass import (
    MassAspectFit,
    MassReport,
    build_mass_report,
    inequality_report,
    mass_aspect_from_expansion,
    penrose_bound,
    quasilocal_series,
    static_brown_york,
    total_mass_from_lapse_limit,
)
from kottler.pipeline import (
    PipelineConfig,
    PipelineResult,
    config_hash,
    fourier_field,
    load_config,
    parse_config,
    run_pipeline,
    verify_artifacts,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "HypothesisViolation",
    "SolverFailure",
    "FlatTorus",
    "Grid",
    "GraphSurface",
    "SurfaceGeometry",
    "AdmissibilityReport",
    "surface_geometry",
    "admissibility_check",
    "static_identity_residual",
    "FlowParams",
    "FlowTrajectory",
    "HeightOffset",
    "DecayReport",
    "run_flow",
    "require_admissible",
    "exact_shape_operator",
    "extract_height_offset",
    "decay_report",
    "evaluate_flow_map",
    "invert_flow_map",
    "transported_shape_operator",
    "ExtensionParams",
    "ExtensionTrajectory",
    "LapseLimit",
    "AmbientExtension",
    "solve_lapse",
    "extract_lapse_limit",
    "assemble_ambient_extension",
    "scalar_curvature_residual",
    "GeonBoundary",
    "GeonConfig",
    "GeonMass",
    "GeonReport",
    "GeonSweep",
    "boundary_surface",
    "boundary_torus",
    "counterexample_report",
    "geon_boundary_geometry",
    "geon_static_mass",
    "geon_sweep",
    "RadialSolution",
    "mass_integrand_diagnostic",
    "penrose_constant",
    "solve_radial",
    "MassAspectFit",
    "MassReport",
    "build_mass_report",
    "inequality_report",
    "mass_aspect_from_expansion",
    "penrose_bound",
    "quasilocal_series",
    "static_brown_york",
    "total_mass_from_lapse_limit",
    "PipelineConfig",
    "PipelineResult",
    "config_hash",
    "fourier_field",
    "load_config",
    "parse_config",
    "run_pipeline",
    "verify_artifacts",
    "__version__",
]
