"""Mass functionals for graph surfaces and their asymptotic extensions.

This module collects every scalar mass-type quantity the package computes:

* the static Brown-York mass of a boundary surface against the reference
  embedding,
* the quasilocal mass series evaluated along a flow together with its lapse
  extension (nonincreasing in time on admissible runs),
* the total mass of the ambient extension, read off the lapse limit,
* the mass aspect recovered from metric samples at several radii,
* the gap of the comparison inequality between the initial quasilocal mass
  and the total mass, and
* the area-based lower bound evaluator.

All masses are dimensionless in the unit-curvature-scale normalization; no
unit conversion is offered.  Everything here is a pure function over
immutable trajectory data and is safe to call from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extension import ExtensionTrajectory, LapseLimit
from .flow import FlowTrajectory
from .geometry import GraphSurface, SurfaceGeometry, surface_geometry
from .grid import FlatTorus

__all__ = [
    "MassAspectFit",
    "MassReport",
    "build_mass_report",
    "inequality_report",
    "mass_aspect_from_expansion",
    "penrose_bound",
    "quasilocal_series",
    "static_brown_york",
    "total_mass_from_lapse_limit",
]

_EIGHT_PI = 8.0 * np.pi


def _as_positive_field(grid, values, name: str) -> np.ndarray:
    field = np.asarray(values, dtype=float)
    if field.ndim == 0:
        field = np.full(grid.shape, float(field))
    else:
        field = grid.check_field(field)
    if not np.all(np.isfinite(field)):
        raise ValueError(f"{name} must be finite everywhere")
    if np.any(field <= 0.0):
        raise ValueError(f"{name} must be positive everywhere")
    return field


def static_brown_york(geom: SurfaceGeometry,
                      physical_mean_curvature) -> float:
    """Static Brown-York mass of the surface described by ``geom``.

    ``geom`` supplies the reference data: the potential V, the reference
    mean curvature H0 and the area density.  ``physical_mean_curvature`` is
    the mean curvature the same surface has inside the physical manifold
    (scalar or field); it must be positive.  Returns

        (1 / 8 pi) * integral of V (H0 - H_phys) dA.
    """
    grid = geom.surface.grid
    h_phys = _as_positive_field(grid, physical_mean_curvature,
                                "physical mean curvature")
    integrand = geom.potential * (geom.mean_curvature - h_phys) \
        * geom.area_density
    scale = np.sqrt(grid.torus.det_sigma) / _EIGHT_PI
    return float(grid.integrate(integrand) * scale)


def quasilocal_series(flow: FlowTrajectory,
                      ext: ExtensionTrajectory) -> np.ndarray:
    """Quasilocal mass along the flow: rows ``(t, m(t))`` per snapshot.

    The quantity is (1 / 8 pi) * integral of V (H - H_ext) dA over the
    time-t surface, where H is its mean curvature in the reference ambient
    and H_ext = H / w the mean curvature induced by the extension metric.
    It is nonincreasing in t on admissible runs and converges to the total
    mass of the extension.

    Writing the height as u + t and using the stored scaled lapse gap
    z = e^{3t} (w - 1), the integrand equals

        e^{3u} * z * rho * H / w * sqrt(det sigma),

    which stays fully accurate at late times when w - 1 has decayed to the
    rounding floor of w itself.
    """
    grid = ext.grid
    if (grid.n1, grid.n2) != (flow.grid.n1, flow.grid.n2) or \
            not np.array_equal(grid.torus.sigma, flow.grid.torus.sigma):
        raise ValueError("flow and extension live on different grids")
    if ext.times[0] != flow.times[0] or \
            not np.array_equal(ext.offsets[0], flow.offsets[0]):
        raise ValueError(
            "extension was not started from this flow's initial surface")

    scale = np.sqrt(grid.torus.det_sigma) / _EIGHT_PI
    out = np.empty((len(ext.times), 2), dtype=float)
    for k, t in enumerate(ext.times):
        u = ext.offsets[k]
        z = ext.scaled_gap[k]
        w = 1.0 + ext.lapse_excess[k]
        geom_t = surface_geometry(GraphSurface(grid, u + t))
        integrand = np.exp(3.0 * u) * z * geom_t.rho \
            * geom_t.mean_curvature / w
        out[k, 0] = t
        out[k, 1] = grid.integrate(integrand) * scale
    return out


def total_mass_from_lapse_limit(limit, torus: FlatTorus) -> float:
    """Total mass of the ambient extension from the lapse limit field.

    ``limit`` is the extracted lapse limit (or a bare field of its values);
    the total mass is (1 / 4 pi) * integral of the limit over the torus
    cross-section with its flat area element.
    """
    values = limit.values if isinstance(limit, LapseLimit) else \
        np.asarray(limit, dtype=float)
    return float(np.mean(values) * torus.area / (4.0 * np.pi))


@dataclass(frozen=True)
class MassAspectFit:
    """Mass aspect recovered from metric samples at several radii.

    trace is the pointwise trace (against sigma) of three times the decaying
    metric coefficient; mass is its flat-torus average divided by 16 pi.
    residual reports the largest least-squares misfit (it absorbs the
    higher-order remainder of the expansion), and condition the condition
    number of the normalized design matrix.
    """

    trace: np.ndarray
    mass: float
    residual: float
    condition: float


def mass_aspect_from_expansion(radii, metrics,
                               torus: FlatTorus) -> MassAspectFit:
    """Fit the mass aspect from angular metric samples at several radii.

    The samples are assumed to follow the expansion

        g(r) = e^{2r} sigma_hat + e^{-r} m + (remainder),

    componentwise in the angular block.  ``radii`` is an increasing array of
    at least three radii; ``metrics`` has shape (R, 2, 2) for constant
    samples or (R, 2, 2, n1, n2) for fields.  Rows are weighted by e^{-2r}
    (equivalently, e^{-2r} g(r) is fitted against the basis {1, e^{-3r}}),
    so the fit is scale-balanced across radii.  Returns the trace field
    Tr_sigma(3 m) and the total mass (1 / 16 pi) * integral of that trace.

    Raises ValueError when fewer than three radii are given or when the
    radii are so close that the fit is ill-conditioned.
    """
    r = np.asarray(radii, dtype=float)
    g = np.asarray(metrics, dtype=float)
    if r.ndim != 1 or r.size < 3:
        raise ValueError("need at least three radii to fit the mass aspect")
    if np.any(np.diff(r) <= 0.0):
        raise ValueError("radii must be strictly increasing")
    if g.shape[:3] != (r.size, 2, 2):
        raise ValueError("metrics must have shape (len(radii), 2, 2, ...)")

    # Row weight e^{-2r}: fit y = e^{-2r} g(r) against {1, e^{-3(r - r0)}}.
    # The shifted exponent keeps both columns O(1) so the condition number
    # reflects the spacing of the radii, not their overall magnitude.
    x = np.exp(-3.0 * (r - r[0]))
    design = np.stack([np.ones_like(x), x], axis=1)
    condition = float(np.linalg.cond(design))
    if condition > 100.0:
        raise ValueError(
            f"radii too closely spaced for a stable mass-aspect fit "
            f"(condition number {condition:.2e})")

    y = np.exp(-2.0 * r).reshape((-1,) + (1,) * (g.ndim - 1)) * g
    rhs = y.reshape(r.size, -1)
    coeffs, _, _, _ = np.linalg.lstsq(design, rhs, rcond=None)
    residual = float(np.max(np.abs(design @ coeffs - rhs)))
    m_field = (coeffs[1] * np.exp(3.0 * r[0])).reshape(g.shape[1:])

    sigma_inv = np.linalg.inv(torus.sigma)
    trace = 3.0 * np.einsum("ij,ij...->...", sigma_inv, m_field)
    mass = float(np.mean(trace) * torus.area / (16.0 * np.pi))
    return MassAspectFit(trace=trace, mass=mass, residual=residual,
                         condition=condition)


def inequality_report(geom: SurfaceGeometry, physical_mean_curvature,
                      w0, m_total: float) -> float:
    """Gap of the mass comparison inequality; nonnegative on admissible runs.

    The left-hand side is (1 / 8 pi) * integral of V H0 (1 - 1/w0) dA over
    the initial surface, where w0 must equal the pointwise ratio of the
    reference mean curvature to the physical one (the corner-matching
    choice of initial lapse).  Returns LHS - m_total.
    """
    grid = geom.surface.grid
    h_phys = _as_positive_field(grid, physical_mean_curvature,
                                "physical mean curvature")
    w0_field = _as_positive_field(grid, w0, "w0")
    scale_h = float(np.max(np.abs(geom.mean_curvature)))
    mismatch = float(np.max(np.abs(w0_field * h_phys - geom.mean_curvature)))
    if mismatch > 1e-8 * scale_h:
        raise ValueError(
            "w0 must equal reference mean curvature / physical mean "
            f"curvature pointwise (max mismatch {mismatch:.3e})")
    integrand = geom.potential * geom.mean_curvature \
        * ((w0_field - 1.0) / w0_field) * geom.area_density
    lhs = float(grid.integrate(integrand)
                * np.sqrt(grid.torus.det_sigma) / _EIGHT_PI)
    return lhs - float(m_total)


def penrose_bound(constant: float, area: float) -> float:
    """Area-based mass lower bound: constant * area / (16 pi).

    ``constant`` is the gradient constant produced by the radial solver
    (nonnegative; zero gives the degenerate bound), ``area`` the horizon
    cross-section area (positive).
    """
    constant = float(constant)
    area = float(area)
    if constant < 0.0:
        raise ValueError("bound constant must be nonnegative")
    if area <= 0.0:
        raise ValueError("area must be positive")
    return constant * area / (16.0 * np.pi)


@dataclass(frozen=True)
class MassReport:
    """All mass functionals of one run, bundled for reporting.

    series has rows (t, quasilocal mass).  monotonicity_violation is the
    largest positive forward difference of the series (zero when the series
    is nonincreasing); inequality_gap is LHS - m_total of the comparison
    inequality and should be nonnegative up to run tolerances.
    """

    m_by_static: float
    series: np.ndarray
    m_total: float
    inequality_gap: float
    monotonicity_violation: float

    def within_tolerance(self, tol: float = 1e-6) -> bool:
        """True when the inequality gap and monotonicity hold up to tol."""
        return (self.inequality_gap >= -tol
                and self.monotonicity_violation <= tol)


def build_mass_report(geom: SurfaceGeometry, physical_mean_curvature, w0,
                      flow: FlowTrajectory, ext: ExtensionTrajectory,
                      limit: LapseLimit) -> MassReport:
    """Assemble the full mass report for one matched flow/extension run."""
    series = quasilocal_series(flow, ext)
    m_total = total_mass_from_lapse_limit(limit, ext.grid.torus)
    gap = inequality_report(geom, physical_mean_curvature, w0, m_total)
    diffs = np.diff(series[:, 1])
    violation = float(max(0.0, diffs.max())) if diffs.size else 0.0
    return MassReport(
        m_by_static=static_brown_york(geom, physical_mean_curvature),
        series=series,
        m_total=m_total,
        inequality_gap=gap,
        monotonicity_violation=violation,
    )
