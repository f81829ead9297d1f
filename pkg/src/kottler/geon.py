"""Closed-form boundary data of the toroidal static soliton (the geon).

The soliton metric on [r_h, r_0] x T^2 is

    g = r^{-2} (1 - r^{-3})^{-1} dr^2 + r^2 (1 - r^{-3}) dxi^2 + r^2 dtheta^2,

with xi and theta of periods P_xi and P_theta.  When P_xi = 4 pi / 3 the
metric closes smoothly at r = 1 (no inner boundary), giving the geon proper.
Its outer boundary {r = r_0} embeds isometrically into the reference product
manifold once the flat cross-section metric absorbs the periods, which makes
every quantity here a closed form: the boundary geometry, the static
Brown-York mass against that embedding, the large-r_0 asymptotics of the
mass, and the inner-boundary mean curvature that breaks the trapping
hypothesis of the positivity theorem.  The module doubles as a golden-value
oracle for the quadrature-based mass functions.

All functions are pure closed forms; no discretization is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FlatTorus

__all__ = [
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
]

SMOOTH_CLOSURE_PERIOD = 4.0 * np.pi / 3.0


@dataclass(frozen=True)
class GeonConfig:
    """Radii and torus periods of the soliton region [r_h, r_0] x T^2.

    r_h >= 1 is the inner radius (r_h = 1 is the horizon/closure case),
    r_0 > r_h the outer radius, p_xi and p_theta the coordinate periods.
    Smooth closure at r = 1 requires p_xi = 4 pi / 3; that is flagged by
    ``smooth_closure`` but not enforced.
    """

    r_h: float
    r_0: float
    p_xi: float
    p_theta: float

    def __post_init__(self):
        if not np.isfinite([self.r_h, self.r_0, self.p_xi,
                            self.p_theta]).all():
            raise ValueError("geon configuration must be finite")
        if self.r_h < 1.0:
            raise ValueError("inner radius must be at least 1")
        if self.r_0 <= self.r_h:
            raise ValueError("outer radius must exceed the inner radius")
        if self.p_xi <= 0.0 or self.p_theta <= 0.0:
            raise ValueError("periods must be positive")

    @property
    def smooth_closure(self) -> bool:
        """True when the xi-period admits a smooth closure at r = 1."""
        return abs(self.p_xi - SMOOTH_CLOSURE_PERIOD) \
            <= 1e-12 * SMOOTH_CLOSURE_PERIOD

    @property
    def homotopy_case(self) -> bool:
        """True when the inner boundary degenerates (r_h = 1)."""
        return self.r_h == 1.0


def _mean_curvature(r: float) -> tuple[float, bool]:
    """Mean curvature of {r = const} toward increasing r, with horizon flag.

    The closed form is (2 - r^{-3}/2) / sqrt(1 - r^{-3}); at r = 1 the
    square-root factor vanishes and only the regular factor 3/2 is returned,
    flagged as the horizon case.
    """
    x = r ** -3
    one_minus = 1.0 - x
    if one_minus <= 0.0:
        return 2.0 - 0.5 * x, True
    return (2.0 - 0.5 * x) / np.sqrt(one_minus), False


@dataclass(frozen=True)
class GeonBoundary:
    """Closed-form boundary geometry of the soliton region.

    h_inner_outward is the mean curvature of {r = r_h} with respect to the
    normal pointing toward increasing r; h_inner_inward flips the normal.
    horizon_inner marks the degenerate r_h = 1 case, where the singular
    square-root factor is dropped and the regular factor reported.
    """

    potential: float
    h_outer: float
    h_inner_outward: float
    h_inner_inward: float
    area_outer: float
    horizon_inner: bool


def geon_boundary_geometry(cfg: GeonConfig) -> GeonBoundary:
    """Potential, mean curvatures, and outer area of the soliton boundary."""
    h_outer, _ = _mean_curvature(cfg.r_0)
    h_inner, horizon = _mean_curvature(cfg.r_h)
    area = cfg.r_0 ** 2 * np.sqrt(1.0 - cfg.r_0 ** -3) \
        * cfg.p_xi * cfg.p_theta
    return GeonBoundary(potential=cfg.r_0, h_outer=h_outer,
                        h_inner_outward=h_inner, h_inner_inward=-h_inner,
                        area_outer=area, horizon_inner=horizon)


@dataclass(frozen=True)
class GeonMass:
    """Static Brown-York mass of the outer boundary and its asymptotics.

    m_exact is the closed-form mass, m_leading its large-r_0 limit
    -p_xi p_theta / (16 pi), and remainder = m_exact - m_leading, which
    decays like r_0^{-3}.
    """

    m_exact: float
    m_leading: float
    remainder: float


def geon_static_mass(cfg: GeonConfig) -> GeonMass:
    """Closed-form static Brown-York mass of {r = r_0}.

    The quadrature (1 / 8 pi) * V (H_0 - H) * area collapses algebraically:
    with x = r_0^{-3} and s = sqrt(1 - x),

        m_exact = (P_xi P_theta / 8 pi) * (1/2 - 2 / (1 + s)),
        remainder = m_exact + P_xi P_theta / (16 pi)
                  = -(P_xi P_theta / 8 pi) * x / (1 + s)^2.

    Both forms are free of the catastrophic cancellation that evaluating
    2 - H directly would incur once x drops below machine precision (for
    r_0 around 10^6 the naive form returns exactly zero).
    """
    scale = cfg.p_xi * cfg.p_theta / (8.0 * np.pi)
    x = cfg.r_0 ** -3
    s = np.sqrt(1.0 - x)
    m_leading = -0.5 * scale
    remainder = -scale * x / (1.0 + s) ** 2
    return GeonMass(m_exact=m_leading + remainder, m_leading=m_leading,
                    remainder=remainder)


@dataclass(frozen=True)
class GeonReport:
    """Why negative boundary mass does not contradict the positivity theorem.

    Exactly one escape hatch must be open on any configuration with
    mass_negative: either the inner boundary fails the trapping condition
    (its mean curvature toward increasing r exceeds 2), or the region has
    no inner boundary at all (homotopy_case) and fails the homotopy
    hypothesis instead.
    """

    mass_negative: bool
    trapping_violated: bool
    homotopy_case: bool
    m_exact: float
    h_inner_outward: float
    h_inner_inward: float


def counterexample_report(cfg: GeonConfig) -> GeonReport:
    """Evaluate the negative-mass example and the hypothesis it violates."""
    boundary = geon_boundary_geometry(cfg)
    mass = geon_static_mass(cfg)
    trapping = (not boundary.horizon_inner) \
        and boundary.h_inner_outward > 2.0
    return GeonReport(mass_negative=mass.m_exact < 0.0,
                      trapping_violated=trapping,
                      homotopy_case=cfg.homotopy_case,
                      m_exact=mass.m_exact,
                      h_inner_outward=boundary.h_inner_outward,
                      h_inner_inward=boundary.h_inner_inward)


@dataclass(frozen=True)
class GeonSweep:
    """Mass asymptotics over a sweep of outer radii.

    Arrays are aligned with r_0; remainder_slope is the log-log slope of
    |remainder| against r_0 and sits near -3.
    """

    r_0: np.ndarray
    mass: np.ndarray
    mass_leading: np.ndarray
    remainder: np.ndarray
    h_boundary: np.ndarray
    remainder_slope: float


def geon_sweep(r0_values, p_xi: float, p_theta: float) -> GeonSweep:
    """Evaluate the closed-form mass over several outer radii and fit decay.

    Requires at least two radii, all > 1 and strictly increasing.
    """
    r0 = np.asarray(r0_values, dtype=float)
    if r0.ndim != 1 or r0.size < 2:
        raise ValueError("need at least two radii for a sweep")
    if np.any(r0 <= 1.0) or np.any(np.diff(r0) <= 0.0):
        raise ValueError("radii must be strictly increasing and exceed 1")
    mass = np.empty_like(r0)
    leading = np.empty_like(r0)
    remainder = np.empty_like(r0)
    h_boundary = np.empty_like(r0)
    for k, r in enumerate(r0):
        cfg = GeonConfig(r_h=1.0, r_0=float(r), p_xi=p_xi, p_theta=p_theta)
        m = geon_static_mass(cfg)
        mass[k] = m.m_exact
        leading[k] = m.m_leading
        remainder[k] = m.remainder
        h_boundary[k], _ = _mean_curvature(float(r))
    slope = float(np.polyfit(np.log(r0), np.log(np.abs(remainder)), 1)[0])
    return GeonSweep(r_0=r0, mass=mass, mass_leading=leading,
                     remainder=remainder, h_boundary=h_boundary,
                     remainder_slope=slope)


def boundary_torus(cfg: GeonConfig) -> FlatTorus:
    """Flat cross-section metric that embeds the outer boundary.

    In the 2 pi-periodic chart the physical periods and the xi-direction
    suppression factor are absorbed into the constant metric:

        sigma = diag((P_xi / 2 pi)^2 (1 - r_0^{-3}), (P_theta / 2 pi)^2).
    """
    two_pi = 2.0 * np.pi
    sigma = np.diag([
        (cfg.p_xi / two_pi) ** 2 * (1.0 - cfg.r_0 ** -3),
        (cfg.p_theta / two_pi) ** 2,
    ])
    return FlatTorus(sigma)


def boundary_surface(cfg: GeonConfig, n: int = 16):
    """The outer boundary as a constant graph over its cross-section torus.

    Returns a GraphSurface at height log(r_0) on an n x n grid carrying
    ``boundary_torus(cfg)``, ready for the quadrature-based mass functions.
    """
    from .geometry import GraphSurface
    from .grid import Grid

    grid = Grid.square(n, boundary_torus(cfg))
    return GraphSurface(grid, np.full(grid.shape, np.log(cfg.r_0)))
