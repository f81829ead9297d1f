"""Tests for the closed-form soliton (geon) boundary data.

Everything here is closed form, so the oracles are direct substitutions
evaluated independently, plus the cross-module check that the quadrature
mass reproduces the algebraic mass on the embedded boundary.
"""

import numpy as np
import pytest

from kottler import (
    GeonConfig,
    boundary_surface,
    boundary_torus,
    counterexample_report,
    geon_boundary_geometry,
    geon_static_mass,
    geon_sweep,
    static_brown_york,
    surface_geometry,
)

P_XI = 4.0 * np.pi / 3.0
P_THETA = 2.0 * np.pi


def make_config(r_0: float, r_h: float = 1.0) -> GeonConfig:
    return GeonConfig(r_h=r_h, r_0=r_0, p_xi=P_XI, p_theta=P_THETA)


def test_config_validation():
    with pytest.raises(ValueError):
        GeonConfig(r_h=0.5, r_0=4.0, p_xi=P_XI, p_theta=P_THETA)
    with pytest.raises(ValueError):
        GeonConfig(r_h=2.0, r_0=2.0, p_xi=P_XI, p_theta=P_THETA)
    with pytest.raises(ValueError):
        GeonConfig(r_h=1.0, r_0=4.0, p_xi=-1.0, p_theta=P_THETA)
    with pytest.raises(ValueError):
        GeonConfig(r_h=1.0, r_0=4.0, p_xi=P_XI, p_theta=0.0)
    assert make_config(4.0).smooth_closure
    assert not GeonConfig(r_h=1.0, r_0=4.0, p_xi=2.0 * np.pi,
                          p_theta=P_THETA).smooth_closure
    assert make_config(4.0).homotopy_case
    assert not make_config(4.0, r_h=2.0).homotopy_case


def test_outer_mean_curvature_closed_form():
    boundary = geon_boundary_geometry(make_config(2.0))
    exact = (7.0 / 8.0) ** -0.5 * (31.0 / 16.0)
    assert abs(boundary.h_outer - exact) <= 1e-14
    assert abs(boundary.h_outer - 2.0712746248212893) <= 1e-12


def test_outer_mean_curvature_asymptotics():
    assert abs(geon_boundary_geometry(make_config(1e8)).h_outer - 2.0) \
        <= 1e-15
    for r0 in np.logspace(np.log10(1.01), 4.0, 25):
        assert geon_boundary_geometry(make_config(float(r0))).h_outer > 2.0


def test_outer_area_closed_form():
    boundary = geon_boundary_geometry(make_config(4.0))
    exact = 16.0 * np.sqrt(63.0 / 64.0) * P_XI * P_THETA
    assert abs(boundary.area_outer - exact) <= 1e-12 * exact
    # The embedded cross-section torus carries the same area density.
    torus = boundary_torus(make_config(4.0))
    assert abs(16.0 * torus.area - boundary.area_outer) <= 1e-12 * exact


def test_leading_mass_arithmetic():
    mass = geon_static_mass(make_config(4.0))
    assert abs(mass.m_leading + np.pi / 6.0) <= 1e-15
    assert mass.m_exact == mass.m_leading + mass.remainder


def test_mass_negative_across_radii():
    for r0 in (2.0, 4.0, 32.0, 1e3, 1e6):
        assert geon_static_mass(make_config(r0)).m_exact < 0.0


def test_remainder_matches_cubic_decay_coefficient():
    for r0 in (8.0, 32.0, 1e3):
        mass = geon_static_mass(make_config(r0))
        predicted = -P_XI * P_THETA / (32.0 * np.pi) * r0 ** -3
        assert abs(mass.remainder / predicted - 1.0) <= 1e-3


def test_sweep_slope_and_hypotheses():
    sweep = geon_sweep([4.0, 8.0, 16.0, 32.0], P_XI, P_THETA)
    assert -3.1 <= sweep.remainder_slope <= -2.9
    assert np.all(sweep.mass < 0.0)
    assert np.all(sweep.h_boundary > 2.0)
    assert np.all(sweep.mass_leading == sweep.mass_leading[0])


def test_sweep_validation():
    with pytest.raises(ValueError):
        geon_sweep([4.0], P_XI, P_THETA)
    with pytest.raises(ValueError):
        geon_sweep([8.0, 4.0], P_XI, P_THETA)
    with pytest.raises(ValueError):
        geon_sweep([0.5, 4.0], P_XI, P_THETA)


def test_horizon_guard_and_homotopy_case():
    boundary = geon_boundary_geometry(make_config(4.0, r_h=1.0))
    assert boundary.horizon_inner
    assert boundary.h_inner_outward == 1.5
    report = counterexample_report(make_config(4.0, r_h=1.0))
    assert report.homotopy_case
    assert not report.trapping_violated


def test_trapping_violation_case():
    report = counterexample_report(make_config(100.0, r_h=2.0))
    assert report.mass_negative
    assert report.trapping_violated
    assert not report.homotopy_case
    assert report.h_inner_inward == -report.h_inner_outward
    assert report.h_inner_outward > 2.0


def test_inner_curvature_is_continuous_up_to_the_boundary():
    r0 = 4.0
    near = geon_boundary_geometry(make_config(r0, r_h=r0 * (1.0 - 1e-6)))
    assert abs(near.h_inner_outward - near.h_outer) <= 1e-5


def test_cross_module_quadrature_matches_closed_form():
    for r0 in (4.0, 8.0):
        cfg = make_config(r0)
        boundary = geon_boundary_geometry(cfg)
        geom = surface_geometry(boundary_surface(cfg, n=8))
        quadrature = static_brown_york(geom, boundary.h_outer)
        assert abs(quadrature - geon_static_mass(cfg).m_exact) <= 1e-10