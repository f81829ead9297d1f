"""Graph-surface geometry: fundamental forms, curvature, admissibility."""

import numpy as np
import pytest

from kottler.curvature import ricci_from_jets
from kottler.geometry import (
    GraphSurface,
    admissibility_check,
    intrinsic_gauss_curvature,
    static_identity_residual,
    surface_geometry,
)
from kottler.geometry import _ambient_jets
from kottler.grid import FlatTorus, Grid

from conftest import anisotropic_torus, random_smooth_field


def test_ambient_ricci_is_einstein():
    # The ambient metric has Ric = -2 g and scalar curvature -6 at every height.
    for s in (-1.5, 0.0, 0.7):
        g, dg, d2g = _ambient_jets(anisotropic_torus(), s)
        ric, scal = ricci_from_jets(g, dg, d2g)
        assert np.max(np.abs(ric + 2.0 * g)) < 1e-12
        assert abs(scal + 6.0) < 1e-12


def test_flat_slice_geometry():
    grid = Grid.square(16, anisotropic_torus())
    c = 0.3
    geom = surface_geometry(GraphSurface.constant(grid, c))
    e2c = np.exp(2 * c)
    assert np.max(np.abs(geom.rho - 1.0)) < 1e-14
    assert np.max(np.abs(geom.gamma - e2c * grid.torus.sigma[:, :, None, None])) < 1e-13
    assert np.max(np.abs(geom.second_form - geom.gamma)) < 1e-13
    assert np.max(np.abs(geom.mean_curvature - 2.0)) < 1e-12
    assert np.max(np.abs(geom.gauss_curvature)) < 1e-11
    assert np.max(np.abs(geom.area_density - e2c)) < 1e-13
    lo, hi = geom.shape_eigenvalues()
    assert np.max(np.abs(lo - 1.0)) < 1e-12
    assert np.max(np.abs(hi - 1.0)) < 1e-12
    # Area of the slice: e^{2c} times the reference torus area.
    assert geom.area() == pytest.approx(e2c * grid.torus.area, rel=1e-13)


def test_intrinsic_curvature_conformal_oracle():
    # For gamma = e^{2 phi} (identity), the Gauss curvature is -e^{-2 phi} Lap phi.
    grid = Grid.square(64)
    a, b = grid.mesh
    phi = 0.2 * np.sin(a) * np.cos(b) + 0.1 * np.cos(2 * a + b)
    e2p = np.exp(2 * phi)
    eye = np.eye(2)
    gamma = e2p * eye[:, :, None, None]
    gamma_inv = (1.0 / e2p) * eye[:, :, None, None]
    det = e2p * e2p
    k = intrinsic_gauss_curvature(grid, gamma, gamma_inv, det)
    hess = grid.hessian(phi)
    k_exact = -(hess[0, 0] + hess[1, 1]) / e2p
    assert np.max(np.abs(k - k_exact)) < 1e-9


def test_gauss_identity_two_routes(rng):
    # H^2 - |h|^2 = 2K + 2 ties the extrinsic forms to the intrinsic curvature.
    grid = Grid.square(64, anisotropic_torus())
    v = random_smooth_field(grid, rng, kmax=3, amp=0.15)
    geom = surface_geometry(GraphSurface(grid, v))
    lhs = geom.mean_curvature**2 - geom.second_form_norm2
    rhs = 2.0 * geom.gauss_curvature + 2.0
    assert np.max(np.abs(lhs - rhs)) < 1e-7


def test_det_gamma_closed_form(rng):
    grid = Grid.square(32, anisotropic_torus())
    v = random_smooth_field(grid, rng, kmax=2, amp=0.2)
    geom = surface_geometry(GraphSurface(grid, v))
    direct = (geom.gamma[0, 0] * geom.gamma[1, 1] - geom.gamma[0, 1] * geom.gamma[1, 0])
    assert np.max(np.abs(geom.det_gamma - direct)) < 1e-12
    prod = np.einsum("ikab,kjab->ijab", geom.gamma_inv, geom.gamma)
    assert np.max(np.abs(prod - np.eye(2)[:, :, None, None])) < 1e-12
    assert np.max(np.abs(geom.area_density
                         - np.sqrt(geom.det_gamma / grid.torus.det_sigma))) < 1e-12


def test_admissibility_generic_and_violated(rng):
    grid = Grid.square(32)
    v = random_smooth_field(grid, rng, kmax=2, amp=0.1)
    report = admissibility_check(surface_geometry(GraphSurface(grid, v)))
    assert report.admissible
    assert report.min_mean_curvature > 0

    steep = GraphSurface(grid, 5.0 * np.sin(grid.mesh[0]))
    bad = admissibility_check(surface_geometry(steep))
    assert not bad.second_form_positive
    assert not bad.admissible
    i, j = bad.worst_shape_point
    assert 0 <= i < 32 and 0 <= j < 32


def test_static_identity_residual_machine_zero():
    s_values = np.linspace(-2.0, 2.0, 9)
    assert static_identity_residual(anisotropic_torus(), s_values) < 1e-12
    assert static_identity_residual(FlatTorus.square(), s_values) < 1e-12


def test_resolution_check_resolved_field(rng):
    grid = Grid.square(32)
    v = random_smooth_field(grid, rng, kmax=3, amp=0.1)
    assert GraphSurface(grid, v).resolution_check() < 1e-6
