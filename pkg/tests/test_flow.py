"""Outward flow: exact special cases, decay diagnostics, flow-map transport."""

import numpy as np
import pytest

from kottler.errors import HypothesisViolation
from kottler.flow import (
    FlowParams,
    decay_report,
    evaluate_flow_map,
    exact_shape_operator,
    extract_height_offset,
    flow_map_jacobian,
    invert_flow_map,
    run_flow,
    transported_shape_operator,
)
from kottler.geometry import GraphSurface, surface_geometry
from kottler.grid import FlatTorus, Grid

from conftest import anisotropic_torus, random_smooth_field


def test_params_validation():
    FlowParams(t_max=1.0, dt=0.01, snapshot_stride=10)
    with pytest.raises(ValueError):
        FlowParams(t_max=1.0, dt=0.01, snapshot_stride=5)       # odd stride
    with pytest.raises(ValueError):
        FlowParams(t_max=1.0, dt=0.1, snapshot_stride=2)        # dt too large
    with pytest.raises(ValueError):
        FlowParams(t_max=1.0, dt=0.01, snapshot_stride=36)      # stride does not divide
    with pytest.raises(ValueError):
        FlowParams(t_max=1.05, dt=0.02, snapshot_stride=2)      # t_max not a multiple


def test_flat_slice_is_exact_fixed_point():
    # A flat slice moves outward at exactly unit speed: v(t) = c + t to the bit,
    # and the flow map never leaves the identity.
    grid = Grid.square(16, anisotropic_torus())
    surface = GraphSurface.constant(grid, 0.3)
    traj = run_flow(surface, FlowParams(t_max=1.0, dt=0.01, snapshot_stride=20))
    assert np.all(traj.offsets == 0.3)
    assert np.all(traj.flow_maps == np.stack(grid.mesh))
    assert np.all(traj.speed_excess == 0.0)
    assert np.max(np.abs(traj.heights[-1] - (0.3 + traj.times[-1]))) == 0.0
    report = decay_report(traj)
    assert np.isnan(report.slope_speed_excess)
    assert report.speed_at_floor and report.shape_at_floor
    assert report.bound_excess <= 0.0


def test_initial_hypothesis_violation_names_grid_point():
    grid = Grid.square(32)
    steep = GraphSurface(grid, 5.0 * np.sin(grid.mesh[0]))
    with pytest.raises(HypothesisViolation, match=r"fails at grid point \(\d+,\d+\)"):
        run_flow(steep, FlowParams(t_max=0.1, dt=0.01, snapshot_stride=2))


@pytest.fixture(scope="module")
def sine_trajectory():
    # Canonical single-mode data; its extrema lie exactly on grid points.
    grid = Grid.square(32)
    v0 = 0.2 * np.sin(grid.mesh[0])
    params = FlowParams(t_max=4.0, dt=0.005, snapshot_stride=80)
    return run_flow(GraphSurface(grid, v0), params)


@pytest.fixture(scope="module")
def generic_trajectory():
    grid = Grid.square(32, anisotropic_torus())
    rng = np.random.default_rng(7)
    v0 = random_smooth_field(grid, rng, kmax=2, amp=0.12)
    params = FlowParams(t_max=4.0, dt=0.005, snapshot_stride=80)
    return run_flow(GraphSurface(grid, v0), params)


def test_monotone_bounds_on_grid_extrema(sine_trajectory):
    # With the extrema on grid points the sampled bounds hold at solver accuracy.
    traj = sine_trajectory
    assert np.all(traj.v_min - traj.v_min[0] >= -1e-10)
    assert np.all(np.diff(traj.v_min) >= -1e-10)
    assert np.all(traj.v_max - (traj.v_max[0] + traj.times) <= 1e-10)


def test_monotone_bounds_generic(generic_trajectory):
    # For generic data the continuum extrema fall between grid points, so the
    # sampled max can overtake v_max(0) + t by the sampling gap (≈ h^2-small),
    # never by more.
    traj = generic_trajectory
    assert np.all(np.diff(traj.v_min) >= -1e-10)
    assert np.all(traj.v_max - (traj.v_max[0] + traj.times) <= 1e-4)


def test_speed_excess_decay_bound(generic_trajectory):
    # max(rho^2 - 1)(t) <= max(rho^2 - 1)(0) e^{-2t} up to integration error.
    report = decay_report(generic_trajectory)
    assert report.bound_excess <= 1e-10
    assert -2.3 < report.slope_speed_excess < -1.7
    assert -2.3 < report.slope_shape_deviation < -1.7
    assert not report.speed_at_floor


def test_second_form_stays_positive(generic_trajectory):
    assert np.all(generic_trajectory.shape_eig_min > 0)


def test_height_offset_converges(sine_trajectory):
    traj = sine_trajectory
    offset = extract_height_offset(traj)
    assert offset.time == pytest.approx(4.0)
    assert offset.midpoint_time == pytest.approx(2.0)
    # The tail rate is e^{-2t}: the raw estimate is at the e^{-4} scale and the
    # fitted improvement must sit well inside it.
    assert 1e-8 < offset.error_estimate < 1e-1
    assert offset.richardson_error < 0.05 * offset.error_estimate
    # Richardson moves the profile forward (offsets increase monotonically).
    assert np.all(offset.richardson >= offset.values - 1e-12)


def test_flow_map_round_trip(generic_trajectory):
    traj = generic_trajectory
    k = traj.n_snapshots - 1
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.0, 2.0 * np.pi, size=(2, 40))
    labels = invert_flow_map(traj, k, pts)
    back = evaluate_flow_map(traj, k, labels)
    assert np.max(np.abs(back - pts)) < 1e-10
    jac = flow_map_jacobian(traj, k, pts)
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    assert np.all(det > 0.5)
    assert np.all(traj.jacobian_min > 0.5)
    assert np.all(traj.jacobian_max < 2.0)


def test_exact_shape_operator_closed_form():
    # Eigenvalue 2 evolves as 1 + 2q/(3 - q) = (3 + q)/(3 - q), q = e^{-2t},
    # and eigenvalue 1/2 as (3 - q)/(3 + q); both are the scalar Riccati flows.
    s0 = np.zeros((2, 2, 3))
    s0[0, 0] = 2.0
    s0[1, 1] = 0.5
    for t in (0.0, 0.4, 1.7):
        q = np.exp(-2.0 * t)
        s = exact_shape_operator(s0, t)
        assert np.max(np.abs(s[0, 0] - (3.0 + q) / (3.0 - q))) < 1e-14
        assert np.max(np.abs(s[1, 1] - (3.0 - q) / (3.0 + q))) < 1e-14
        assert np.max(np.abs(s[0, 1])) < 1e-15
    # Identity is the fixed point.
    eye = np.broadcast_to(np.eye(2)[:, :, None], (2, 2, 5)).copy()
    assert np.max(np.abs(exact_shape_operator(eye, 2.0) - eye)) < 1e-15


def test_exact_shape_operator_against_rk4():
    # Independent check: integrate dS/dt = I - S^2 directly.
    s = np.diag([2.0, 0.5])
    eye = np.eye(2)
    dt = 1e-3

    def rate(m):
        return eye - m @ m

    for _ in range(1000):
        k1 = rate(s)
        k2 = rate(s + 0.5 * dt * k1)
        k3 = rate(s + 0.5 * dt * k2)
        k4 = rate(s + dt * k3)
        s = s + dt * ((k1 + 2 * k2 + 2 * k3 + k4) / 6.0)
    exact = exact_shape_operator(np.diag([2.0, 0.5]), 1.0)
    assert np.max(np.abs(s - exact)) < 1e-10


def test_exact_shape_operator_satisfies_riccati(rng):
    # Central-difference dS/dt against I - S^2 for a random non-symmetric start.
    s0 = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
    t, h = 0.7, 1e-5
    s = exact_shape_operator(s0, t)
    ds = (exact_shape_operator(s0, t + h) - exact_shape_operator(s0, t - h)) / (2 * h)
    rhs = np.eye(2) - s @ s
    assert np.max(np.abs(ds - rhs)) < 1e-9


def test_transported_shape_operator_matches_riccati(generic_trajectory):
    # Pull the Eulerian shape operator back along the flow map and compare with
    # the pointwise Riccati solution seeded by the initial shape operator.
    traj = generic_trajectory
    s0 = surface_geometry(traj.surface_at(0)).shape_operator
    k = traj.index_of_time(2.0)
    transported = transported_shape_operator(traj, k)
    exact = exact_shape_operator(s0, 2.0)
    assert np.max(np.abs(transported - exact)) < 1e-4


def test_anisotropic_mixed_mode_decay():
    # Mixed mode on a rectangular torus: decay exponents still near -2.
    torus = FlatTorus(np.diag([1.0, 2.0]))
    grid = Grid.square(32, torus)
    a, b = grid.mesh
    v0 = 0.15 * np.sin(a + b)
    traj = run_flow(GraphSurface(grid, v0),
                    FlowParams(t_max=4.0, dt=0.005, snapshot_stride=80))
    report = decay_report(traj)
    assert -2.2 < report.slope_speed_excess < -1.8
    assert -2.2 < report.slope_shape_deviation < -1.8
    assert np.all(traj.v_max - (traj.v_max[0] + traj.times) <= 1e-10)


def test_index_of_time(generic_trajectory):
    traj = generic_trajectory
    assert traj.index_of_time(0.0) == 0
    assert traj.index_of_time(4.0) == traj.n_snapshots - 1
    with pytest.raises(ValueError):
        traj.index_of_time(0.123)
