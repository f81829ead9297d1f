"""Unit-normal-speed outward flow of graph tori and its Lagrangian flow map.

The height field evolves by d v / dt = rho with rho^2 = 1 + e^{-2v} |dv|^2,
the Eulerian form of flowing the surface at unit speed along its outward
normal.  Internally the integrator advances the offset u = v - t, whose rate
rho - 1 = x / (1 + sqrt(1 + x)) with x = e^{-2v} |dv|^2 is evaluated without
cancellation; flat initial data (u constant) is therefore preserved to the
bit, and the late-time limit of v - t is read off directly from u.

The Lagrangian label map Theta(t, .) follows the horizontal part of the
normal, d Theta^i / dt = U^i(t, Theta) with

    U^i = - sigma^{ij} v_j e^{-2v} / rho,

so that (v(t, Theta(t, x)), Theta(t, x)) is the ambient normal trajectory of
the point initially at label x.  u is advanced by fixed-step RK4; Theta by an
RK4 macro-step per snapshot interval whose stage velocities are interpolated
(Fourier-upsampled quintic splines) from the Eulerian velocity at the start,
midpoint and end of the interval — hence snapshot strides must be even.

Closed forms used by callers and tests: the shape operator along the flow
satisfies dS/dt = I - S^2 pointwise in flow labels, with solution

    S(t) = I + 2 e^{-2t} (S0 - I) [S0 + I - (S0 - I) e^{-2t}]^{-1},

and the speed excess obeys max(rho^2 - 1)(t) <= max(rho^2 - 1)(0) e^{-2t}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage

from kottler.errors import HypothesisViolation, SolverFailure
from kottler.geometry import GraphSurface, SurfaceGeometry, admissibility_check, surface_geometry
from kottler.grid import Grid

__all__ = [
    "FlowParams",
    "FlowTrajectory",
    "HeightOffset",
    "DecayReport",
    "run_flow",
    "require_admissible",
    "speed_excess_field",
    "exact_shape_operator",
    "extract_height_offset",
    "decay_report",
    "evaluate_flow_map",
    "invert_flow_map",
    "flow_map_jacobian",
    "transported_shape_operator",
]

_LOG_FLOOR = 1e-13


@dataclass(frozen=True)
class FlowParams:
    """Time-stepping controls for the outward flow.

    t_max must be an integer multiple of dt, and the snapshot stride an even
    divisor of the step count (even so the flow-map integrator can use exact
    midpoint velocities).
    """

    t_max: float
    dt: float = 1e-3
    snapshot_stride: int = 100

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > 0):
            raise ValueError("dt and t_max must be positive")
        if self.dt > 0.05:
            raise ValueError("dt must be at most 0.05")
        n = round(self.t_max / self.dt)
        if n < 1 or abs(n * self.dt - self.t_max) > 1e-9 * max(1.0, self.t_max):
            raise ValueError("t_max must be an integer multiple of dt")
        if self.snapshot_stride < 2 or self.snapshot_stride % 2:
            raise ValueError("snapshot_stride must be even and at least 2")
        if n % self.snapshot_stride:
            raise ValueError("snapshot_stride must divide the number of steps")

    @property
    def n_steps(self) -> int:
        return round(self.t_max / self.dt)

    @property
    def n_snapshots(self) -> int:
        return self.n_steps // self.snapshot_stride + 1


@dataclass(frozen=True)
class FlowTrajectory:
    """Snapshots of the flowing height field and its Lagrangian label map."""

    params: FlowParams
    grid: Grid
    times: np.ndarray          # (S,)
    offsets: np.ndarray        # (S, n1, n2) u = v - t
    flow_maps: np.ndarray      # (S, 2, n1, n2) Theta (unwrapped coordinates)
    v_min: np.ndarray
    v_max: np.ndarray
    speed_excess: np.ndarray       # max over grid of rho^2 - 1
    shape_deviation: np.ndarray    # max over grid of sqrt(tr (S - I)^2)
    mean_curvature_min: np.ndarray
    shape_eig_min: np.ndarray
    jacobian_min: np.ndarray       # det D Theta extremes per snapshot
    jacobian_max: np.ndarray

    @property
    def n_snapshots(self) -> int:
        return len(self.times)

    @cached_property
    def heights(self) -> np.ndarray:
        """Height snapshots v = u + t, shape (S, n1, n2)."""
        return self.offsets + self.times[:, None, None]

    def surface_at(self, k: int) -> GraphSurface:
        return GraphSurface(self.grid, self.heights[k])

    def geometry_at(self, k: int) -> SurfaceGeometry:
        return surface_geometry(self.surface_at(k))

    def displacement(self, k: int) -> np.ndarray:
        """Flow-map displacement Theta - identity, a periodic field (2, n1, n2)."""
        return self.flow_maps[k] - np.stack(self.grid.mesh)

    def index_of_time(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"no snapshot at t={t}; snapshot times are {self.times}")
        return k


def require_admissible(geom: SurfaceGeometry) -> None:
    """Raise HypothesisViolation naming the failed condition and grid point."""
    report = admissibility_check(geom)
    if not report.gauss_ok:
        i, j = report.worst_gauss_point
        raise HypothesisViolation(
            f"K > -1 fails at grid point ({i},{j}): K = {report.min_gauss_curvature:.6g}")
    if not report.mean_ok:
        i, j = report.worst_mean_point
        raise HypothesisViolation(
            f"H > 0 fails at grid point ({i},{j}): H = {report.min_mean_curvature:.6g}")
    if not report.second_form_positive:
        i, j = report.worst_shape_point
        raise HypothesisViolation(
            f"second fundamental form positivity fails at grid point ({i},{j}): "
            f"min principal curvature = {report.min_shape_eigenvalue:.6g}")


def speed_excess_field(grid: Grid, u: np.ndarray, t: float) -> np.ndarray:
    """rho^2 - 1 = e^{-2(u+t)} |du|^2_sigma (zero exactly for constant u)."""
    du = grid.gradient(u)
    grad2 = np.einsum("iab,ij,jab->ab", du, grid.torus.sigma_inv, du)
    return grad2 * np.exp(-2.0 * (u + t))


def _offset_rate(grid: Grid, u: np.ndarray, t: float) -> np.ndarray:
    """du/dt = rho - 1, evaluated as x / (1 + sqrt(1 + x)) to avoid cancellation."""
    x = speed_excess_field(grid, u, t)
    return x / (1.0 + np.sqrt(1.0 + x))


def rk4_offset_step(grid: Grid, u: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One RK4 step of du/dt = rho(u + t) - 1.  Constant u is a fixed point."""
    k1 = _offset_rate(grid, u, t)
    k2 = _offset_rate(grid, u + (0.5 * dt) * k1, t + 0.5 * dt)
    k3 = _offset_rate(grid, u + (0.5 * dt) * k2, t + 0.5 * dt)
    k4 = _offset_rate(grid, u + dt * k3, t + dt)
    return u + dt * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)


def _velocity_field(grid: Grid, u: np.ndarray, t: float) -> np.ndarray:
    """Horizontal normal velocity U^i = -sigma^{ij} v_j e^{-2v} / rho."""
    du = grid.gradient(u)
    du_up = np.einsum("ij,jab->iab", grid.torus.sigma_inv, du)
    grad2 = np.einsum("iab,iab->ab", du, du_up)
    e2v = np.exp(2.0 * (u + t))
    rho = np.sqrt(1.0 + grad2 / e2v)
    return -du_up / (rho * e2v)


class _VelocitySampler:
    """Evaluate a velocity field at arbitrary label positions.

    The field is Fourier-upsampled (default 4x) and wrapped-periodic quintic
    splines are prefiltered once; evaluations then cost one map_coordinates
    call per component.
    """

    def __init__(self, grid: Grid, u: np.ndarray, factor: int = 4):
        fine = grid.refine(u, factor)
        self.shape = fine.shape[-2:]
        self.coeffs = [ndimage.spline_filter(fine[i], order=5, mode="grid-wrap")
                       for i in range(2)]

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        m1, m2 = self.shape
        idx = np.stack([positions[0] * (m1 / (2.0 * np.pi)),
                        positions[1] * (m2 / (2.0 * np.pi))])
        flat = idx.reshape(2, -1)
        out = np.stack([
            ndimage.map_coordinates(c, flat, order=5, mode="grid-wrap", prefilter=False)
            for c in self.coeffs])
        return out.reshape(positions.shape)


def _theta_macro_step(theta: np.ndarray, dt: float,
                      u_start: _VelocitySampler, u_mid: _VelocitySampler,
                      u_end: _VelocitySampler) -> np.ndarray:
    k1 = u_start(theta)
    k2 = u_mid(theta + (0.5 * dt) * k1)
    k3 = u_mid(theta + (0.5 * dt) * k2)
    k4 = u_end(theta + dt * k3)
    return theta + dt * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)


def _shape_diagnostics(geom: SurfaceGeometry) -> tuple[float, float, float]:
    s = geom.shape_operator
    dev = s - np.eye(2)[:, :, None, None]
    frob2 = np.einsum("ijab,jiab->ab", dev, dev)
    shape_dev = float(np.sqrt(max(float(np.max(frob2)), 0.0)))
    lo, _ = geom.shape_eigenvalues()
    return shape_dev, float(geom.mean_curvature.min()), float(lo.min())


def run_flow(surface: GraphSurface, params: FlowParams,
             track_flow_map: bool = True) -> FlowTrajectory:
    """Integrate the outward flow, recording snapshots and diagnostics.

    Raises HypothesisViolation if the initial surface fails the curvature
    hypotheses, and SolverFailure if the integration degenerates (non-finite
    heights or a collapsing flow-map Jacobian).
    """
    grid = surface.grid
    require_admissible(surface_geometry(surface))

    n_steps = params.n_steps
    stride = params.snapshot_stride
    half = stride // 2
    n_snap = params.n_snapshots

    u = surface.values.copy()
    t = 0.0
    identity = np.stack(grid.mesh)
    theta = identity.copy()

    times = np.empty(n_snap)
    offsets = np.empty((n_snap,) + grid.shape)
    flow_maps = np.empty((n_snap, 2) + grid.shape)
    diag = {name: np.empty(n_snap) for name in
            ("v_min", "v_max", "speed_excess", "shape_deviation",
             "mean_curvature_min", "shape_eig_min", "jacobian_min", "jacobian_max")}

    def record(k: int) -> None:
        times[k] = t
        offsets[k] = u
        flow_maps[k] = theta
        v = u + t
        geom = surface_geometry(GraphSurface(grid, v))
        shape_dev, h_min, eig_min = _shape_diagnostics(geom)
        disp = theta - identity
        jac = np.stack([grid.gradient(disp[0]), grid.gradient(disp[1])])  # [i, a]
        det = ((1.0 + jac[0, 0]) * (1.0 + jac[1, 1]) - jac[0, 1] * jac[1, 0])
        diag["v_min"][k] = v.min()
        diag["v_max"][k] = v.max()
        diag["speed_excess"][k] = float(np.max(speed_excess_field(grid, u, t)))
        diag["shape_deviation"][k] = shape_dev
        diag["mean_curvature_min"][k] = h_min
        diag["shape_eig_min"][k] = eig_min
        diag["jacobian_min"][k] = det.min()
        diag["jacobian_max"][k] = det.max()
        if diag["jacobian_min"][k] <= 0.0:
            raise SolverFailure(
                f"flow map degenerates at t={t:.6g}: min Jacobian "
                f"{diag['jacobian_min'][k]:.6g}")
        if eig_min < -1e-10:
            raise SolverFailure(
                f"second fundamental form lost positivity at t={t:.6g}: "
                f"min principal curvature {eig_min:.6g}")

    record(0)
    u_start = _VelocitySampler(grid, _velocity_field(grid, u, t)) if track_flow_map else None
    u_mid = None

    for step in range(n_steps):
        if track_flow_map and step % stride == half:
            u_mid = _VelocitySampler(grid, _velocity_field(grid, u, t))
        u = rk4_offset_step(grid, u, t, params.dt)
        t += params.dt
        if not np.all(np.isfinite(u)):
            raise SolverFailure(f"height field became non-finite at t={t:.6g}")
        if (step + 1) % stride == 0:
            if track_flow_map:
                u_end = _VelocitySampler(grid, _velocity_field(grid, u, t))
                theta = _theta_macro_step(theta, stride * params.dt,
                                          u_start, u_mid, u_end)
                u_start, u_mid = u_end, None
            record((step + 1) // stride)

    return FlowTrajectory(params=params, grid=grid, times=times, offsets=offsets,
                          flow_maps=flow_maps, **diag)


# -- closed-form shape operator -----------------------------------------------


def exact_shape_operator(s0: np.ndarray, t: float) -> np.ndarray:
    """Solution of dS/dt = I - S^2 with S(0) = s0.

    s0 has index layout (2, 2, ...); the matrix inverse is taken pointwise.
    S(t) = I + 2 e^{-2t} (s0 - I) [s0 + I - (s0 - I) e^{-2t}]^{-1}, and the
    two factors commute (both are rational in s0).
    """
    s0 = np.asarray(s0, dtype=float)
    pt = np.moveaxis(s0, (0, 1), (-2, -1))
    eye = np.eye(2)
    q = np.exp(-2.0 * t)
    minus = pt - eye
    denom = pt + eye - q * minus
    sol = eye + 2.0 * q * np.linalg.solve(denom, minus)
    return np.moveaxis(sol, (-2, -1), (0, 1))


# -- flow-map evaluation and inversion ----------------------------------------


def evaluate_flow_map(traj: FlowTrajectory, k: int, points: np.ndarray) -> np.ndarray:
    """Theta(t_k, points) by trigonometric interpolation of the displacement."""
    points = np.asarray(points, dtype=float)
    flat = points.reshape(2, -1)
    disp = traj.displacement(k)
    vals = np.stack([traj.grid.trig_eval(disp[i], flat[0], flat[1]) for i in range(2)])
    return (flat + vals).reshape(points.shape)


def flow_map_jacobian(traj: FlowTrajectory, k: int, points: np.ndarray) -> np.ndarray:
    """D Theta at arbitrary points, shape (2, 2) + points.shape[1:] ([i, a] = d Theta^i / d x^a)."""
    points = np.asarray(points, dtype=float)
    flat = points.reshape(2, -1)
    disp = traj.displacement(k)
    grid = traj.grid
    jac = np.empty((2, 2, flat.shape[1]))
    for i in range(2):
        jac[i, 0] = grid.trig_eval(disp[i], flat[0], flat[1], deriv=(1, 0))
        jac[i, 1] = grid.trig_eval(disp[i], flat[0], flat[1], deriv=(0, 1))
    jac[0, 0] += 1.0
    jac[1, 1] += 1.0
    return jac.reshape((2, 2) + points.shape[1:])


def invert_flow_map(traj: FlowTrajectory, k: int, points: np.ndarray,
                    tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
    """Solve Theta(t_k, x) = points for the labels x by Newton iteration."""
    points = np.asarray(points, dtype=float)
    flat = points.reshape(2, -1)
    disp = traj.displacement(k)
    grid = traj.grid
    # Initial guess: subtract the displacement evaluated at the target.
    guess = flat - np.stack([grid.trig_eval(disp[i], flat[0], flat[1]) for i in range(2)])
    err = float("inf")
    for _ in range(max_iter):
        val = evaluate_flow_map(traj, k, guess)
        res = val - flat
        err = float(np.max(np.abs(res)))
        if err <= tol:
            return guess.reshape(points.shape)
        jac = flow_map_jacobian(traj, k, guess)
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if np.min(np.abs(det)) < 1e-14:
            raise SolverFailure("flow-map inversion hit a singular Jacobian")
        upd0 = (jac[1, 1] * res[0] - jac[0, 1] * res[1]) / det
        upd1 = (-jac[1, 0] * res[0] + jac[0, 0] * res[1]) / det
        guess = guess - np.stack([upd0, upd1])
    raise SolverFailure(
        f"flow-map inversion did not converge in {max_iter} iterations "
        f"(residual {err:.3g})")


def transported_shape_operator(traj: FlowTrajectory, k: int) -> np.ndarray:
    """Shape operator at snapshot k pulled back to initial labels.

    Returns (D Theta)^{-1} S_E(t_k, Theta) D Theta on the label grid, the
    quantity that evolves by the pointwise Riccati flow dS/dt = I - S^2.
    """
    grid = traj.grid
    base = np.stack(grid.mesh)
    pos = evaluate_flow_map(traj, k, base)
    flat = pos.reshape(2, -1)
    s_e = traj.geometry_at(k).shape_operator
    s_interp = np.empty((2, 2, flat.shape[1]))
    for i in range(2):
        for j in range(2):
            s_interp[i, j] = grid.trig_eval(s_e[i, j], flat[0], flat[1])
    s_interp = s_interp.reshape((2, 2) + grid.shape)
    jac = flow_map_jacobian(traj, k, base)
    pt_s = np.moveaxis(s_interp, (0, 1), (-2, -1))
    pt_j = np.moveaxis(jac, (0, 1), (-2, -1))
    out = np.linalg.solve(pt_j, pt_s @ pt_j)
    return np.moveaxis(out, (-2, -1), (0, 1))


# -- asymptotics ---------------------------------------------------------------


@dataclass(frozen=True)
class HeightOffset:
    """Limit profile of v(t, .) - t, estimated from the tail of a flow run.

    values is the raw final offset u(t_max); richardson is the improvement
    obtained by fitting u(t) = f + A e^{-2t} through the final and midpoint
    snapshots, whose correction magnitude is reported as richardson_error.
    """

    values: np.ndarray
    richardson: np.ndarray
    time: float
    midpoint_time: float
    error_estimate: float    # sup |u(t_max) - u(t_max/2)|
    richardson_error: float  # sup of the applied e^{-2t}-rate correction


def extract_height_offset(traj: FlowTrajectory) -> HeightOffset:
    """Estimate the asymptotic height offset lim (v - t) from a flow run.

    Uses the final snapshot and the one nearest t_max/2.  Warns if the final
    interval shrank by less than a tenth of what the e^{-2t} rate predicts
    from the preceding interval (the tail was not yet in its asymptotic
    regime).
    """
    if traj.n_snapshots < 2:
        raise ValueError("need at least two snapshots to estimate the height offset")
    t_end = float(traj.times[-1])
    k_mid = int(np.argmin(np.abs(traj.times - 0.5 * t_end)))
    k_mid = min(k_mid, traj.n_snapshots - 2)
    t_mid = float(traj.times[k_mid])
    last = traj.offsets[-1]
    diff = last - traj.offsets[k_mid]
    d = float(np.max(np.abs(diff)))
    factor = 1.0 / np.expm1(2.0 * (t_end - t_mid))
    k_quarter = int(np.argmin(np.abs(traj.times - 0.5 * t_mid)))
    if k_quarter < k_mid:
        d_prev = float(np.max(np.abs(traj.offsets[k_mid] - traj.offsets[k_quarter])))
        q = np.exp(-2.0 * traj.times)
        predicted = d_prev * (q[k_mid] - q[-1]) / (q[k_quarter] - q[k_mid])
        if d > 10.0 * predicted:
            warnings.warn(
                f"height-offset tail decayed slower than the e^-2t rate predicts "
                f"(observed {d:.3g}, predicted {predicted:.3g}); increase t_max",
                RuntimeWarning, stacklevel=2)
    return HeightOffset(values=last, richardson=last + factor * diff,
                        time=t_end, midpoint_time=t_mid,
                        error_estimate=d, richardson_error=factor * d)


@dataclass(frozen=True)
class DecayReport:
    """Fitted decay rates of the flow's convergence diagnostics.

    Slopes are least-squares fits of log(diagnostic) against t over the second
    half of the run; a fit is declined (slope NaN, at_floor True) when the
    diagnostic fell below the round-off floor 1e-13 in the fit window.
    """

    times: np.ndarray
    speed_excess: np.ndarray
    shape_deviation: np.ndarray
    v_min: np.ndarray
    v_max: np.ndarray
    slope_speed_excess: float
    slope_shape_deviation: float
    speed_at_floor: bool
    shape_at_floor: bool
    bound_excess: float  # max over snapshots of speed_excess(t) - speed_excess(0) e^{-2t}


def _log_slope(times: np.ndarray, values: np.ndarray) -> tuple[float, bool]:
    mask = times >= times[-1] / 2.0
    if np.min(values[mask]) < _LOG_FLOOR:
        return float("nan"), True
    if np.count_nonzero(mask) < 2:
        return float("nan"), False
    coeffs = np.polyfit(times[mask], np.log(values[mask]), 1)
    return float(coeffs[0]), False


def decay_report(traj: FlowTrajectory) -> DecayReport:
    """Decay diagnostics: exponential-rate fits over the second half of the run."""
    bound = traj.speed_excess[0] * np.exp(-2.0 * traj.times)
    slope_speed, speed_floor = _log_slope(traj.times, traj.speed_excess)
    slope_shape, shape_floor = _log_slope(traj.times, traj.shape_deviation)
    return DecayReport(
        times=traj.times,
        speed_excess=traj.speed_excess,
        shape_deviation=traj.shape_deviation,
        v_min=traj.v_min,
        v_max=traj.v_max,
        slope_speed_excess=slope_speed,
        slope_shape_deviation=slope_shape,
        speed_at_floor=speed_floor,
        shape_at_floor=shape_floor,
        bound_excess=float(np.max(traj.speed_excess - bound)),
    )
