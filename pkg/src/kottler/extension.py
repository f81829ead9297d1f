"""Collar extension: the lapse equation on the flow foliation and R(g) = -6.

On the foliation swept out by the unit-speed flow, a lapse w > 0 turns the
collar into the metric (in graph coordinates (t, theta))

    g_tt = w^2 + rho^2 - 1,   g_ti = rho v_i,   g_ij = gamma_ij,

which equals w^2 dt^2 + gamma_t in flow labels.  The scalar curvature of this
metric is exactly -6 when w solves, in flow labels,

    H dw/dt = w^2 Lap_t w + (K_t + 3)(w - w^3),

with Lap_t the Laplace-Beltrami operator of gamma_t and K_t its Gauss
curvature.  In graph coordinates the label drift adds an advection term, so
the solver integrates

    dw/dt = [w^2 Lap_t w + (K_t + 3)(w - w^3)] / H_t
            + rho^{-1} e^{-2v} sigma^{ij} v_j (dw/dtheta^i).

The integration variable is omega = w - 1 (so the equilibrium w = 1 is exact
to the bit and the scaled gap z = e^{3t}(w - 1) carries full relative
precision at late times), alongside the height offset u = v - t exactly as in
the flow module.  Spatially constant comparison solutions

    wbar[C, eta](t) = (1 + C e^{-2 int_0^t eta})^{-1/2}

bracket w at every step: the upper barrier starts at max w0 and uses
eta+ = min (K+3)/H when it starts at or above 1 (eta- = max (K+3)/H when
below, where the reaction term reverses sign), and symmetrically for the
lower barrier.  Gauss curvature is taken from the extrinsic closed form
K = (H^2 - |h|^2 - 2)/2, exact on the continuum by the Gauss identity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from kottler.curvature import ricci_from_jets
from kottler.errors import HypothesisViolation, SolverFailure
from kottler.flow import FlowTrajectory, HeightOffset
from kottler.grid import Grid

__all__ = [
    "ExtensionParams",
    "ExtensionTrajectory",
    "LapseLimit",
    "AmbientExtension",
    "solve_lapse",
    "extract_lapse_limit",
    "assemble_ambient_extension",
    "scalar_curvature_residual",
]

_BARRIER_SLACK = 1e-8


@dataclass(frozen=True)
class ExtensionParams:
    """Time-stepping controls for the lapse solver.

    dt is the outer step; a parabolic stability cap (explicit RK4 on the
    spectral Laplacian) splits each outer step into substeps adaptively, so
    dt only controls accuracy and output cadence.
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
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be positive")
        if n % self.snapshot_stride:
            raise ValueError("snapshot_stride must divide the number of steps")

    @property
    def n_steps(self) -> int:
        return round(self.t_max / self.dt)

    @property
    def n_snapshots(self) -> int:
        return self.n_steps // self.snapshot_stride + 1


@dataclass(frozen=True)
class ExtensionTrajectory:
    """Snapshots of the lapse solve, bundled with the height field it rode on."""

    params: ExtensionParams
    grid: Grid
    times: np.ndarray             # (S,)
    offsets: np.ndarray           # (S, n1, n2) u = v - t
    lapse_excess: np.ndarray      # (S, n1, n2) omega = w - 1
    scaled_gap: np.ndarray        # (S, n1, n2) z = e^{3t} (w - 1)
    w_min: np.ndarray             # (S,)
    w_max: np.ndarray             # (S,)
    barrier_low: np.ndarray       # (S,)
    barrier_high: np.ndarray      # (S,)
    scaled_gap_max: np.ndarray    # (S,) max |z|
    total_substeps: int

    @property
    def n_snapshots(self) -> int:
        return len(self.times)

    @cached_property
    def lapse(self) -> np.ndarray:
        """w snapshots, shape (S, n1, n2)."""
        return 1.0 + self.lapse_excess

    @cached_property
    def heights(self) -> np.ndarray:
        """v snapshots, shape (S, n1, n2)."""
        return self.offsets + self.times[:, None, None]

    def index_of_time(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"no snapshot at t={t}; snapshot times are {self.times}")
        return k


class _SliceRates(NamedTuple):
    du: np.ndarray
    dom: np.ndarray
    eta_min: float        # min over the slice of (K + 3) / H
    eta_max: float        # max over the slice of (K + 3) / H
    stiffness: float      # max of (w^2 / H) * lambda_max(gamma^{-1})
    reaction_rate: float  # max reaction Jacobian |(K+3)/H| (3w^2 - 1)
    h_min: float
    w_min: float
    w_max: float


def _slice_rates(grid: Grid, u: np.ndarray, om: np.ndarray, t: float) -> _SliceRates:
    """Joint RK4 stage rates for (u, omega) plus per-slice scalars."""
    sigma = grid.torus.sigma
    sigma_inv = grid.torus.sigma_inv
    du = grid.gradient(u)
    ddu = grid.hessian(u)
    du_up = np.einsum("ij,jab->iab", sigma_inv, du)
    grad2 = np.einsum("iab,iab->ab", du, du_up)
    e2v = np.exp(2.0 * (u + t))
    x = grad2 / e2v
    rho2 = 1.0 + x
    rho = np.sqrt(rho2)

    det_gamma = rho2 * e2v * e2v * grid.torus.det_sigma
    gamma = e2v * sigma[:, :, None, None] + du[:, None] * du[None, :]
    gamma_inv = np.empty_like(gamma)
    gamma_inv[0, 0] = gamma[1, 1] / det_gamma
    gamma_inv[1, 1] = gamma[0, 0] / det_gamma
    gamma_inv[0, 1] = -gamma[0, 1] / det_gamma
    gamma_inv[1, 0] = gamma_inv[0, 1]

    second = (-ddu + 2.0 * du[:, None] * du[None, :] + e2v * sigma[:, :, None, None]) / rho
    shape_op = np.einsum("ikab,kjab->ijab", gamma_inv, second)
    mean = shape_op[0, 0] + shape_op[1, 1]
    h_norm2 = np.einsum("ijab,jiab->ab", shape_op, shape_op)
    gauss = 0.5 * (mean * mean - h_norm2 - 2.0)

    # Laplace-Beltrami of omega in divergence form (constant sqrt(det sigma)
    # factors cancel between the density and its reciprocal).
    dom_grad = grid.gradient(om)
    density = rho * e2v
    flux = density * np.einsum("ijab,jab->iab", gamma_inv, dom_grad)
    spec = np.fft.rfft2(flux, axes=(-2, -1))
    div = np.fft.irfft2(grid._ik1 * spec[0] + grid._ik2 * spec[1],
                        s=grid.shape, axes=(-2, -1))
    lap = div / density

    w = 1.0 + om
    reaction = gauss + 3.0
    advect = np.einsum("iab,iab->ab", du_up, dom_grad) / (rho * e2v)
    dom_dt = (w * w * lap - reaction * om * w * (om + 2.0)) / mean + advect
    du_dt = x / (1.0 + rho)

    ratio = reaction / mean
    half_tr = 0.5 * (gamma_inv[0, 0] + gamma_inv[1, 1])
    det_inv = 1.0 / det_gamma
    lam_max = half_tr + np.sqrt(np.maximum(half_tr * half_tr - det_inv, 0.0))
    # Diffusion dominates the explicit stability limit; the reaction Jacobian
    # is added so violent initial transients also shorten the substep.
    stiffness = float(np.max(w * w / mean * lam_max))
    reaction_rate = float(np.max(np.abs(ratio) * (3.0 * w * w - 1.0)))

    return _SliceRates(du=du_dt, dom=dom_dt,
                       eta_min=float(ratio.min()), eta_max=float(ratio.max()),
                       stiffness=stiffness, reaction_rate=reaction_rate,
                       h_min=float(mean.min()),
                       w_min=float(w.min()), w_max=float(w.max()))


def _barrier(c: float, exponent: float) -> float:
    """Comparison solution (1 + C e^{-2 exponent})^{-1/2}; C > -1 always."""
    return float(1.0 / np.sqrt(1.0 + c * np.exp(-2.0 * exponent)))


def solve_lapse(flow: FlowTrajectory, w0, params: ExtensionParams) -> ExtensionTrajectory:
    """Integrate the lapse equation over the foliation of a flow run.

    The height field is re-integrated alongside the lapse (same RK4, shared
    stages) so the lapse sees the foliation at every substep, not only at the
    flow's snapshot cadence.  Spatially constant barrier solutions are
    advanced with trapezoid-accumulated exponents and bracketing is asserted
    after every substep (1e-8 slack).
    """
    grid = flow.grid
    if not np.all(flow.mean_curvature_min > 0.0):
        k = int(np.argmin(flow.mean_curvature_min))
        raise HypothesisViolation(
            f"H > 0 fails along the flow at t={flow.times[k]:.6g}: "
            f"min H = {flow.mean_curvature_min[k]:.6g}")
    w0 = np.asarray(w0, dtype=float)
    if w0.ndim == 0:
        w0 = np.full(grid.shape, float(w0))
    w0 = grid.check_field(w0)
    if w0.ndim != 2:
        raise ValueError("w0 must be a single scalar field")
    if np.min(w0) <= 0.0:
        raise ValueError("w0 must be positive everywhere")

    u = flow.offsets[0].copy()
    om = w0 - 1.0
    t = 0.0

    w_lo0, w_hi0 = float(np.min(w0)), float(np.max(w0))
    c_low = w_lo0 ** (-2) - 1.0
    c_high = w_hi0 ** (-2) - 1.0
    # Barrier solutions never cross 1, so the sign of the reaction term along
    # each barrier is fixed by its starting side; that picks which extreme of
    # (K+3)/H makes it a genuine comparison solution.
    low_uses_max = w_lo0 >= 1.0
    high_uses_min = w_hi0 >= 1.0
    int_eta_min = 0.0
    int_eta_max = 0.0

    n_snap = params.n_snapshots
    times = np.empty(n_snap)
    offsets = np.empty((n_snap,) + grid.shape)
    lapse_excess = np.empty((n_snap,) + grid.shape)
    scaled_gap = np.empty((n_snap,) + grid.shape)
    w_min = np.empty(n_snap)
    w_max = np.empty(n_snap)
    barrier_low = np.empty(n_snap)
    barrier_high = np.empty(n_snap)
    gap_max = np.empty(n_snap)
    total_substeps = 0

    rates = _slice_rates(grid, u, om, t)

    def barrier_pair() -> tuple[float, float]:
        lo = _barrier(c_low, int_eta_max if low_uses_max else int_eta_min)
        hi = _barrier(c_high, int_eta_min if high_uses_min else int_eta_max)
        return lo, hi

    def record(k: int) -> None:
        times[k] = t
        offsets[k] = u
        lapse_excess[k] = om
        z = np.exp(3.0 * t) * om
        scaled_gap[k] = z
        w_min[k] = rates.w_min
        w_max[k] = rates.w_max
        barrier_low[k], barrier_high[k] = barrier_pair()
        gap_max[k] = float(np.max(np.abs(z)))

    record(0)
    # Nyquist-squared bound on gamma^{ij} k_i k_j over resolved modes.
    mode_bound = (grid.n1 // 2) ** 2 + (grid.n2 // 2) ** 2

    for step in range(params.n_steps):
        cap = 2.0 / (rates.stiffness * mode_bound + rates.reaction_rate)
        n_sub = max(1, int(np.ceil(params.dt / cap)))
        if n_sub > 1000:
            raise SolverFailure(
                f"parabolic stability requires over 1000 substeps at t={t:.6g}; "
                f"the grid or lapse has degenerated")
        h = params.dt / n_sub
        for _ in range(n_sub):
            total_substeps += 1
            k1 = rates
            k2 = _slice_rates(grid, u + (0.5 * h) * k1.du, om + (0.5 * h) * k1.dom,
                              t + 0.5 * h)
            k3 = _slice_rates(grid, u + (0.5 * h) * k2.du, om + (0.5 * h) * k2.dom,
                              t + 0.5 * h)
            k4 = _slice_rates(grid, u + h * k3.du, om + h * k3.dom, t + h)
            u = u + h * ((k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du) / 6.0)
            om = om + h * ((k1.dom + 2.0 * k2.dom + 2.0 * k3.dom + k4.dom) / 6.0)
            t += h
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(om))):
                raise SolverFailure(f"lapse solve became non-finite at t={t:.6g}")
            rates = _slice_rates(grid, u, om, t)
            if rates.h_min <= 0.0:
                raise SolverFailure(
                    f"mean curvature lost positivity during the lapse solve at "
                    f"t={t:.6g}: min H = {rates.h_min:.6g}")
            if rates.w_min <= 0.0:
                raise SolverFailure(
                    f"lapse lost positivity at t={t:.6g}: min w = {rates.w_min:.6g}")
            int_eta_min += 0.5 * h * (k1.eta_min + rates.eta_min)
            int_eta_max += 0.5 * h * (k1.eta_max + rates.eta_max)
            lo, hi = barrier_pair()
            if rates.w_min < lo - _BARRIER_SLACK or rates.w_max > hi + _BARRIER_SLACK:
                raise SolverFailure(
                    f"barrier bracketing failed at t={t:.6g}: "
                    f"w in [{rates.w_min:.12g}, {rates.w_max:.12g}], "
                    f"barriers [{lo:.12g}, {hi:.12g}]")
        if (step + 1) % params.snapshot_stride == 0:
            record((step + 1) // params.snapshot_stride)

    return ExtensionTrajectory(
        params=params, grid=grid, times=times, offsets=offsets,
        lapse_excess=lapse_excess, scaled_gap=scaled_gap,
        w_min=w_min, w_max=w_max,
        barrier_low=barrier_low, barrier_high=barrier_high,
        scaled_gap_max=gap_max, total_substeps=total_substeps)


# -- asymptotic lapse profile --------------------------------------------------


@dataclass(frozen=True)
class LapseLimit:
    """Scaled asymptotic lapse profile: the limit of e^{3(v - t)}-weighted gap.

    values is the Richardson-improved limit of e^{3 f} e^{3t}(w - 1) (with f
    the height offset); raw is the unextrapolated final snapshot.
    error_estimate is the sup difference of the last two tail estimates, and
    correction the magnitude of the applied e^{-2t}-rate extrapolation.
    """

    values: np.ndarray
    raw: np.ndarray
    time: float
    error_estimate: float
    correction: float


def extract_lapse_limit(ext: ExtensionTrajectory, offset) -> LapseLimit:
    """Limit profile e^{3f} lim e^{3t}(w - 1) from the tail of a lapse solve.

    offset is the height-offset profile f (an array, or a HeightOffset whose
    Richardson-improved field is used).  The scaled gap z = e^{3t}(w - 1) is
    extrapolated in e^{-2t} from the last two snapshots; a warning is raised
    if the tail is not yet contracting at that rate (x10 tolerance).
    """
    if ext.n_snapshots < 2:
        raise ValueError("need at least two snapshots to extract the lapse limit")
    f = offset.richardson if isinstance(offset, HeightOffset) else np.asarray(offset, dtype=float)
    f = ext.grid.check_field(f)
    scale = np.exp(3.0 * f)
    t_b, t_a = float(ext.times[-1]), float(ext.times[-2])
    z_b, z_a = ext.scaled_gap[-1], ext.scaled_gap[-2]
    diff = z_b - z_a
    factor = 1.0 / np.expm1(2.0 * (t_b - t_a))
    if ext.n_snapshots >= 3:
        t_0 = float(ext.times[-3])
        d_prev = float(np.max(np.abs(z_a - ext.scaled_gap[-3])))
        q = np.exp(-2.0 * np.array([t_0, t_a, t_b]))
        predicted = d_prev * (q[1] - q[2]) / (q[0] - q[1])
        observed = float(np.max(np.abs(diff)))
        if observed > 10.0 * predicted:
            warnings.warn(
                f"scaled-gap tail decayed slower than the e^-2t rate predicts "
                f"(observed {observed:.3g}, predicted {predicted:.3g}); increase t_max",
                RuntimeWarning, stacklevel=2)
    richardson = z_b + factor * diff
    return LapseLimit(values=scale * richardson, raw=scale * z_b, time=t_b,
                      error_estimate=float(np.max(np.abs(scale * diff))),
                      correction=float(np.max(np.abs(scale * factor * diff))))


# -- extension metric and its scalar curvature ---------------------------------


@dataclass(frozen=True)
class AmbientExtension:
    """Extension metric sampled on the product of snapshot times and the grid."""

    grid: Grid
    times: np.ndarray        # (T,)
    components: np.ndarray   # (T, n1, n2, 3, 3), coordinates (t, theta1, theta2)


def assemble_ambient_extension(ext: ExtensionTrajectory) -> AmbientExtension:
    """Metric components g_tt = w^2 + rho^2 - 1, g_ti = rho v_i, g_ij = gamma_ij."""
    grid = ext.grid
    sigma = grid.torus.sigma
    n_snap = ext.n_snapshots
    comps = np.empty((n_snap,) + grid.shape + (3, 3))
    for k in range(n_snap):
        u = ext.offsets[k]
        w = 1.0 + ext.lapse_excess[k]
        du = grid.gradient(u)
        grad2 = np.einsum("iab,ij,jab->ab", du, grid.torus.sigma_inv, du)
        e2v = np.exp(2.0 * (u + ext.times[k]))
        rho2 = 1.0 + grad2 / e2v
        rho = np.sqrt(rho2)
        gamma = e2v * sigma[:, :, None, None] + du[:, None] * du[None, :]
        comps[k, :, :, 0, 0] = w * w + rho2 - 1.0
        for i in range(2):
            comps[k, :, :, 0, i + 1] = rho * du[i]
            comps[k, :, :, i + 1, 0] = rho * du[i]
            for j in range(2):
                comps[k, :, :, i + 1, j + 1] = gamma[i, j]
    if not np.all(np.isfinite(comps)):
        raise SolverFailure("extension metric contains non-finite components")
    return AmbientExtension(grid=grid, times=ext.times.copy(), components=comps)


def scalar_curvature_residual(ambient: AmbientExtension) -> float:
    """max |R(g) + 6| over interior time slices of the sampled extension.

    Time derivatives use 4th-order central differences (interior slices only,
    so at least 5 uniformly spaced slices are required); angular derivatives
    are spectral.  The Ricci contraction runs through the shared jets-based
    tensor code.
    """
    times = ambient.times
    n_t = len(times)
    if n_t < 5:
        raise ValueError("need at least 5 time slices for the interior stencil")
    steps = np.diff(times)
    h = float(steps[0])
    if np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(h)):
        raise ValueError("time slices must be uniformly spaced")

    grid = ambient.grid
    g = ambient.components  # (T, n1, n2, 3, 3)
    worst = 0.0
    for k in range(2, n_t - 2):
        g_k = g[k]
        dt1 = (8.0 * (g[k + 1] - g[k - 1]) - (g[k + 2] - g[k - 2])) / (12.0 * h)
        # Second differences of neighbours first: adjacent slices agree to a
        # factor well under 2, so the inner subtractions are exact and the
        # stencil noise reduces to the round-off already in the samples.
        diff_1 = (g[k + 1] - g_k) - (g_k - g[k - 1])
        diff_2 = (g[k + 2] - g_k) - (g_k - g[k - 2])
        dt2 = (16.0 * diff_1 - diff_2) / (12.0 * h * h)
        # Spectral derivatives batch over the trailing (3, 3) axes.
        flat = np.moveaxis(g_k.reshape(grid.shape + (9,)), -1, 0)
        dth = grid.gradient(flat)                      # (2, 9, n1, n2)
        ddth = grid.hessian(flat)                      # (2, 2, 9, n1, n2)
        dt1_flat = np.moveaxis(dt1.reshape(grid.shape + (9,)), -1, 0)
        dth_dt1 = grid.gradient(dt1_flat)              # (2, 9, n1, n2)

        dg = np.empty(grid.shape + (3, 3, 3))
        dg[:, :, 0] = dt1
        dg[:, :, 1] = np.moveaxis(dth[0], 0, -1).reshape(grid.shape + (3, 3))
        dg[:, :, 2] = np.moveaxis(dth[1], 0, -1).reshape(grid.shape + (3, 3))

        d2g = np.empty(grid.shape + (3, 3, 3, 3))
        d2g[:, :, 0, 0] = dt2
        for a in range(2):
            mixed = np.moveaxis(dth_dt1[a], 0, -1).reshape(grid.shape + (3, 3))
            d2g[:, :, 0, a + 1] = mixed
            d2g[:, :, a + 1, 0] = mixed
            for b in range(2):
                d2g[:, :, a + 1, b + 1] = np.moveaxis(
                    ddth[a, b], 0, -1).reshape(grid.shape + (3, 3))

        _, scal = ricci_from_jets(g_k, dg, d2g)
        worst = max(worst, float(np.max(np.abs(scal + 6.0))))
    return worst
