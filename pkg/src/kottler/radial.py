"""Radially symmetric spacetime-harmonic functions on warped products.

On ds^2 + e^{2A(s)} sigma a radial function u(s) satisfies the
spacetime-harmonic equation (Laplacian of u equal to 3 |grad u|) exactly
when u'' + 2 A' u' = 3 |u'|.  Only the monotone-increasing branch is solved
here: with u' > 0 the equation is linear and the integrating factor gives

    u'(s) = u'(s_ref) * exp(3 (s - s_ref) - 2 (A(s) - A(s_ref))),

which is exact in the sampled warp values (no derivative of A enters).
The profile u follows by cumulative Simpson quadrature of u'.  The module
also evaluates the gradient constant entering the area-based mass bound,
and a pointwise diagnostic for the squared deviation of the Hessian of u
from its pure-trace part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import SolverFailure

__all__ = [
    "RadialSolution",
    "mass_integrand_diagnostic",
    "penrose_constant",
    "solve_radial",
]


@dataclass(frozen=True)
class RadialSolution:
    """Monotone radial solution samples on a uniform grid.

    s_grid spans [s_start, s_end]; u and du sample the solution and its
    derivative (du is exact up to rounding, u carries the quadrature error
    of integrating du); warp and d_warp sample A and A' (d_warp comes from
    the supplied derivative when given, else from centered differences).
    """

    s_grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    warp: np.ndarray
    d_warp: np.ndarray


def solve_radial(warp, s_start: float, s_end: float, num_points: int,
                 u_start: float, slope_end: float,
                 warp_prime=None) -> RadialSolution:
    """Solve the monotone radial branch with given start value and end slope.

    ``warp`` is a callable A(s); ``u_start`` prescribes u(s_start) and
    ``slope_end`` the (positive) derivative at s_end, which normalizes the
    solution.  ``warp_prime`` optionally supplies A' for diagnostics; it
    does not influence the solve.  The derivative profile is evaluated in
    closed form and must stay positive and finite everywhere, otherwise the
    monotone ansatz has broken down and SolverFailure is raised.
    """
    s_start = float(s_start)
    s_end = float(s_end)
    if not np.isfinite([s_start, s_end, u_start, slope_end]).all():
        raise ValueError("radial solve inputs must be finite")
    if s_end <= s_start:
        raise ValueError("s_end must exceed s_start")
    if num_points < 3:
        raise ValueError("need at least three grid points")
    if slope_end <= 0.0:
        raise ValueError(
            "slope_end must be positive (only the monotone-increasing "
            "branch is solved)")

    s = np.linspace(s_start, s_end, int(num_points))
    a = np.asarray([float(warp(v)) for v in s])
    if not np.all(np.isfinite(a)):
        raise ValueError("warp must be finite on the interval")
    exponent = 3.0 * (s - s_end) - 2.0 * (a - a[-1])
    with np.errstate(over="ignore"):
        du = slope_end * np.exp(exponent)
    bad = ~np.isfinite(du) | (du <= 0.0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SolverFailure(
            f"monotone branch broke down at s = {s[k]:.6g}: "
            f"u' = {float(du[k]):.6g}")

    u = u_start + cumulative_simpson(du, x=s, initial=0.0)
    if warp_prime is not None:
        d_warp = np.asarray([float(warp_prime(v)) for v in s])
    else:
        d_warp = np.gradient(a, s)
    return RadialSolution(s_grid=s, u=u, du=du, warp=a, d_warp=d_warp)


def penrose_constant(sol: RadialSolution) -> float:
    """Gradient constant of the mass bound: 4 u'(s_start).

    The inner boundary sits at s_start with the inward normal pointing
    toward increasing s, so the boundary derivative is du[0]; on the
    monotone branch it is the minimum boundary slope.  Fails if it is not
    positive.
    """
    slope = float(sol.du[0])
    if slope <= 0.0:
        raise SolverFailure("boundary slope is not positive")
    return 4.0 * slope


def mass_integrand_diagnostic(sol: RadialSolution) -> np.ndarray:
    """Pointwise deviation of the Hessian of u from its pure-trace part.

    Measures |Hess u - |grad u| g|^2 / |grad u| on the warped product,
    where the subtracted multiple is one third of the trace (the equation
    fixes the trace of Hess u to 3 |grad u|); this is the unique multiple
    that vanishes identically on the model warp A(s) = s with u' > 0.
    Radially, Hess u has ss-component u'' and angular block A' u' e^{2A}
    sigma, so with u'' = (3 - 2 A') u' from the equation,

        integrand = ((u'' - u')^2 + 2 (A' - 1)^2 u'^2) / u'.

    The result is nonnegative and vanishes exactly on the model warp.
    """
    ddu = (3.0 - 2.0 * sol.d_warp) * sol.du
    radial_part = (ddu - sol.du) ** 2
    angular_part = 2.0 * (sol.d_warp - 1.0) ** 2 * sol.du ** 2
    return (radial_part + angular_part) / sol.du
