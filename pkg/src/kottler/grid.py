"""Flat torus, periodic grid and Fourier pseudo-spectral operators.

Conventions used throughout the package:

* Torus coordinates theta^1, theta^2 both have period 2*pi.  All geometric
  freedom (anisotropy, physical circumference) lives in the constant metric
  sigma_ij, so a physical torus with periods P1, P2 and unit metric is
  represented by sigma = diag((P1/2pi)^2, (P2/2pi)^2).
* Grids are uniform with even numbers of nodes per direction; derivatives are
  exact for trigonometric polynomials below the Nyquist mode.
* First-derivative multipliers zero the Nyquist mode (its phase is not
  representable); pure second derivatives keep -k^2 at Nyquist, mixed second
  derivatives zero it in each factor.  Band-limited inputs never notice.
* integrate() is the plain tensor-product trapezoid rule
  (2pi/n1)(2pi/n2) * sum(f), which is exact for resolved trigonometric
  polynomials; it integrates against the coordinate measure d theta^1 d theta^2
  (multiply by sqrt(det sigma) for the metric area of the flat torus).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = ["FlatTorus", "Grid"]


def _as_sigma(matrix) -> np.ndarray:
    sigma = np.asarray(matrix, dtype=float)
    if sigma.shape != (2, 2):
        raise ValueError(f"sigma must be a 2x2 matrix, got shape {sigma.shape}")
    if not np.all(np.isfinite(sigma)):
        raise ValueError("sigma must have finite entries")
    if abs(sigma[0, 1] - sigma[1, 0]) > 1e-14 * (1.0 + abs(sigma[0, 1])):
        raise ValueError("sigma must be symmetric")
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
    if sigma[0, 0] <= 0.0 or det <= 0.0:
        raise ValueError("sigma must be positive definite")
    sym = 0.5 * (sigma + sigma.T)
    sym.flags.writeable = False
    return sym


@dataclass(frozen=True)
class FlatTorus:
    """Flat 2-torus with constant metric sigma_ij and coordinate periods 2*pi."""

    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", _as_sigma(self.sigma))

    @cached_property
    def sigma_inv(self) -> np.ndarray:
        inv = np.linalg.inv(self.sigma)
        inv.flags.writeable = False
        return inv

    @cached_property
    def det_sigma(self) -> float:
        return float(np.linalg.det(self.sigma))

    @property
    def area(self) -> float:
        """Metric area (2pi)^2 sqrt(det sigma) of the flat torus."""
        return (2.0 * np.pi) ** 2 * np.sqrt(self.det_sigma)

    @classmethod
    def square(cls) -> "FlatTorus":
        return cls(np.eye(2))

    @classmethod
    def from_periods(cls, p1: float, p2: float) -> "FlatTorus":
        """Unit-metric torus with physical periods p1, p2 absorbed into sigma."""
        return cls(np.diag([(p1 / (2 * np.pi)) ** 2, (p2 / (2 * np.pi)) ** 2]))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic n1 x n2 grid on a flat torus with spectral calculus."""

    torus: FlatTorus
    n1: int
    n2: int

    def __post_init__(self):
        for n in (self.n1, self.n2):
            if n < 4 or n % 2 != 0:
                raise ValueError(f"grid sizes must be even and >= 4, got {self.n1}x{self.n2}")

    @classmethod
    def square(cls, n: int, torus: FlatTorus | None = None) -> "Grid":
        return cls(torus if torus is not None else FlatTorus.square(), n, n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @cached_property
    def theta1(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n1) / self.n1

    @cached_property
    def theta2(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n2) / self.n2

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.theta1, self.theta2, indexing="ij"))

    # -- wavenumber tables (integer modes; period 2*pi) ----------------------

    @cached_property
    def _k1(self) -> np.ndarray:
        return np.fft.fftfreq(self.n1, 1.0 / self.n1)

    @cached_property
    def _k2r(self) -> np.ndarray:
        return np.fft.rfftfreq(self.n2, 1.0 / self.n2)

    @cached_property
    def _ik1(self) -> np.ndarray:
        k = self._k1.copy()
        k[self.n1 // 2] = 0.0
        return (1j * k)[:, None]

    @cached_property
    def _ik2(self) -> np.ndarray:
        k = self._k2r.copy()
        k[-1] = 0.0
        return (1j * k)[None, :]

    @cached_property
    def _m11(self) -> np.ndarray:
        return (-self._k1 ** 2)[:, None]

    @cached_property
    def _m22(self) -> np.ndarray:
        return (-self._k2r ** 2)[None, :]

    @cached_property
    def _m12(self) -> np.ndarray:
        return self._ik1 * self._ik2

    # -- calculus ------------------------------------------------------------

    def check_field(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-2:] != self.shape:
            raise ValueError(f"field shape {values.shape} does not end in grid shape {self.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        return values

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """Spectral partial derivatives; returns shape (2,) + f.shape."""
        spec = np.fft.rfft2(f, axes=(-2, -1))
        d1 = np.fft.irfft2(self._ik1 * spec, s=self.shape, axes=(-2, -1))
        d2 = np.fft.irfft2(self._ik2 * spec, s=self.shape, axes=(-2, -1))
        return np.stack([d1, d2])

    def hessian(self, f: np.ndarray) -> np.ndarray:
        """Spectral second derivatives; returns shape (2, 2) + f.shape, symmetric."""
        spec = np.fft.rfft2(f, axes=(-2, -1))
        d11 = np.fft.irfft2(self._m11 * spec, s=self.shape, axes=(-2, -1))
        d22 = np.fft.irfft2(self._m22 * spec, s=self.shape, axes=(-2, -1))
        d12 = np.fft.irfft2(self._m12 * spec, s=self.shape, axes=(-2, -1))
        out = np.empty((2, 2) + f.shape, dtype=float)
        out[0, 0] = d11
        out[0, 1] = d12
        out[1, 0] = d12
        out[1, 1] = d22
        return out

    def integrate(self, f: np.ndarray) -> float | np.ndarray:
        """Trapezoid quadrature against d theta^1 d theta^2 (exact for resolved modes)."""
        cell = (2.0 * np.pi / self.n1) * (2.0 * np.pi / self.n2)
        total = np.sum(f, axis=(-2, -1)) * cell
        return float(total) if np.ndim(total) == 0 else total

    # -- trigonometric interpolation ------------------------------------------

    def trig_eval(self, f: np.ndarray, theta1: np.ndarray, theta2: np.ndarray,
                  deriv: tuple[int, int] = (0, 0)) -> np.ndarray:
        """Evaluate the trigonometric interpolant of f at arbitrary points.

        f may carry leading batch axes; theta1/theta2 are flat arrays of equal
        length P.  Returns shape f.shape[:-2] + (P,).  deriv=(a,b) evaluates
        the (a,b)-th mixed derivative of the interpolant (Nyquist modes are
        dropped whenever a or b is odd, matching gradient()).
        """
        theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
        theta2 = np.atleast_1d(np.asarray(theta2, dtype=float))
        if theta1.shape != theta2.shape or theta1.ndim != 1:
            raise ValueError("theta1/theta2 must be flat arrays of equal length")
        spec = np.fft.fft2(f, axes=(-2, -1)) / (self.n1 * self.n2)
        k1 = self._k1.copy()
        k2 = np.fft.fftfreq(self.n2, 1.0 / self.n2)
        a, b = deriv
        m1 = np.ones_like(k1) if a == 0 else (1j * k1) ** a
        m2 = np.ones_like(k2) if b == 0 else (1j * k2) ** b
        if a % 2 == 1:
            m1[self.n1 // 2] = 0.0
        if b % 2 == 1:
            m2[self.n2 // 2] = 0.0
        spec = spec * m1[:, None] * m2[None, :]
        e1 = np.exp(1j * np.outer(theta1, k1))          # (P, n1)
        e2 = np.exp(1j * np.outer(theta2, k2))          # (P, n2)
        vals = np.einsum("pk,...kl,pl->...p", e1, spec, e2)
        return vals.real

    def refine(self, f: np.ndarray, factor: int = 2) -> np.ndarray:
        """Fourier (zero-padding) upsample of a real field to a factor-x finer grid.

        Nyquist rows/columns are split evenly between +-n/2 so the upsampled
        interpolant is the canonical real one.
        """
        if factor < 1:
            raise ValueError("factor must be >= 1")
        if factor == 1:
            return np.array(f, dtype=float)
        n1, n2 = self.shape
        m1, m2 = factor * n1, factor * n2
        spec = np.fft.fft2(f, axes=(-2, -1))
        half1, half2 = n1 // 2, n2 // 2
        spec[..., half1, :] *= 0.5
        spec[..., :, half2] *= 0.5
        out = np.zeros(f.shape[:-2] + (m1, m2), dtype=complex)
        rows = np.r_[0:half1 + 1, m1 - half1:m1]
        cols = np.r_[0:half2 + 1, m2 - half2:m2]
        src_rows = np.r_[0:half1 + 1, n1 - half1:n1]
        src_cols = np.r_[0:half2 + 1, n2 - half2:n2]
        out[..., rows[:, None], cols[None, :]] = spec[..., src_rows[:, None], src_cols[None, :]]
        out *= factor * factor
        fine = np.fft.ifft2(out, axes=(-2, -1)).real
        return fine

    def fine_grid(self, factor: int) -> "Grid":
        return Grid(self.torus, factor * self.n1, factor * self.n2)
