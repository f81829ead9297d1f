"""Pointwise curvature algebra for 3-metrics given with their first two jets.

Everything here is plain tensor algebra: the caller supplies the metric
components together with first and second coordinate derivatives (computed
spectrally, by finite differences, or in closed form), and the routines
assemble Christoffel symbols, their derivatives, and the Ricci tensor/scalar
by contraction.  Shapes broadcast over arbitrary leading grid axes:

    g    (..., D, D)
    dg   (..., D, D, D)   dg[..., a, i, j]    = d_a g_ij
    d2g  (..., D, D, D, D) d2g[..., a, b, i, j] = d_a d_b g_ij
"""

from __future__ import annotations

import numpy as np

__all__ = ["christoffel_from_jets", "ricci_from_jets"]


def christoffel_from_jets(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Christoffel symbols of the second kind, shape (..., D, D, D) = Gamma^l_ij."""
    g_inv = np.linalg.inv(g)
    # T[..., m, i, j] = d_i g_jm + d_j g_im - d_m g_ij
    t = (np.einsum("...ijm->...mij", dg) + np.einsum("...jim->...mij", dg) - dg)
    return 0.5 * np.einsum("...lm,...mij->...lij", g_inv, t)


def ricci_from_jets(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ricci tensor and scalar curvature from metric jets.

    Returns (ric, scal) with shapes (..., D, D) and (...,).  The Christoffel
    derivatives are obtained algebraically from the supplied jets, so no
    numerical differentiation happens here.
    """
    g_inv = np.linalg.inv(g)
    t = (np.einsum("...ijm->...mij", dg) + np.einsum("...jim->...mij", dg) - dg)
    gamma = 0.5 * np.einsum("...lm,...mij->...lij", g_inv, t)
    # d_a g^{lm} = -g^{lp} g^{mq} d_a g_pq
    dg_inv = -np.einsum("...lp,...mq,...apq->...alm", g_inv, g_inv, dg)
    # d_a T[m,i,j] = d_a d_i g_jm + d_a d_j g_im - d_a d_m g_ij
    dt = np.einsum("...aijm->...amij", d2g) + np.einsum("...ajim->...amij", d2g) - d2g
    dgamma = 0.5 * (np.einsum("...alm,...mij->...alij", dg_inv, t)
                    + np.einsum("...lm,...amij->...alij", g_inv, dt))
    # R_ij = d_a Gamma^a_ij - d_i Gamma^a_aj + Gamma^a_ab Gamma^b_ij - Gamma^a_ib Gamma^b_aj
    ric = (np.einsum("...aaij->...ij", dgamma)
           - np.einsum("...iaaj->...ij", dgamma)
           + np.einsum("...aab,...bij->...ij", gamma, gamma)
           - np.einsum("...aib,...baj->...ij", gamma, gamma))
    scal = np.einsum("...ij,...ij->...", g_inv, ric)
    return ric, scal
