import numpy as np
import pytest

from kottler.grid import FlatTorus, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


def random_smooth_field(grid: Grid, rng, kmax: int = 3, amp: float = 0.1) -> np.ndarray:
    """Random real band-limited field with modes |k| <= kmax and sup roughly amp."""
    t1, t2 = grid.mesh
    f = np.zeros(grid.shape)
    for k1 in range(0, kmax + 1):
        for k2 in range(-kmax, kmax + 1):
            if k1 == 0 and k2 <= 0:
                continue
            c, s = rng.normal(size=2) / (1 + k1 * k1 + k2 * k2)
            f += c * np.cos(k1 * t1 + k2 * t2) + s * np.sin(k1 * t1 + k2 * t2)
    peak = np.max(np.abs(f))
    return amp * f / peak if peak > 0 else f


def anisotropic_torus() -> FlatTorus:
    return FlatTorus(np.array([[1.3, 0.2], [0.2, 0.8]]))
