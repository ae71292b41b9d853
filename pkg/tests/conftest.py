import numpy as np
import pytest

from harmjet.jetgeom import JetBoundary
from harmjet.sphere import SphereGrid


def circle(N=256, radius=1.0, center=(0.0, 0.0), reverse=False):
    s = 2 * np.pi * np.arange(N) / N
    if reverse:
        s = -s
    return np.asarray(center) + radius * np.stack([np.cos(s), np.sin(s)], 1)


def ellipse(N=256, a=2.0, b=1.0):
    s = 2 * np.pi * np.arange(N) / N
    return np.stack([a * np.cos(s), b * np.sin(s)], 1)


def graph_boundary(x, u, grad, grid=None):
    """Boundary of the 1-jet graph of u, given its values and gradient at x."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    grad = np.asarray(grad, dtype=float)
    if grad.ndim == 2:
        grad = grad[:, None, :]
    return JetBoundary(x, u, grad, grid=grid)


def re_z2(x):
    """u = Re z^2 and its gradient."""
    return x[:, 0] ** 2 - x[:, 1] ** 2, np.stack([2 * x[:, 0], -2 * x[:, 1]], 1)


@pytest.fixture
def unit_circle():
    return circle()


@pytest.fixture
def sphere_grid():
    return SphereGrid(32, 64)
