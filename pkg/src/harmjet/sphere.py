"""Gauss-Legendre x uniform grids on the sphere and real spherical harmonics."""

from functools import cached_property

import numpy as np
from scipy.special import sph_harm_y

from .errors import AliasingError


class SphereGrid:
    """Product grid: Gauss-Legendre colatitudes times uniform longitudes.

    Points are flattened with the colatitude index outermost.
    """

    def __init__(self, n_theta, n_phi):
        if n_theta < 8 or n_phi < 16:
            raise ValueError("sphere grid must be at least 8 x 16")
        self.n_theta = int(n_theta)
        self.n_phi = int(n_phi)
        t, w = np.polynomial.legendre.leggauss(self.n_theta)
        order = np.argsort(-t)  # increasing colatitude
        self.t = t[order]
        self.theta = np.arccos(self.t)
        self.wt = w[order]
        self.phi = 2 * np.pi * np.arange(self.n_phi) / self.n_phi

    def __eq__(self, other):
        return (isinstance(other, SphereGrid) and self.n_theta == other.n_theta
                and self.n_phi == other.n_phi)

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @property
    def size(self):
        return self.n_theta * self.n_phi

    @property
    def max_degree(self):
        """Largest l resolved without aliasing by the quadrature."""
        return min(self.n_theta - 1, self.n_phi // 2 - 1)

    @cached_property
    def angles(self):
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        return th.ravel(), ph.ravel()

    @cached_property
    def points(self):
        th, ph = self.angles
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)

    @cached_property
    def weights(self):
        """Area weights on the unit sphere."""
        return np.repeat(self.wt, self.n_phi) * (2 * np.pi / self.n_phi)

    @cached_property
    def frame(self):
        """Unit vectors (r_hat, theta_hat, phi_hat) at each point."""
        th, ph = self.angles
        r = self.points
        t = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)
        p = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=-1)
        return r, t, p


def sh_index(L):
    """(l, m) pairs in storage order, m = -l..l within each l."""
    return [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]


def real_sph_harm(L, theta, phi, derivatives=False):
    """Orthonormal real spherical harmonics, rows in :func:`sh_index` order.

    Y_lm = sqrt2 (-1)^m Re Y_l^m for m > 0, Y_l^0, sqrt2 (-1)^m Im Y_l^|m| for
    m < 0, so that Y_lm is proportional to cos(m phi) / sin(|m| phi) with a
    positive leading coefficient.  With ``derivatives`` also returns the
    theta- and phi-derivatives.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    # separable: evaluate the colatitude factor once per distinct theta
    uniq, inv = np.unique(theta, return_inverse=True)
    inv = inv.reshape(theta.shape)
    rows, dth, dph = [], [], []
    for l, m in sh_index(L):
        am = abs(m)
        y, dy = sph_harm_y(l, am, uniq, 0.0, diff_n=1)
        lat, dlat = y.real[inv], dy[..., 0].real[inv]
        if m == 0:
            fac, ang, dang = 1.0, 1.0, 0.0
        elif m > 0:
            fac = np.sqrt(2) * (-1) ** am
            ang, dang = np.cos(am * phi), -am * np.sin(am * phi)
        else:
            fac = np.sqrt(2) * (-1) ** am
            ang, dang = np.sin(am * phi), am * np.cos(am * phi)
        rows.append(fac * lat * ang)
        if derivatives:
            dth.append(fac * dlat * ang)
            dph.append(fac * lat * dang)
    if derivatives:
        return np.array(rows), np.array(dth), np.array(dph)
    return np.array(rows)


class SphereTransform:
    """Forward/backward real SH transform on a :class:`SphereGrid`."""

    def __init__(self, grid, L=None):
        if L is None:
            L = grid.max_degree
        if L > grid.max_degree:
            raise AliasingError(
                f"degree {L} exceeds what a {grid.n_theta}x{grid.n_phi} grid resolves "
                f"({grid.max_degree})")
        self.grid = grid
        self.L = L
        th, ph = grid.angles
        self.Y, self.Yt, self.Yp = real_sph_harm(L, th, ph, derivatives=True)
        self.degrees = np.array([l for l, _ in sh_index(L)])

    def forward(self, values):
        """Coefficients (ncoef, ...) of sampled values (npts, ...)."""
        values = np.asarray(values, dtype=float)
        w = self.grid.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.tensordot(self.Y, w * values, axes=(1, 0))

    def backward(self, coeffs):
        return np.tensordot(self.Y.T, coeffs, axes=(1, 0))

    def surface_gradient(self, coeffs):
        """Tangential gradient on the unit sphere, shape (npts, ..., 3)."""
        _, t_hat, p_hat = self.grid.frame
        th, _ = self.grid.angles
        gt = np.tensordot(self.Yt.T, coeffs, axes=(1, 0))
        gp = np.tensordot(self.Yp.T, coeffs, axes=(1, 0)) / np.sin(th).reshape(
            (-1,) + (1,) * (np.ndim(coeffs) - 1))
        ext = (slice(None),) + (None,) * (np.ndim(coeffs) - 1) + (slice(None),)
        return gt[..., None] * t_hat[ext] + gp[..., None] * p_hat[ext]

    def solid_gradient(self, coeffs):
        """Gradient at the unit sphere of the solid extension sum c r^l Y."""
        r_hat, _, _ = self.grid.frame
        radial = np.tensordot(self.Y.T * self.degrees, coeffs, axes=(1, 0))
        ext = (slice(None),) + (None,) * (np.ndim(coeffs) - 1) + (slice(None),)
        return radial[..., None] * r_hat[ext] + self.surface_gradient(coeffs)
