"""Sampled boundary data in the jet space J^1(R^n, R^m), n = 2 or 3.

A :class:`JetBoundary` records ``(x(s), u(s), A(s))`` on a closed curve
(n = 2, uniform samples of s in [0, 2 pi)) or on a sphere (n = 3, a
Gauss-Legendre x uniform grid).  ``A`` sits in the ``p`` slot of the jet,
so ``A[j, a, i]`` is the prescribed derivative of ``u^a`` along ``x^i``.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import periodic
from .errors import (BoundaryError, DegenerateTangentError, EmbeddingError,
                     FormatError)
from .sphere import SphereGrid, SphereTransform

FORMAT_VERSION = 1
TANGENT_FLOOR = 1e-12


@dataclass(frozen=True)
class JetPoint:
    x: np.ndarray
    u: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x, u, p = (np.asarray(v, dtype=float) for v in (self.x, self.u, self.p))
        if p.shape != (u.shape[0], x.shape[0]):
            raise BoundaryError(f"p must be {u.shape[0]}x{x.shape[0]}, got {p.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u)) and np.all(np.isfinite(p))):
            raise BoundaryError("jet point has non-finite entries")


class JetBoundary:
    """Closed boundary data in jet space.

    Parameters
    ----------
    x : (N, n) array
    u : (N, m) array
    A : (N, m, n) array
    grid : SphereGrid, required when n = 3
    """

    def __init__(self, x, u, A, grid=None):
        x = np.array(x, dtype=float)
        u = np.array(u, dtype=float)
        A = np.array(A, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        if x.ndim != 2 or x.shape[1] not in (2, 3):
            raise BoundaryError("x must have shape (N, 2) or (N, 3)")
        N, n = x.shape
        m = u.shape[1]
        if u.shape != (N, m) or A.shape != (N, m, n):
            raise BoundaryError(
                f"inconsistent shapes x{x.shape} u{u.shape} A{A.shape}; expected A=(N, m, n)")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u)) and np.all(np.isfinite(A))):
            raise BoundaryError("boundary data has non-finite entries")
        self.n, self.m, self.N = n, m, N
        self.x, self.u, self.A = x, u, A
        for arr in (self.x, self.u, self.A):
            arr.flags.writeable = False
        if n == 2:
            if N < 16:
                raise BoundaryError("need at least 16 samples on a curve")
            self.grid = None
            if np.min(self.speed) < TANGENT_FLOOR:
                raise DegenerateTangentError(
                    f"|dx/ds| = {np.min(self.speed):.3g} at s index {int(np.argmin(self.speed))}")
            if self._min_pair_distance() <= 0:
                raise EmbeddingError("two samples of x coincide")
        else:
            if grid is None:
                raise BoundaryError("n = 3 boundaries need a SphereGrid")
            if grid.size != N:
                raise BoundaryError(f"grid has {grid.size} points, data has {N}")
            self.grid = grid
            self._fit_sphere()

    # ---------------------------------------------------------------- basics
    def __repr__(self):
        shape = self.N if self.n == 2 else self.grid.shape
        return f"JetBoundary(n={self.n}, m={self.m}, samples={shape})"

    def point(self, j):
        return JetPoint(self.x[j], self.u[j], self.A[j])

    def replace(self, x=None, u=None, A=None):
        return JetBoundary(self.x if x is None else x, self.u if u is None else u,
                           self.A if A is None else A, grid=self.grid)

    @property
    def s(self):
        return periodic.grid(self.N)

    # ------------------------------------------------------------ n = 2 curve
    @cached_property
    def tangent(self):
        """dx/ds (n = 2) by spectral differentiation."""
        if self.n != 2:
            raise BoundaryError("tangent vector is defined for curves only")
        return periodic.derivative(self.x)

    @cached_property
    def speed(self):
        return np.linalg.norm(self.tangent, axis=1)

    @cached_property
    def signed_volume(self):
        """Signed enclosed area (n = 2, positive counterclockwise) or volume."""
        if self.n == 2:
            x, t = self.x, self.tangent
            return 0.5 * periodic.trapezoid(x[:, 0] * t[:, 1] - x[:, 1] * t[:, 0])
        return 4.0 / 3.0 * np.pi * self.radius ** 3

    @property
    def orientation(self):
        """+1 when the parametrization runs along the boundary orientation of
        the enclosed domain (counterclockwise for curves), -1 otherwise."""
        return 1 if self.signed_volume > 0 else -1

    def reversed(self):
        """Same curve traversed backwards (n = 2)."""
        if self.n != 2:
            raise BoundaryError("reversal is defined for curves only")
        idx = (-np.arange(self.N)) % self.N
        return JetBoundary(self.x[idx], self.u[idx], self.A[idx])

    def _min_pair_distance(self):
        x = self.x
        best = np.inf
        for start in range(0, self.N, 512):
            blk = x[start:start + 512]
            d = np.linalg.norm(blk[:, None, :] - x[None, :, :], axis=-1)
            rows = np.arange(len(blk))
            d[rows, start + rows] = np.inf
            best = min(best, d.min())
        return best

    def check_embedded(self):
        """Raise EmbeddingError if the sampled polygon self-intersects."""
        if self.n == 3:
            return
        if getattr(self, "_embedded", False):
            return
        p = self.x
        q = np.roll(p, -1, axis=0)
        d = q - p
        N = self.N
        for start in range(0, N, 256):
            i = np.arange(start, min(start + 256, N))
            pi, di = p[i][:, None, :], d[i][:, None, :]
            pj, dj = p[None, :, :], d[None, :, :]
            denom = di[..., 0] * dj[..., 1] - di[..., 1] * dj[..., 0]
            w = pj - pi
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (w[..., 0] * dj[..., 1] - w[..., 1] * dj[..., 0]) / denom
                v = (w[..., 0] * di[..., 1] - w[..., 1] * di[..., 0]) / denom
            hit = (denom != 0) & (t > 0) & (t < 1) & (v > 0) & (v < 1)
            j = np.arange(N)[None, :]
            near = (np.abs(i[:, None] - j) <= 1) | (np.abs(i[:, None] - j) >= N - 1)
            hit &= ~near
            if hit.any():
                a, b = np.argwhere(hit)[0]
                raise EmbeddingError(
                    f"boundary curve self-intersects between samples {i[a]} and {b}")
        self._embedded = True

    # ----------------------------------------------------------- n = 3 sphere
    def _fit_sphere(self):
        w = self.grid.weights
        c = (w[:, None] * self.x).sum(0) / w.sum()
        R = np.linalg.norm(self.x - c, axis=1).mean()
        if R <= TANGENT_FLOOR:
            raise DegenerateTangentError("sphere radius vanishes")
        err = np.abs(self.x - (c + R * self.grid.points)).max()
        if err > 1e-9 * max(R, 1.0):
            raise BoundaryError(
                "n = 3 boundaries must be spheres sampled on the Gauss-Legendre grid "
                f"(misfit {err:.3g})")
        self.center, self.radius = c, R

    @cached_property
    def transform(self):
        return SphereTransform(self.grid)

    # ------------------------------------------------------------- geometry
    @cached_property
    def normal(self):
        return outward_normal(self)

    @cached_property
    def weights(self):
        return surface_measure(self)

    @cached_property
    def length(self):
        """Total length (n = 2) or area (n = 3) of the boundary."""
        return float(self.weights.sum())

    # -------------------------------------------------------------- json io
    def to_dict(self):
        out = {"format": FORMAT_VERSION, "n": self.n, "m": self.m}
        if self.n == 2:
            out["samples"] = self.N
        else:
            out["samples"] = [self.grid.n_theta, self.grid.n_phi]
        out["x"] = self.x.tolist()
        out["u"] = self.u.tolist()
        out["A"] = self.A.tolist()
        return out

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            n, m = int(d["n"]), int(d["m"])
            samples = d["samples"]
            x = np.array(d["x"], dtype=float)
            u = np.array(d["u"], dtype=float)
            A = np.array(d["A"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed boundary record: {exc}") from exc
        if d.get("format", FORMAT_VERSION) != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {d.get('format')}")
        if n not in (2, 3):
            raise FormatError("n must be 2 or 3")
        grid = None
        if n == 3:
            if not (isinstance(samples, list) and len(samples) == 2):
                raise FormatError("n = 3 needs samples = [n_theta, n_phi]")
            grid = SphereGrid(*samples)
            count = grid.size
        else:
            count = int(samples)
        if x.shape != (count, n) or u.shape != (count, m) or A.shape != (count, m, n):
            raise FormatError(
                f"array shapes x{x.shape} u{u.shape} A{A.shape} do not match n={n}, m={m}, "
                f"samples={samples}")
        return cls(x, u, A, grid=grid)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise FormatError("boundary JSON must be an object")
        return cls.from_dict(d)


def outward_normal(b):
    """Outward unit normal of x(S^{n-1}) at each sample."""
    if b.n == 2:
        b.check_embedded()
        t = b.tangent / b.speed[:, None]
        rot = np.stack([t[:, 1], -t[:, 0]], axis=1)
        return rot * b.orientation
    return (b.x - b.center) / b.radius


def surface_measure(b):
    """Quadrature weights for the induced boundary measure dS."""
    if b.n == 2:
        return b.speed * (2 * np.pi / b.N)
    return b.grid.weights * b.radius ** 2


def tangential_derivative(b, f):
    """Derivative of sampled f along the boundary.

    n = 2: df/ds / |dx/ds| (per unit length), shape (N, ...).
    n = 3: surface gradient from the spherical-harmonic expansion, (N, ..., 3).
    """
    if b.n == 2:
        df = periodic.derivative(f)
        return df / b.speed.reshape((-1,) + (1,) * (df.ndim - 1))
    coeffs = b.transform.forward(f)
    return b.transform.surface_gradient(coeffs) / b.radius


def isotropy_defect(b):
    """Pointwise mismatch between the derivative of u along the boundary and
    A applied to the unit tangent(s); shape (N, m) for n=2, (N, m, 3) for n=3."""
    if b.n == 2:
        t = b.tangent / b.speed[:, None]
        return tangential_derivative(b, b.u) - np.einsum("jai,ji->ja", b.A, t)
    grad_u = tangential_derivative(b, b.u)
    N = b.normal
    A_tan = b.A - np.einsum("jai,ji->ja", b.A, N)[..., None] * N[:, None, :]
    return grad_u - A_tan


def gradient_scale(b):
    """sup over samples and components of the Euclidean length of A^a."""
    return float(np.linalg.norm(b.A, axis=-1).max())


def isotropy_residual(b):
    """Max-norm isotropy defect relative to 1 + gradient_scale."""
    d = isotropy_defect(b)
    mag = np.abs(d) if b.n == 2 else np.linalg.norm(d, axis=-1)
    return float(mag.max() / (1.0 + gradient_scale(b)))


def smoothness_warning(b, threshold=1e-6):
    """True when the sampled data carries energy near the resolution limit."""
    if b.n != 2:
        return False
    arrays = [b.x, b.u, b.A.reshape(b.N, -1)]
    return max(periodic.spectral_tail(a) for a in arrays) > threshold


class CylinderSample:
    """The map chi(r, s) = (x(s), u(s), A(s) + (1 - r) zeta(s) N(s)^t).

    ``chi(1, .)`` is the input boundary and ``chi(0, .)`` the boundary with
    gradient data A + zeta N^t.
    """

    def __init__(self, boundary, zeta, n_r):
        if n_r < 2:
            raise ValueError("need at least two r samples")
        zeta = np.asarray(zeta, dtype=float)
        if zeta.ndim == 1:
            zeta = zeta[:, None]
        if zeta.shape != (boundary.N, boundary.m):
            raise BoundaryError(f"zeta must have shape ({boundary.N}, {boundary.m})")
        self.boundary = boundary
        self.zeta = zeta
        self.shift = zeta[:, :, None] * boundary.normal[:, None, :]
        self.r = np.linspace(0.0, 1.0, n_r)
        self.p = np.stack([self.p_at(r) for r in self.r])

    def p_at(self, r):
        if r == 1:
            return self.boundary.A.copy()
        if r == 0:
            return self.boundary.A + self.shift
        return self.boundary.A + (1 - r) * self.shift

    def end(self, r):
        """Boundary at r = 0 or r = 1."""
        return self.boundary.replace(A=self.p_at(r))

    def theta_pullback(self):
        """Max |chi^* theta^a| over both parameter directions (n = 2)."""
        b = self.boundary
        du = periodic.derivative(b.u)
        worst = 0.0
        for p in self.p:
            along_s = du - np.einsum("jai,ji->ja", p, b.tangent)
            worst = max(worst, float(np.abs(along_s).max()))
        # x and u do not depend on r, so the dr component vanishes identically
        return worst


def build_cylinder(b, zeta, n_r=5):
    return CylinderSample(b, zeta, n_r)
