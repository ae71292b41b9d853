"""Harmonic polynomials: exact generators and fast numeric evaluators.

In the plane the basis is ``1, Re z^k, Im z^k`` with ``z = x1 + i x2``.  In
space it is the real regular solid harmonics ``r^l Y_lm`` written as
Cartesian polynomials with rational coefficients (no Condon-Shortley phase,
no normalization); :func:`solid_harmonic_norm` supplies the factor that turns
them into orthonormal spherical harmonics on the unit sphere.
"""

from functools import lru_cache
from math import comb, factorial, pi, sqrt

import numpy as np

from .extcalc import I, NumericPoly, base_space


@lru_cache(maxsize=None)
def harmonic_polys_2d(K):
    """[(label, poly)] for 1, Re z^k, Im z^k, k = 1..K."""
    space = base_space(2, max_degree=max(K, 8))
    x1, x2 = space.gens
    z = x1 + I * x2
    out = [("1", space.ring.one)]
    power = space.ring.one
    for k in range(1, K + 1):
        power = power * z
        re_ = power.ring.from_dict({mon: type(c)(c.x, 0) for mon, c in power.items() if c.x})
        im_ = power.ring.from_dict({mon: type(c)(c.y, 0) for mon, c in power.items() if c.y})
        out.append((f"Re z^{k}", re_))
        out.append((f"Im z^{k}", im_))
    return tuple(out)


def _legendre_part(space, l, m):
    """Sum_k (-1)^k 2^-l C(l,k) C(2l-2k,l) (l-2k)!/(l-2k-m)! r^2k z^(l-2k-m)."""
    x, y, z = space.gens
    r2 = x ** 2 + y ** 2 + z ** 2
    out = space.ring.zero
    for k in range((l - m) // 2 + 1):
        num = (-1) ** k * comb(l, k) * comb(2 * l - 2 * k, l) * factorial(l - 2 * k)
        den = 2 ** l * factorial(l - 2 * k - m)
        out += space.const(type(I)(num, 0) / den) * r2 ** k * z ** (l - 2 * k - m)
    return out


@lru_cache(maxsize=None)
def solid_harmonic_polys(L):
    """[((l, m), poly)] real regular solid harmonics, l <= L, m = -l..l.

    For m >= 0 the angular part is cos(m phi), for m < 0 it is sin(|m| phi).
    """
    space = base_space(3, max_degree=max(L, 8))
    x, y, _ = space.gens
    out = []
    for l in range(L + 1):
        xy = space.ring.one
        powers = [xy]
        for _ in range(l):
            xy = xy * (x + I * y)
            powers.append(xy)
        for m in range(-l, l + 1):
            pw = powers[abs(m)]
            if m >= 0:
                ang = pw.ring.from_dict({mon: type(c)(c.x, 0) for mon, c in pw.items() if c.x})
            else:
                ang = pw.ring.from_dict({mon: type(c)(c.y, 0) for mon, c in pw.items() if c.y})
            out.append(((l, m), _legendre_part(space, l, abs(m)) * ang))
    return tuple(out)


def solid_harmonic_norm(l, m):
    """Factor c with c * poly / r^l orthonormal on the unit sphere."""
    am = abs(m)
    c = sqrt((2 * l + 1) / (4 * pi) * factorial(l - am) / factorial(l + am))
    return c * sqrt(2) if m else c


class PolyEvaluator:
    """Value and gradient of an exact polynomial on R^n at float points."""

    def __init__(self, poly, n):
        ring = poly.ring
        self.n = n
        self.value = NumericPoly(poly)
        self.grads = [NumericPoly(poly.diff(ring.gens[i])) for i in range(n)]

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        out = self.value([pts[..., i] for i in range(self.n)])
        return np.array(np.broadcast_to(out, pts.shape[:-1]), dtype=float)

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float)
        cols = [pts[..., i] for i in range(self.n)]
        return np.stack([np.broadcast_to(g(cols), pts.shape[:-1]) for g in self.grads],
                        axis=-1).astype(float)


def complex_power_eval(kind, k, pts):
    """Value and gradient of Re z^k / Im z^k (or 1) from complex arithmetic."""
    pts = np.asarray(pts, dtype=float)
    z = pts[..., 0] + 1j * pts[..., 1]
    if k == 0:
        return np.ones(z.shape), np.zeros(pts.shape)
    zk = z ** k
    dz = k * z ** (k - 1)
    if kind == "Re":
        return zk.real, np.stack([dz.real, -dz.imag], axis=-1)
    return zk.imag, np.stack([dz.imag, dz.real], axis=-1)
