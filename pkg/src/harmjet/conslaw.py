"""Conservation laws from harmonic test functions and their moment conditions.

A harmonic ``H : R^n -> R^m`` gives the undifferentiated law

    phi_H = sum_a H^a sum_i p^a_i *dx^i - u^a *dH^a,

whose integral over boundary data ``g`` in jet space is the moment
``mu(H)``.  Pulled back along ``g`` (with ``*dx^i`` restricting to
``N_i dS``) this becomes

    mu(H) = integral over the boundary of  H . (A N) - u . dH/dnu  dS,

and both routes are evaluated and compared on every call.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import periodic
from .errors import BoundaryError, ConsistencyError, NotHarmonicError
from .extcalc import (jet_space, laplacian, base_space,
                      normal_form_law, phi_antiderivative, pullback_density)
from .harmonics import (PolyEvaluator, complex_power_eval, harmonic_polys_2d,
                        solid_harmonic_polys)
from .jetgeom import gradient_scale, build_cylinder, isotropy_residual, tangential_derivative

FILLABLE = "FILLABLE"
NOT_FILLABLE = "NOT_FILLABLE"
INDETERMINATE = "INDETERMINATE"

DEFAULT_K = 16
DEFAULT_L = 8
TOL_ISO = 1e-7
TOL_MOM = 1e-6
GRAY_FACTOR = 10.0
ROUTE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class HarmonicTest:
    """One harmonic test function placed in component ``component`` of R^m.

    ``key`` is ``(kind, k)`` with kind in {"1", "Re", "Im"} for n = 2 and
    ``(l, m_idx)`` for n = 3.
    """

    n: int
    m: int
    component: int
    key: tuple
    label: str
    poly: object = field(repr=False)

    def __post_init__(self):
        if laplacian(self.poly, base_space(self.n, self.poly_cap)):
            raise NotHarmonicError(f"{self.label} is not harmonic")

    @property
    def degree(self):
        return max((sum(mon) for mon in self.poly.itermonoms()), default=0)

    @property
    def poly_cap(self):
        return max(8, self.degree + 1)

    @property
    def _evaluator(self):
        ev = self.__dict__.get("_ev")
        if ev is None:
            ev = PolyEvaluator(self.poly, self.n)
            object.__setattr__(self, "_ev", ev)
        return ev

    def value(self, pts):
        if self.n == 2:
            return complex_power_eval(self.key[0], self.key[1], pts)[0]
        return self._evaluator(pts)

    def gradient(self, pts):
        if self.n == 2:
            return complex_power_eval(self.key[0], self.key[1], pts)[1]
        return self._evaluator.gradient(pts)

    def law_components(self):
        """Exact H as an m-vector of base polynomials."""
        zero = self.poly.ring.zero
        return [self.poly if a == self.component else zero for a in range(self.m)]

    def to_dict(self):
        return {"component": self.component + 1, "label": self.label,
                "key": list(self.key)}


@lru_cache(maxsize=None)
def harmonic_basis(n, m, K=None):
    """Harmonic test functions, component-major.

    n = 2: {1, Re z^k, Im z^k : 1 <= k <= K}, m(2K+1) tests.
    n = 3: real solid harmonics of degree <= L = K, m(L+1)^2 tests.
    """
    if K is None:
        K = DEFAULT_K if n == 2 else DEFAULT_L
    if K < 0:
        raise ValueError("basis degree must be nonnegative")
    out = []
    for a in range(m):
        if n == 2:
            for label, poly in harmonic_polys_2d(K):
                if label == "1":
                    key = ("1", 0)
                else:
                    kind, k = label.split(" z^")
                    key = (kind, int(k))
                out.append(HarmonicTest(2, m, a, key, label, poly))
        elif n == 3:
            for (l, mi), poly in solid_harmonic_polys(K):
                out.append(HarmonicTest(3, m, a, (l, mi), f"Y({l},{mi})", poly))
        else:
            raise ValueError("n must be 2 or 3")
    return tuple(out)


@lru_cache(maxsize=4096)
def _phi_form(H):
    space = jet_space(H.n, H.m, max(8, H.degree + 1))
    return phi_antiderivative(space, H.law_components())


@lru_cache(maxsize=4096)
def _Phi_form(H):
    space = jet_space(H.n, H.m, max(8, H.degree + 1))
    return normal_form_law(space, H.law_components())


def _jet_values(b, A):
    cols = [b.x[:, i] for i in range(b.n)] + [b.u[:, a] for a in range(b.m)]
    cols += [A[:, a, i] for a in range(b.m) for i in range(b.n)]
    return cols


def _jet_tangents(b, A):
    """Per-parameter coordinate derivatives of the boundary data."""
    if A is b.A:
        cached = b.__dict__.get("_jet_tangents")
        if cached is None:
            cached = b.__dict__["_jet_tangents"] = _compute_jet_tangents(b, A)
        return cached
    return _compute_jet_tangents(b, A)


def _compute_jet_tangents(b, A):
    if b.n == 2:
        du = periodic.derivative(b.u)
        dA = periodic.derivative(A.reshape(b.N, -1)).reshape(A.shape)
        t = [b.tangent[:, i] for i in range(2)] + [du[:, a] for a in range(b.m)]
        t += [dA[:, a, i] for a in range(b.m) for i in range(2)]
        return [t]
    _, th_hat, ph_hat = b.grid.frame
    th, _ = b.grid.angles
    R = b.radius
    e_th, e_ph = R * th_hat, R * np.sin(th)[:, None] * ph_hat
    gu = tangential_derivative(b, b.u)
    gA = tangential_derivative(b, A.reshape(b.N, -1)).reshape(A.shape + (3,))
    out = []
    for e in (e_th, e_ph):
        t = [e[:, i] for i in range(3)]
        t += [np.einsum("jak,jk->ja", gu, e)[:, a] for a in range(b.m)]
        dA = np.einsum("jaik,jk->jai", gA, e)
        t += [dA[:, a, i] for a in range(b.m) for i in range(3)]
        out.append(t)
    return out


def _param_weights(b):
    """Quadrature weights in the parameters (s) or (theta, phi)."""
    if b.n == 2:
        return np.full(b.N, 2 * np.pi / b.N)
    th, _ = b.grid.angles
    return b.grid.weights / np.sin(th)


def moment_by_form(b, H):
    """mu(H) as the integral of the pulled-back exact form phi_H."""
    _check_dims(b, H)
    phi = _phi_form(H)
    density = pullback_density(phi, _jet_values(b, b.A), _jet_tangents(b, b.A))
    return float(b.orientation * np.sum(_param_weights(b) * density))


def moment_by_normal(b, H):
    """mu(H) = sum over the boundary of H (A N) - u dH/dnu."""
    _check_dims(b, H)
    h = H.value(b.x)
    dnu = np.einsum("ji,ji->j", H.gradient(b.x), b.normal)
    a = H.component
    AN = np.einsum("ji,ji->j", b.A[:, a, :], b.normal)
    return float(np.sum(b.weights * (h * AN - b.u[:, a] * dnu)))


def _integrand_mass(b, H):
    h = H.value(b.x)
    dnu = np.einsum("ji,ji->j", H.gradient(b.x), b.normal)
    a = H.component
    AN = np.einsum("ji,ji->j", b.A[:, a, :], b.normal)
    return float(np.sum(b.weights * (np.abs(h * AN) + np.abs(b.u[:, a] * dnu))))


def _check_dims(b, H):
    if H.n != b.n or H.m != b.m:
        raise BoundaryError(
            f"test function lives on R^{H.n} -> R^{H.m}, boundary on R^{b.n} -> R^{b.m}")


def eval_moment(b, H, cross_check=True):
    """Moment mu(H) of boundary data ``b``; both routes must agree."""
    mu = moment_by_normal(b, H)
    if cross_check:
        mu_form = moment_by_form(b, H)
        scale = max(abs(mu), _integrand_mass(b, H), 1e-300)
        if abs(mu - mu_form) > ROUTE_RTOL * scale:
            raise ConsistencyError(
                f"moment routes disagree for {H.label}: {mu!r} vs {mu_form!r}")
    return mu


def boundary_rms(b, H):
    h = H.value(b.x)
    return float(np.sqrt(np.sum(b.weights * h * h) / b.length))


def classify(ratio):
    """Verdict from residual / tolerance with the gray band [1, GRAY_FACTOR]."""
    if ratio < 1.0:
        return FILLABLE
    if ratio <= GRAY_FACTOR:
        return INDETERMINATE
    return NOT_FILLABLE


@dataclass
class MomentReport:
    labels: list
    components: list
    residuals: np.ndarray
    norms: np.ndarray
    normalized: np.ndarray
    basis_degree: int
    isotropy: float
    tol_iso: float
    tol_mom: float
    verdict: str
    n: int = 2

    @property
    def max_normalized(self):
        return float(np.max(self.normalized)) if len(self.normalized) else 0.0

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0

    def to_dict(self):
        return {
            "basis": {"kind": "K" if self.n == 2 else "L", "degree": self.basis_degree,
                      "size": len(self.labels)},
            "tolerances": {"tol_iso": self.tol_iso, "tol_mom": self.tol_mom,
                           "gray_factor": GRAY_FACTOR},
            "isotropy_residual": self.isotropy,
            "max_normalized_residual": self.max_normalized,
            "residuals": [
                {"component": c + 1, "label": lab, "mu": float(r), "norm": float(nm),
                 "normalized": float(z)}
                for lab, c, r, nm, z in zip(self.labels, self.components, self.residuals,
                                            self.norms, self.normalized)],
            "verdict": self.verdict,
        }


def moment_report(b, basis=None, tol_iso=TOL_ISO, tol_mom=TOL_MOM, cross_check=True):
    """Evaluate the moment conditions of a basis and classify the boundary."""
    if basis is None:
        basis = harmonic_basis(b.n, b.m)
    basis = list(basis)
    if not basis:
        raise ValueError("empty basis")
    iso = isotropy_residual(b)
    mus = np.array([eval_moment(b, H, cross_check) for H in basis])
    norms = np.array([boundary_rms(b, H) for H in basis])
    scale = (1.0 + gradient_scale(b)) * b.length
    normalized = np.abs(mus) / (norms * scale)
    ratio = max(iso / tol_iso, float(normalized.max()) / tol_mom)
    degree = max(H.degree for H in basis)
    return MomentReport([H.label for H in basis], [H.component for H in basis], mus, norms,
                        normalized, degree, iso, tol_iso, tol_mom, classify(ratio), n=b.n)


@dataclass
class StokesCheck:
    lhs: float
    rhs: float
    closed_form: float

    @property
    def diff(self):
        return abs(self.lhs - self.rhs)

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.diff))


def stokes_cylinder_check(b, zeta, H, n_r=4):
    """Integrate Phi_H over the cylinder between b and b with A + zeta N^t.

    Returns lhs = integral of Phi_H over the cylinder (oriented so that its
    boundary is b minus the shifted boundary), rhs = mu_b(H) - mu_shifted(H),
    and the closed form -integral of h . zeta dS.
    """
    _check_dims(b, H)
    cyl = build_cylinder(b, zeta)
    Phi = _Phi_form(H)
    r_nodes, r_w = np.polynomial.legendre.leggauss(n_r)
    r_nodes, r_w = 0.5 * (r_nodes + 1), 0.5 * r_w
    wq = _param_weights(b)
    shift = cyl.shift
    shift_tan = _jet_tangents(b.replace(A=shift), shift)
    base_tan = _jet_tangents(b, b.A)
    nx = b.n + b.m
    lhs = 0.0
    for r, w in zip(r_nodes, r_w):
        p = cyl.p_at(r)
        values = _jet_values(b, p)
        d_r = [np.zeros(b.N)] * nx + [-shift[:, a, i] for a in range(b.m) for i in range(b.n)]
        tangents = [d_r]
        for bt, st in zip(base_tan, shift_tan):
            tangents.append(bt[:nx] + [q + (1 - r) * sq for q, sq in zip(bt[nx:], st[nx:])])
        density = pullback_density(Phi, values, tangents)
        lhs += w * np.sum(wq * density)
    lhs *= b.orientation
    shifted = cyl.end(0)
    rhs = eval_moment(b, H) - eval_moment(shifted, H)
    h = H.value(b.x)
    closed = -float(np.sum(b.weights * h * cyl.zeta[:, H.component]))
    return StokesCheck(float(lhs), float(rhs), closed)
