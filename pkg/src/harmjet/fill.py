"""Fillability decision and construction of the harmonic filling.

The filling of boundary data ``(x, u, A)`` is the 1-jet of the harmonic
extension V of u.  The defect field

    zeta = (A - grad V) . N

vanishes exactly when the data bounds that 1-jet graph.  :func:`check`
reaches a verdict twice, from the moment residuals and from zeta, and only
reports a definite answer when both agree.
"""

from dataclasses import dataclass, field

import numpy as np

from . import periodic
from .conslaw import (FILLABLE, INDETERMINATE, NOT_FILLABLE, TOL_ISO, TOL_MOM,
                      classify, harmonic_basis, moment_report)
from .dirichlet import (HarmonicExtension, boundary_gradient, fit_circle, normal_derivative_fd,
                        solve_fd, trace_of)
from .errors import BoundaryError, IsotropyError
from .jetgeom import gradient_scale, JetBoundary, isotropy_residual, tangential_derivative
from .sphere import SphereGrid

TOL_ZETA = 1e-6
FD_SAFETY = 2.0


@dataclass
class FillResult:
    """Harmonic extension of u and the defect of the boundary data against it."""

    boundary: JetBoundary
    method: str
    extension: object
    values: np.ndarray
    gradient: np.ndarray
    zeta: np.ndarray
    h: float = None
    error_estimate: float = 0.0
    tangential_defect: float = 0.0

    @property
    def zeta_inf(self):
        return float(np.abs(self.zeta).max())

    @property
    def zeta_l2(self):
        w = self.boundary.weights
        return float(np.sqrt(np.sum(w[:, None] * self.zeta ** 2)))

    def zeta_tsv(self):
        """Rows (s, zeta_1..zeta_m); for n = 3, (theta, phi, zeta...)."""
        b = self.boundary
        if b.n == 2:
            head = "s" + "".join(f"\tzeta{a + 1}" for a in range(b.m))
            cols = [b.s[:, None]]
        else:
            th, ph = b.grid.angles
            head = "theta\tphi" + "".join(f"\tzeta{a + 1}" for a in range(b.m))
            cols = [th[:, None], ph[:, None]]
        rows = np.hstack(cols + [self.zeta])
        return head + "\n" + "".join("\t".join(repr(float(t)) for t in r) + "\n" for r in rows)

    def grid_tsv(self, n_r=17, n_s=64):
        """Rows (x, y, V...) of the filling sampled inside the domain."""
        if self.method == "fd":
            return self.extension.to_tsv()
        if self.boundary.n != 2:
            raise BoundaryError("grid export is planar")
        pts, vals = self.extension.polar_grid(n_r, n_s)
        head = "x\ty" + "".join(f"\tV{a + 1}" for a in range(vals.shape[1]))
        body = "".join("\t".join(repr(float(t)) for t in (*p, *v)) + "\n"
                       for p, v in zip(pts, vals))
        return head + "\n" + body

    def summary(self):
        return {"method": self.method, "h": self.h, "zeta_inf": self.zeta_inf,
                "zeta_l2": self.zeta_l2, "error_estimate": self.error_estimate,
                "tangential_defect": self.tangential_defect}


def spectral_domain(b):
    """True when the boundary is a circle (n = 2) or a grid sphere (n = 3)."""
    return b.n == 3 or fit_circle(b.x) is not None


def default_h(b):
    ext = b.x.max(0) - b.x.min(0)
    return float(ext.min() / 128)


def fill(b, method="auto", h=None, tol_iso=TOL_ISO, spectral_n=None):
    """Harmonic filling of isotropic boundary data.

    ``method`` is "spectral" (circle or sphere), "fd" (any planar Jordan
    curve) or "auto".  ``spectral_n`` truncates the spectral trace at that
    Fourier mode (n = 2) or harmonic degree (n = 3); default is the grid limit.
    """
    iso = isotropy_residual(b)
    if iso >= tol_iso:
        raise IsotropyError(f"isotropy residual {iso:.3g} exceeds {tol_iso:.3g}")
    if method == "auto":
        method = "spectral" if spectral_domain(b) else "fd"
    N = b.normal
    if method == "spectral":
        ext = HarmonicExtension(trace_of(b, K=spectral_n))
        grad = boundary_gradient(b, K=spectral_n)
        values = b.u.copy()
        zeta = np.einsum("jai,ji->ja", b.A - grad, N)
        tan = b.A - grad - zeta[..., None] * N[:, None, :]
        return FillResult(b, "spectral", ext, values, grad, zeta,
                          tangential_defect=float(np.abs(tan).max()))
    if method != "fd":
        raise ValueError(f"unknown method {method!r}")
    if b.n != 2:
        raise BoundaryError("finite differences are planar only")
    h = default_h(b) if h is None else h
    sol = solve_fd(b, h=h)
    dn = normal_derivative_fd(sol, b)
    T = b.tangent / b.speed[:, None]
    du = tangential_derivative(b, b.u)
    grad = du[..., None] * T[:, None, :] + dn[..., None] * N[:, None, :]
    zeta = np.einsum("jai,ji->ja", b.A, N) - dn
    tan = b.A - grad - zeta[..., None] * N[:, None, :]
    return FillResult(b, "fd", sol, b.u.copy(), grad, zeta, h=h,
                      tangential_defect=float(np.abs(tan).max()))


def fill_with_estimate(b, method="auto", h=None, tol_iso=TOL_ISO, spectral_n=None):
    """Fill; on the FD path also solve at 2h and attach a Richardson estimate."""
    res = fill(b, method, h, tol_iso, spectral_n)
    if res.method == "fd":
        coarse = fill(b, "fd", 2 * res.h, tol_iso)
        res.error_estimate = float(np.abs(res.zeta - coarse.zeta).max() / 3.0)
    return res


@dataclass
class FillabilityReport:
    moments: object
    fill: FillResult
    verdict: str
    stage: str
    moment_verdict: str
    zeta_verdict: str
    agreement: bool
    tol_zeta: float
    pairing: dict = field(default_factory=dict)

    @property
    def exit_code(self):
        return {FILLABLE: 0, NOT_FILLABLE: 1, INDETERMINATE: 2}[self.verdict]

    def to_dict(self):
        out = {"format": 1, "verdict": self.verdict, "stage": self.stage,
               "moment_verdict": self.moment_verdict, "zeta_verdict": self.zeta_verdict,
               "agreement": self.agreement, "moments": self.moments.to_dict()}
        out["zeta"] = None if self.fill is None else dict(self.fill.summary(),
                                                          tol_zeta=self.tol_zeta)
        out["pairing"] = self.pairing
        return out


def zeta_pairing(b, basis, zeta):
    """Predicted moments: integral of h . zeta dS for every test function."""
    out = []
    for H in basis:
        h = H.value(b.x)
        out.append(float(np.sum(b.weights * h * zeta[:, H.component])))
    return np.array(out)


def _pairing_summary(report, predicted):
    mu = report.residuals
    scale = max(np.abs(mu).max(), np.abs(predicted).max())
    if scale == 0:
        return {"max_abs_difference": 0.0, "relative_difference": 0.0, "correlation": None}
    diff = float(np.abs(mu - predicted).max())
    corr = None
    if np.std(mu) > 0 and np.std(predicted) > 0:
        corr = float(np.corrcoef(mu, predicted)[0, 1])
    return {"max_abs_difference": diff, "relative_difference": diff / scale,
            "correlation": corr}


def check(b, basis=None, tol_iso=TOL_ISO, tol_mom=TOL_MOM, tol_zeta=TOL_ZETA, method="auto",
          h=None, spectral_n=None):
    """Dual-path fillability verdict."""
    if basis is None:
        basis = harmonic_basis(b.n, b.m)
    report = moment_report(b, basis, tol_iso, tol_mom)
    iso_ratio = report.isotropy / tol_iso
    if iso_ratio >= 1.0:
        verdict = classify(iso_ratio)
        return FillabilityReport(report, None, verdict, "isotropy", report.verdict, "SKIPPED",
                                 True, tol_zeta)
    res = fill_with_estimate(b, method, h, tol_iso, spectral_n)
    tol = max(tol_zeta, FD_SAFETY * res.error_estimate)
    zeta_ratio = res.zeta_inf / ((1.0 + gradient_scale(b)) * tol)
    zeta_verdict = classify(zeta_ratio)
    mv = report.verdict
    if mv == zeta_verdict:
        verdict, agree = mv, True
    else:
        verdict = INDETERMINATE
        agree = INDETERMINATE in (mv, zeta_verdict)
    predicted = zeta_pairing(b, basis, res.zeta)
    return FillabilityReport(report, res, verdict, "moments+zeta", mv, zeta_verdict, agree, tol,
                             _pairing_summary(report, predicted))


# ---------------------------------------------------------------- generators
KINDS = ("harmonic_poly_graph", "normal_perturbed", "tangential_perturbed", "random_isotropic")


def _domain(params):
    n = params.get("n", 2)
    if n == 2:
        N = int(params.get("samples", 256))
        s = periodic.grid(N)
        dom = params.get("domain", "circle")
        if dom == "circle":
            x = np.stack([np.cos(s), np.sin(s)], 1)
        elif dom == "ellipse":
            a, c = params.get("axes", (2.0, 1.0))
            x = np.stack([a * np.cos(s), c * np.sin(s)], 1)
        else:
            raise ValueError(f"unknown domain {dom!r}")
        return x, None
    if n == 3:
        nt, nph = params.get("samples", (32, 64))
        grid = SphereGrid(nt, nph)
        return grid.points.copy(), grid
    raise ValueError("n must be 2 or 3")


def _harmonic_graph(rng, x, grid, n, m, deg):
    basis = [H for H in harmonic_basis(n, 1, deg)]
    vals = np.stack([H.value(x) for H in basis], 1)
    grads = np.stack([H.gradient(x) for H in basis], 1)
    coef = rng.standard_normal((len(basis), m))
    u = vals @ coef
    A = np.einsum("jki,ka->jai", grads, coef)
    scale = np.linalg.norm(A, axis=-1).max()
    if scale > 0:
        u, A = u / scale, A / scale
    return u, A


def _smooth_profile(rng, b, m, degree=3):
    """Random band-limited scalar field on the boundary with max |.| = 1."""
    if b.n == 2:
        s = b.s
        prof = np.ones((b.N, m)) * rng.standard_normal(m)
        for k in range(1, degree + 1):
            prof += np.cos(k * s)[:, None] * rng.standard_normal(m)
            prof += np.sin(k * s)[:, None] * rng.standard_normal(m)
    else:
        basis = harmonic_basis(3, 1, degree)
        r_hat = (b.x - b.center) / b.radius
        prof = np.stack([H.value(r_hat) for H in basis], 1) @ rng.standard_normal((len(basis), m))
    return prof / np.abs(prof).max(0)


def _tangent_field(b):
    if b.n == 2:
        return b.tangent / b.speed[:, None]
    return b.grid.frame[1]


def generate(kind, seed=0, **params):
    """Deterministic test boundary of the given kind.

    Parameters (keyword): n (2 or 3), m, samples, domain ("circle" or
    "ellipse", n = 2), deg (polynomial degree), eps (defect size).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    rng = np.random.default_rng(seed)
    n = params.get("n", 2)
    m = int(params.get("m", 1))
    deg = int(params.get("deg", 4))
    x, grid = _domain(params)
    if kind == "random_isotropic":
        return _random_isotropic(rng, x, grid, m, deg)
    u, A = _harmonic_graph(rng, x, grid, n, m, deg)
    b = JetBoundary(x, u, A, grid=grid)
    eps = float(params.get("eps", 1e-3))
    if kind == "harmonic_poly_graph" or eps == 0:
        return b
    prof = _smooth_profile(rng, b, m)
    direction = b.normal if kind == "normal_perturbed" else _tangent_field(b)
    return b.replace(A=A + eps * prof[..., None] * direction[:, None, :])


def _random_isotropic(rng, x, grid, m, deg):
    """Isotropic boundary data whose normal derivative is unrelated to u."""
    if grid is None:
        N = len(x)
        s = periodic.grid(N)
        dx = periodic.derivative(x)
        A = np.zeros((N, m, 2))
        for k in range(deg + 1):
            A += np.cos(k * s)[:, None, None] * rng.standard_normal((m, 2))
            A += np.sin(k * s)[:, None, None] * rng.standard_normal((m, 2))
        rate = np.einsum("jai,ji->ja", A, dx)
        # remove the period of u along the tangent so the primitive closes
        A -= (rate.mean(0) / (dx ** 2).sum(1).mean())[None, :, None] * dx[:, None, :]
        rate = np.einsum("jai,ji->ja", A, dx)
        u, _ = periodic.antiderivative(rate)
        u = u + rng.standard_normal(m)
        return JetBoundary(x, u, A)
    b0 = JetBoundary(x, np.zeros((len(x), m)), np.zeros((len(x), m, 3)), grid=grid)
    u = _smooth_profile(rng, b0, m, deg)
    nu = _smooth_profile(rng, b0, m, deg)
    A = tangential_derivative(b0, u) + nu[..., None] * b0.normal[:, None, :]
    return JetBoundary(x, u, A, grid=grid)
