"""Closed curves in C^m that bound holomorphic disks.

A loop ``z(s)`` in C^m with an embedded projection ``w = z^g`` (the graph
coordinate) is tested against holomorphic moment conditions, lifted to
boundary data of the harmonic system on R^2 with

    x = (Re w, -Im w),   p^a = (Re z^a, Im z^a),   du^a = Re(z^a dw),

filled by the harmonic extension V, and turned back into holomorphic
functions f^a = dV/dx^1 + i dV/dx^2 of w.
"""

import json
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np
from sympy import I as sympy_I, Rational

from . import periodic
from .conslaw import FILLABLE, INDETERMINATE, NOT_FILLABLE, TOL_MOM, classify
from .dirichlet import conjugate_trace, trace_from_samples
from .errors import (BoundaryError, EmbeddingError, FormatError, HarmJetError,
                     PeriodicityError)
from .extcalc import NumericPoly, complex_space, conjugate_pair, verify_upsilon
from .fill import check as fill_check
from .jetgeom import JetBoundary

FORMAT_VERSION = 1
DEFAULT_HOLO_K = 16
CR_RADII = (0.25, 0.5, 0.75, 1.0)


class ComplexLoop:
    """Uniform samples z[j, a] of a closed curve in C^m, m >= 2.

    ``graph_coord`` is the 0-based index of the projection used as the
    disk coordinate; ``None`` picks the first embedded one, trying the last
    coordinate first.
    """

    def __init__(self, z, graph_coord=None):
        z = np.array(z, dtype=complex)
        if z.ndim != 2:
            raise BoundaryError("loop samples must have shape (N, m)")
        N, m = z.shape
        if m < 2:
            raise BoundaryError("loops need m >= 2 (m - 1 targets plus the graph coordinate)")
        if N < 16:
            raise BoundaryError("need at least 16 samples")
        if not np.all(np.isfinite(z)):
            raise BoundaryError("loop has non-finite samples")
        self.z, self.N, self.m = z, N, m
        self.z.flags.writeable = False
        if graph_coord is None:
            graph_coord = self._auto_graph_coord()
        elif not 0 <= graph_coord < m:
            raise BoundaryError(f"graph coordinate {graph_coord + 1} out of range 1..{m}")
        else:
            self._projection(graph_coord).check_embedded()
        self.graph_coord = int(graph_coord)

    def _projection(self, g):
        w = self.z[:, g]
        x = np.stack([w.real, -w.imag], 1)
        return JetBoundary(x, np.zeros((self.N, 1)), np.zeros((self.N, 1, 2)))

    def _auto_graph_coord(self):
        errors = []
        for g in [self.m - 1] + list(range(self.m - 1)):
            try:
                self._projection(g).check_embedded()
                return g
            except HarmJetError as exc:
                errors.append(f"z{g + 1}: {exc}")
        raise EmbeddingError("no coordinate projects to an embedded loop (" + "; ".join(errors) + ")")

    @property
    def w(self):
        return self.z[:, self.graph_coord]

    @property
    def targets(self):
        """Indices of the non-graph coordinates, in order."""
        return [a for a in range(self.m) if a != self.graph_coord]

    def derivative(self):
        return periodic.derivative(self.z.real) + 1j * periodic.derivative(self.z.imag)

    def to_dict(self):
        return {"format": FORMAT_VERSION, "m": self.m, "samples": self.N,
                "graph_coord": self.graph_coord + 1,
                "z": [[[float(c.real), float(c.imag)] for c in row] for row in self.z]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            m, N = int(d["m"]), int(d["samples"])
            arr = np.array(d["z"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed loop record: {exc}") from exc
        if d.get("format", FORMAT_VERSION) != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {d.get('format')}")
        if arr.shape != (N, m, 2):
            raise FormatError(f"z has shape {arr.shape}, expected ({N}, {m}, 2)")
        g = d.get("graph_coord")
        g = None if g in (None, "auto") else int(g) - 1
        return cls(arr[..., 0] + 1j * arr[..., 1], graph_coord=g)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise FormatError("loop JSON must be an object")
        return cls.from_dict(d)


@dataclass(frozen=True)
class HoloForm:
    """w^k dz^a (kind "dz") or w^k z^a dw (kind "zdw"), w the graph coordinate."""

    kind: str
    a: int
    k: int

    def label(self, g):
        w = f"(z{g + 1})^{self.k}"
        if self.kind == "dz":
            return f"{w} dz{self.a + 1}"
        return f"{w} z{self.a + 1} dz{g + 1}"


def holo_basis(loop, K=DEFAULT_HOLO_K):
    """Monomial holomorphic 1-forms up to degree K in the graph coordinate."""
    forms = [HoloForm("dz", a, k) for a in range(loop.m) for k in range(K + 1)]
    forms += [HoloForm("zdw", a, k) for a in loop.targets for k in range(K + 1)]
    return forms


def _integrand(loop, form, dz):
    w = loop.w
    wk = w ** form.k
    if form.kind == "dz":
        return wk * dz[:, form.a]
    if form.kind == "zdw":
        return wk * loop.z[:, form.a] * dz[:, loop.graph_coord]
    raise ValueError(f"unknown form kind {form.kind!r}")


def holo_moment(loop, form, dz=None):
    """Contour integral of the form over the loop (spectral trapezoid rule)."""
    if not 0 <= form.a < loop.m:
        raise BoundaryError(f"form index z{form.a + 1} exceeds m = {loop.m}")
    dz = loop.derivative() if dz is None else dz
    return complex(periodic.trapezoid(_integrand(loop, form, dz)))


def periodicity_moment(loop, a, dz=None):
    """Re of the integral of z^a dw: the change of u^a once around the loop."""
    return holo_moment(loop, HoloForm("zdw", a, 0), dz).real


@dataclass
class HoloMomentReport:
    labels: list
    moments: np.ndarray
    normalized: np.ndarray
    periodicity: dict
    tol: float
    verdict: str
    K: int

    @property
    def max_abs(self):
        return float(np.abs(self.moments).max())

    @property
    def max_normalized(self):
        return float(self.normalized.max())

    def to_dict(self):
        return {
            "format": FORMAT_VERSION, "basis_k": self.K, "tol_mom": self.tol,
            "max_abs_moment": self.max_abs, "max_normalized_moment": self.max_normalized,
            "periodicity": self.periodicity,
            "moments": [{"form": lab, "re": float(mu.real), "im": float(mu.imag),
                         "normalized": float(r)}
                        for lab, mu, r in zip(self.labels, self.moments, self.normalized)],
            "verdict": self.verdict,
        }


def holo_check(loop, K=DEFAULT_HOLO_K, tol=TOL_MOM):
    """Evaluate the holomorphic moment basis and classify the loop."""
    dz = loop.derivative()
    forms = holo_basis(loop, K)
    mus, norm = [], []
    for f in forms:
        integrand = _integrand(loop, f, dz)
        mus.append(complex(periodic.trapezoid(integrand)))
        norm.append(float(periodic.trapezoid(np.abs(integrand))))
    mus = np.array(mus)
    norm = np.array(norm)
    normalized = np.where(norm > 0, np.abs(mus) / np.where(norm > 0, norm, 1), 0.0)
    period = {f"z{a + 1}": periodicity_moment(loop, a, dz) for a in loop.targets}
    return HoloMomentReport([f.label(loop.graph_coord) for f in forms], mus, normalized, period,
                            tol, classify(float(normalized.max()) / tol), K)


def lift(loop, tol=TOL_MOM):
    """Isotropic boundary data of the harmonic system over the graph coordinate."""
    w = loop.w
    dz = loop.derivative()
    dw = dz[:, loop.graph_coord]
    x = np.stack([w.real, -w.imag], 1)
    tg = loop.targets
    A = np.stack([np.stack([loop.z[:, a].real, loop.z[:, a].imag], 1) for a in tg], 1)
    rate = np.stack([(loop.z[:, a] * dw).real for a in tg], 1)
    u, mean = periodic.antiderivative(rate)
    scale = np.abs(np.stack([loop.z[:, a] * dw for a in tg], 1)).mean(0)
    for q, a in enumerate(tg):
        if abs(mean[q]) > tol * max(scale[q], 1e-300):
            raise PeriodicityError(
                f"Re of the integral of z{a + 1} dz{loop.graph_coord + 1} is "
                f"{2 * np.pi * mean[q]:.3g}, so u{q + 1} does not close")
    return JetBoundary(x, u, A)


@dataclass
class HoloFill:
    loop: ComplexLoop
    verdict: str
    stage: str
    moments: HoloMomentReport
    boundary: JetBoundary = None
    report: object = None
    points: np.ndarray = None
    f: np.ndarray = None
    cr_residual: float = None
    trace_error: float = None
    extras: dict = field(default_factory=dict)

    @property
    def exit_code(self):
        return {FILLABLE: 0, NOT_FILLABLE: 1, INDETERMINATE: 2}[self.verdict]

    def to_dict(self):
        return {"format": FORMAT_VERSION, "verdict": self.verdict, "stage": self.stage,
                "graph_coord": self.loop.graph_coord + 1,
                "cr_residual": self.cr_residual, "trace_error": self.trace_error,
                "moments": self.moments.to_dict(),
                "fill": None if self.report is None else self.report.to_dict()}

    def to_tsv(self):
        """Rows (x, y, Re f, Im f per target) on the disk grid."""
        if self.f is None:
            return ""
        tg = self.loop.targets
        head = "x\ty" + "".join(f"\tre_f{a + 1}\tim_f{a + 1}" for a in tg)
        lines = [head]
        for p, fv in zip(self.points, self.f):
            vals = [p[0], p[1]]
            for c in fv:
                vals += [c.real, c.imag]
            lines.append("\t".join(repr(float(t)) for t in vals))
        return "\n".join(lines) + "\n"


def _cr_spectral(ext, n_theta):
    """Max |df/d(conj w)| on concentric circles of the spectral disk."""
    tr = ext.trace
    th = periodic.grid(n_theta)
    worst = 0.0
    for rho in CR_RADII:
        pts = tr.center + rho * tr.radius * np.stack([np.cos(th), np.sin(th)], 1)
        g = ext.gradient(pts)
        f = g[..., 0] + 1j * g[..., 1]
        F = np.fft.fft(f, axis=0) / n_theta
        k = np.fft.fftfreq(n_theta, 1.0 / n_theta)
        pos = k > 0
        mult = np.where(pos, k / (rho * tr.radius), 0.0)
        # positive modes e^{ik theta} are powers of conj(w) on this circle
        coef = F * mult[:, None]
        vals = np.fft.ifft(np.roll(coef, -1, axis=0), axis=0) * n_theta
        worst = max(worst, float(np.abs(vals).max()))
    return worst


def _cr_fd(sol):
    """Max central-difference |df/d(conj w)| where a 2-node margin is known."""
    V = sol.V
    h = sol.h
    known = sol.known
    ok = known.copy()
    for di, dj in ((2, 0), (-2, 0), (0, 2), (0, -2), (1, 1), (1, -1), (-1, 1), (-1, -1),
                   (1, 0), (-1, 0), (0, 1), (0, -1)):
        ok &= np.roll(np.roll(known, -di, 0), -dj, 1)
    Vx = (np.roll(V, -1, 0) - np.roll(V, 1, 0)) / (2 * h)
    Vy = (np.roll(V, -1, 1) - np.roll(V, 1, 1)) / (2 * h)
    f = Vx + 1j * Vy
    fx = (np.roll(f, -1, 0) - np.roll(f, 1, 0)) / (2 * h)
    fy = (np.roll(f, -1, 1) - np.roll(f, 1, 1)) / (2 * h)
    d = 0.5 * (fx - 1j * fy)
    return float(np.abs(d[ok]).max()) if ok.any() else 0.0


def fill_holo(loop, K=DEFAULT_HOLO_K, tol=TOL_MOM, n_r=17, n_s=64, h=None):
    """Moments, lift, harmonic fill and reconstruction of the holomorphic disk."""
    mom = holo_check(loop, K, tol)
    if mom.verdict != FILLABLE:
        return HoloFill(loop, mom.verdict, "moments", mom)
    b = lift(loop, tol)
    rep = fill_check(b, h=h)
    out = HoloFill(loop, rep.verdict, "fill", mom, b, rep)
    if rep.fill is None:
        return out
    res = rep.fill
    grad_b = res.gradient
    f_b = grad_b[..., 0] + 1j * grad_b[..., 1]
    z_t = loop.z[:, loop.targets]
    out.trace_error = float(np.abs(f_b - z_t).max())
    if res.method == "spectral":
        ext = res.extension
        pts, _ = ext.polar_grid(n_r, n_s)
        g = ext.gradient(pts)
        out.cr_residual = _cr_spectral(ext, max(loop.N, 64))
    else:
        sol = res.extension
        pts, _ = sol.nodes()
        ii = np.rint((pts - sol.origin) / sol.h).astype(int)
        Vx = (sol.V[ii[:, 0] + 1, ii[:, 1]] - sol.V[ii[:, 0] - 1, ii[:, 1]]) / (2 * sol.h)
        Vy = (sol.V[ii[:, 0], ii[:, 1] + 1] - sol.V[ii[:, 0], ii[:, 1] - 1]) / (2 * sol.h)
        g = np.stack([Vx, Vy], -1)
        keep = np.all(np.isfinite(g), axis=(1, 2))
        pts, g = pts[keep], g[keep]
        out.cr_residual = _cr_fd(sol)
    out.points = pts
    out.f = g[..., 0] + 1j * g[..., 1]
    return out


@dataclass
class ConjugateLaw:
    K: object
    H: object
    upsilon: object
    trace_error: float


def conjugate_law(f, m=2, n_check=64):
    """Split a holomorphic polynomial in z^m into (K, H) = (Re, Im) on the base.

    ``f`` is a polynomial over :func:`complex_space` or a coefficient list
    [c0, c1, ...] for sum c_k (z^m)^k.  The identities of the induced law
    are verified exactly, and the harmonic-conjugate multiplier -i sgn(k) is
    checked to map the unit-circle trace of H to that of K minus its mean.
    """
    space = complex_space(m)
    if isinstance(f, (list, tuple)):
        zm = space.var(f"z{m}")
        poly = space.ring.zero
        for k, c in enumerate(f):
            poly += _exact(space, c) * zm ** k
        f = poly
    K, H = conjugate_pair(f, m)
    ups = verify_upsilon([f] + [space.coerce(0)] * (m - 2), max_degree=_degree_cap(f))
    s = periodic.grid(n_check)
    x = np.stack([np.cos(s), np.sin(s)], 1)
    nv = K.ring.ngens
    vals = [x[:, 0], x[:, 1]] + [np.zeros(n_check)] * (nv - 2)
    kv = np.real(NumericPoly(K)(vals)) * np.ones(n_check)
    hv = np.real(NumericPoly(H)(vals)) * np.ones(n_check)
    tr = trace_from_samples(x, hv)
    conj = conjugate_trace(tr).values_at_angles(s)[:, 0]
    err = float(np.abs(conj - (kv - kv.mean())).max())
    return ConjugateLaw(K, H, ups, err)


def _exact(space, c):
    """Exact Gaussian rational from an int, Fraction, sympy number or complex float."""
    c = complex(c) if isinstance(c, (complex, np.complexfloating)) else c
    if isinstance(c, complex):
        expr = Rational(Fraction(c.real)) + sympy_I * Rational(Fraction(c.imag))
        return space.ring.ground_new(space.ring.domain.from_sympy(expr))
    return space.coerce(c)


def _degree_cap(f):
    deg = max((sum(mon) for mon in f.itermonoms()), default=0)
    return max(8, deg + 2)


def generate_loop(seed=0, m=2, deg=4, samples=256, eps=0.0, power=1):
    """Boundary of a random polynomial holomorphic disk over w = e^{-is}.

    z^a = sum_{k<=deg} c_k w^k for the m - 1 targets, w in the last slot.
    ``eps`` adds eps * conj(w)^power to the first target.
    """
    rng = np.random.default_rng(seed)
    s = periodic.grid(samples)
    w = np.exp(-1j * s)
    z = np.zeros((samples, m), dtype=complex)
    for a in range(m - 1):
        c = (rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1))
        c /= np.arange(1, deg + 2)
        z[:, a] = np.polyval(c[::-1], w)
    z[:, 0] += eps * np.conj(w) ** power
    z[:, m - 1] = w
    return ComplexLoop(z, graph_coord=m - 1)
