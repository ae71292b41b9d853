"""Exact exterior calculus with polynomial coefficients.

Forms live on a :class:`VarSpace`, an ordered list of real coordinates.  The
jet space ``J^1(R^n, R^m)`` has coordinates ``x1..xn, u1..um, p1_1..pm_n``;
the complex space ``C^m`` used for holomorphic disks has ``z1..zm`` and the
conjugates ``zb1..zbm``.  Coefficients are sympy sparse polynomials over the
Gaussian rationals, so every sign is decided in exact arithmetic.

A form is stored as a map from strictly increasing tuples of variable
indices (the differentials) to nonzero polynomial coefficients.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from sympy import Symbol
from sympy.parsing.sympy_parser import parse_expr
from sympy.polys.domains import QQ_I
from sympy.polys.rings import PolyElement, PolyRing

from .errors import (DegreeCapError, DegreeError, FormatError,
                     NotBaseFormError, NotHarmonicError, NotHolomorphicError,
                     SpaceMismatchError)

I = QQ_I(0, 1)
DEFAULT_MAX_DEGREE = 8


class VarSpace:
    """Ordered coordinate system carrying a polynomial ring.

    ``n_base`` is the number of leading base coordinates (``x``); the flat
    Hodge star acts on forms built only from their differentials.
    """

    def __init__(self, names, n_base=0, max_degree=DEFAULT_MAX_DEGREE,
                 n=None, m=None, kind="generic"):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        self.names = names
        self.n_base = n_base
        self.max_degree = max_degree
        self.n = n
        self.m = m
        self.kind = kind
        self.ring = PolyRing(",".join(names), QQ_I)
        self.gens = self.ring.gens
        self._index = {name: k for k, name in enumerate(names)}

    def __eq__(self, other):
        return isinstance(other, VarSpace) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VarSpace({', '.join(self.names)})"

    @property
    def dim(self):
        return len(self.names)

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise SpaceMismatchError(f"no variable {name!r} in {self}") from None

    def var(self, name):
        return self.gens[self.index(name)]

    def const(self, c):
        return self.ring.ground_new(self.ring.domain.convert(c))

    def zero(self, degree=0):
        return PolyForm(self, degree)

    def function(self, poly):
        """Degree-0 form with coefficient ``poly``."""
        return PolyForm(self, 0, {(): self.coerce(poly)})

    def d(self, name):
        return PolyForm(self, 1, {(self.index(name),): self.ring.one})

    def coerce(self, c):
        if isinstance(c, PolyElement):
            if c.ring is self.ring:
                return c
            try:
                return c.set_ring(self.ring)
            except Exception as exc:
                raise SpaceMismatchError(
                    f"polynomial over {c.ring.symbols} does not embed in {self}") from exc
        if isinstance(c, (float, complex, np.floating, np.complexfloating)):
            raise TypeError("floating point coefficients are not exact")
        try:
            return self.const(c)
        except Exception as exc:
            raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient") from exc

    # jet-space conveniences -------------------------------------------------
    def _need_jet(self):
        if self.kind != "jet":
            raise SpaceMismatchError(f"{self} is not a jet space")

    def x(self, i):
        return self.gens[i]

    def u(self, a):
        self._need_jet()
        return self.gens[self.n + a]

    def p(self, a, i):
        self._need_jet()
        return self.gens[self.n + self.m + a * self.n + i]

    def dx(self, i):
        return PolyForm(self, 1, {(i,): self.ring.one})

    def omega(self):
        """Volume form dx1 ^ ... ^ dxn of the base."""
        return PolyForm(self, self.n_base, {tuple(range(self.n_base)): self.ring.one})

    def dx_hat(self, i):
        """``*dx^i``, i.e. ``(-1)^(i) dx^1 ^ ... (omit i) ... ^ dx^n`` with 0-based i."""
        return base_star(self.dx(i))

    def theta(self, a):
        """Contact form du^a - sum_i p^a_i dx^i."""
        self._need_jet()
        form = PolyForm(self, 1, {(self.n + a,): self.ring.one})
        for i in range(self.n):
            form = form - self.function(self.p(a, i)) * self.dx(i)
        return form

    def psi(self, a):
        """sum_i dp^a_i ^ *dx^i."""
        self._need_jet()
        out = self.zero(self.n)
        for i in range(self.n):
            dp = PolyForm(self, 1, {(self.n + self.m + a * self.n + i,): self.ring.one})
            out = out + wedge(dp, self.dx_hat(i))
        return out


_SPACES = {}


def _cached_space(key, factory):
    space = _SPACES.get(key)
    if space is None:
        space = _SPACES[key] = factory()
    return space


def jet_space(n, m, max_degree=DEFAULT_MAX_DEGREE):
    """Coordinates ``(x^i, u^a, p^a_i)`` of J^1(R^n, R^m)."""
    names = ([f"x{i + 1}" for i in range(n)] + [f"u{a + 1}" for a in range(m)]
             + [f"p{a + 1}_{i + 1}" for a in range(m) for i in range(n)])
    return _cached_space(("jet", n, m, max_degree), lambda: VarSpace(
        names, n_base=n, max_degree=max_degree, n=n, m=m, kind="jet"))


def base_space(n, max_degree=DEFAULT_MAX_DEGREE):
    names = [f"x{i + 1}" for i in range(n)]
    return _cached_space(("base", n, max_degree), lambda: VarSpace(
        names, n_base=n, max_degree=max_degree, n=n, m=0, kind="base"))


def complex_space(m, max_degree=DEFAULT_MAX_DEGREE):
    """``C^m`` as a real manifold with coordinates z^a and their conjugates."""
    names = [f"z{a + 1}" for a in range(m)] + [f"zb{a + 1}" for a in range(m)]
    return _cached_space(("complex", m, max_degree), lambda: VarSpace(
        names, max_degree=max_degree, m=m, kind="complex"))


def _canonical(idx):
    """Sort a differential index tuple, returning (sign, sorted) or (0, None)."""
    if len(set(idx)) != len(idx):
        return 0, None
    idx = list(idx)
    sign = 1
    # insertion sort, counting transpositions
    for k in range(1, len(idx)):
        j = k
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


def total_degree(poly):
    return max((sum(mon) for mon in poly.itermonoms()), default=0)


class PolyForm:
    """Differential form with exact polynomial coefficients."""

    __slots__ = ("space", "degree", "terms")

    def __init__(self, space, degree, terms=None):
        if degree < 0:
            raise DegreeError("form degree must be nonnegative")
        self.space = space
        self.degree = degree
        clean = {}
        for idx, coeff in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise DegreeError(f"term {idx} does not have degree {degree}")
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise DegreeError(f"term {idx} is not in canonical order")
            coeff = space.coerce(coeff)
            if coeff:
                if total_degree(coeff) > space.max_degree:
                    raise DegreeCapError(
                        f"coefficient degree {total_degree(coeff)} exceeds cap "
                        f"{space.max_degree}")
                clean[idx] = coeff
        self.terms = clean

    # construction helpers --------------------------------------------------
    @classmethod
    def _accumulate(cls, space, degree, items):
        acc = {}
        for idx, coeff in items:
            prev = acc.get(idx)
            acc[idx] = coeff if prev is None else prev + coeff
        return cls(space, degree, acc)

    def _check(self, other):
        if not isinstance(other, PolyForm):
            raise TypeError("expected a PolyForm")
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if other.degree != self.degree:
            raise DegreeError(f"cannot add degree {self.degree} and {other.degree}")
        return PolyForm._accumulate(self.space, self.degree,
                                    list(self.terms.items()) + list(other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return PolyForm(self.space, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PolyForm):
            return wedge(self, other)
        c = self.space.coerce(other)
        return PolyForm(self.space, self.degree, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, other):
        c = self.space.coerce(other)
        return PolyForm(self.space, self.degree, {k: c * v for k, v in self.terms.items()})

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, PolyForm) or other.space != self.space:
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        return to_sexpr(self)

    def map_coefficients(self, fn):
        return PolyForm(self.space, self.degree, {k: fn(c) for k, c in self.terms.items()})

    def real(self):
        return self.map_coefficients(_real_part)

    def imag(self):
        return self.map_coefficients(_imag_part)

    def differentials(self):
        """Set of variable indices appearing among the differentials."""
        return {k for idx in self.terms for k in idx}

    def is_base(self):
        return all(k < self.space.n_base for k in self.differentials())


def _real_part(poly):
    return poly.ring.from_dict({mon: QQ_I(c.x, 0) for mon, c in poly.items() if c.x})


def _imag_part(poly):
    return poly.ring.from_dict({mon: QQ_I(c.y, 0) for mon, c in poly.items() if c.y})


def wedge(a, b):
    a._check(b)
    items = []
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            sign, idx = _canonical(ia + ib)
            if sign:
                items.append((idx, ca * cb if sign > 0 else -(ca * cb)))
    return PolyForm._accumulate(a.space, a.degree + b.degree, items)


def extd(a):
    """Exterior derivative."""
    space = a.space
    items = []
    for idx, coeff in a.terms.items():
        present = set()
        for mon in coeff.itermonoms():
            present.update(k for k, e in enumerate(mon) if e)
        for k in sorted(present):
            sign, new = _canonical((k,) + idx)
            if sign:
                dc = coeff.diff(space.gens[k])
                items.append((new, dc if sign > 0 else -dc))
    return PolyForm._accumulate(space, a.degree + 1, items)


class PolyMap:
    """Polynomial map ``source -> target`` given by one polynomial (on the
    source) per target coordinate."""

    def __init__(self, source, target, images):
        if isinstance(images, dict):
            images = [images[name] for name in target.names]
        images = tuple(source.coerce(c) for c in images)
        if len(images) != target.dim:
            raise SpaceMismatchError(
                f"map needs {target.dim} component polynomials, got {len(images)}")
        self.source = source
        self.target = target
        self.images = images
        self._dimages = tuple(extd(source.function(c)) for c in images)

    @classmethod
    def identity(cls, space):
        return cls(space, space, space.gens)

    def substitute(self, poly):
        """Compose a target polynomial with the map."""
        src = self.source.ring
        out = src.zero
        powers = {}
        for mon, coeff in poly.items():
            term = src.ground_new(coeff)
            for k, e in enumerate(mon):
                if e:
                    key = (k, e)
                    if key not in powers:
                        powers[key] = self.images[k] ** e
                    term = term * powers[key]
            out += term
        return out


def pullback(F, a):
    if a.space != F.target:
        raise SpaceMismatchError(f"form lives on {a.space}, map targets {F.target}")
    out = F.source.zero(a.degree)
    for idx, coeff in a.terms.items():
        piece = F.source.function(F.substitute(coeff))
        for k in idx:
            piece = wedge(piece, F._dimages[k])
        out = out + piece
    return out


def base_star(a):
    """Flat Hodge star on forms built from base differentials only."""
    space = a.space
    n = space.n_base
    if not a.is_base():
        raise NotBaseFormError("Hodge star needs a form in dx only")
    items = []
    for idx, coeff in a.terms.items():
        comp = tuple(k for k in range(n) if k not in idx)
        sign, _ = _canonical(idx + comp)
        items.append((comp, coeff if sign > 0 else -coeff))
    return PolyForm._accumulate(space, n - a.degree, items)


def laplacian(poly, space):
    out = space.ring.zero
    for i in range(space.n_base):
        out += poly.diff(space.gens[i]).diff(space.gens[i])
    return out


def is_harmonic(poly, space):
    return not laplacian(space.coerce(poly), space)


def star_d(poly, space):
    """``*dH`` for a function H of the base coordinates."""
    return base_star(extd(space.function(poly)))


# conservation laws -------------------------------------------------------

def _as_polys(space, values, degree=None):
    out = []
    for v in values:
        if isinstance(v, PolyForm):
            if v.space != space:
                raise SpaceMismatchError(f"{v.space} vs {space}")
            if degree is not None and not v.is_zero() and v.degree != degree:
                raise DegreeError(f"expected degree {degree}, got {v.degree}")
            out.append(v)
        else:
            if degree not in (None, 0):
                raise DegreeError(f"expected a degree-{degree} form")
            out.append(space.function(v))
    if len(out) != space.m:
        raise DegreeError(f"expected {space.m} components, got {len(out)}")
    return out


def _functions(space, H):
    return [h.terms.get((), space.ring.zero) if isinstance(h, PolyForm) else space.coerce(h)
            for h in H]


def assemble_general_law(space, rho, sigma, H):
    """``sum_a rho^a ^ theta^a + sigma^a ^ dtheta^a - H^a psi^a``."""
    n = space.n
    rho = _as_polys(space, rho, n - 1)
    sigma = _as_polys(space, sigma, n - 2)
    Hs = _functions(space, H)
    out = space.zero(n)
    for a in range(space.m):
        th = space.theta(a)
        out = out + wedge(rho[a], th) + wedge(sigma[a], extd(th)) - space.function(Hs[a]) * space.psi(a)
    return out


@dataclass
class SigmaElimination:
    rho: list
    H: list
    exact: PolyForm
    primitive: PolyForm = field(repr=False)


def sigma_eliminate(space, rho, sigma, H):
    """Rewrite a general ideal element with sigma = 0 modulo an exact form.

    Returns the modified rho' = rho - (-1)^(n-2) d sigma and the exact part
    (-1)^(n-2) d(sum sigma ^ theta), after checking that
    ``Phi = sum rho' ^ theta - H psi + exact`` holds exactly.
    """
    n = space.n
    rho = _as_polys(space, rho, n - 1)
    sigma = _as_polys(space, sigma, n - 2)
    Hs = _functions(space, H)
    sgn = (-1) ** (n - 2)
    rho_p = [rho[a] - sgn * extd(sigma[a]) for a in range(space.m)]
    primitive = space.zero(n - 1)
    for a in range(space.m):
        primitive = primitive + wedge(sigma[a], space.theta(a))
    exact = sgn * extd(primitive)
    phi = assemble_general_law(space, rho, sigma, Hs)
    rebuilt = assemble_general_law(space, rho_p, [space.zero(n - 2)] * space.m, Hs) + exact
    if phi != rebuilt:
        from .errors import IdentityFailure
        raise IdentityFailure("sigma elimination identity does not hold")
    return SigmaElimination(rho_p, Hs, exact, primitive)


def normal_form_rho(space, h):
    return (-1) ** space.n * star_d(h, space)


def normal_form_law(space, H):
    """Closed n-form ``sum rho^a ^ theta^a + H^a psi^a``, rho = (-1)^n * dH.

    Built through :func:`assemble_general_law` with the H-slot negated.
    """
    Hs = _functions(space, H)
    rho = [normal_form_rho(space, h) for h in Hs]
    return assemble_general_law(space, rho, [space.zero(space.n - 2)] * space.m,
                                [-h for h in Hs])


def phi_antiderivative(space, H):
    """Undifferentiated law ``sum_a H^a sum_i p^a_i *dx^i - u^a *dH^a``."""
    Hs = _functions(space, H)
    out = space.zero(space.n - 1)
    for a, h in enumerate(Hs):
        if not h:
            continue
        if laplacian(h, space):
            raise NotHarmonicError(f"component {a + 1} is not harmonic")
        for i in range(space.n):
            out = out + space.function(h * space.p(a, i)) * space.dx_hat(i)
        out = out - space.function(space.u(a)) * star_d(h, space)
    return out


# holomorphic extension ---------------------------------------------------

def zeta_map(m, max_degree=DEFAULT_MAX_DEGREE):
    """Projection J^1(R^2, R^(m-1)) -> C^m with z^a = p^a_1 + i p^a_2,
    z^m = x^1 - i x^2."""
    src = jet_space(2, m - 1, max_degree)
    tgt = complex_space(m, max_degree)
    x1, x2 = src.x(0), src.x(1)
    z, zb = [], []
    for a in range(m - 1):
        p1, p2 = src.p(a, 0), src.p(a, 1)
        z.append(p1 + I * p2)
        zb.append(p1 - I * p2)
    z.append(x1 - I * x2)
    zb.append(x1 + I * x2)
    return PolyMap(src, tgt, z + zb)


@dataclass
class IdentityCheck:
    name: str
    holds: bool
    as_printed: bool = False
    difference: object = field(default=None, repr=False)

    @property
    def status(self):
        if self.as_printed:
            return "MATCHES-AS-PRINTED" if self.holds else "DIFFERS-AS-PRINTED"
        return "PASS" if self.holds else "FAIL"


def _check(name, lhs, rhs, as_printed=False):
    diff = lhs - rhs
    return IdentityCheck(name, diff.is_zero(), as_printed, diff)


def _holomorphic_in_last(f, tgt):
    m = tgt.m
    last = m - 1
    f = tgt.coerce(f)
    for mon in f.itermonoms():
        if any(e for k, e in enumerate(mon) if k != last):
            raise NotHolomorphicError("law coefficient must be a polynomial in z^m only")
    return f


def conjugate_pair(f, m, max_degree=DEFAULT_MAX_DEGREE):
    """Split f(z^m) pulled back to the base into (K, H) = (Re, Im)."""
    zeta = zeta_map(m, max_degree)
    g = zeta.substitute(_holomorphic_in_last(f, zeta.target))
    return _real_part(g), _imag_part(g)


@dataclass
class UpsilonReport:
    checks: list

    @property
    def all_hold(self):
        return all(c.holds for c in self.checks if not c.as_printed)

    def __iter__(self):
        return iter(self.checks)


def verify_upsilon(fs, max_degree=DEFAULT_MAX_DEGREE):
    """Check the holomorphic-law identities for Upsilon = sum f^a(z^m) dz^a ^ dz^m.

    ``fs`` holds m-1 polynomials in z^m (the holomorphic K^a + i H^a).  The
    identities are checked in their sign-correct form; the variants as they
    are usually displayed (dtheta - i psi, K dtheta + H psi, exact part
    d(H theta)) are reported alongside, flagged ``as_printed``.
    """
    m = len(fs) + 1
    zeta = zeta_map(m, max_degree)
    src, tgt = zeta.source, zeta.target
    checks = []
    dzm = tgt.d(f"z{m}")
    omega_c = tgt.function(-I / 2) * wedge(dzm, tgt.d(f"zb{m}"))
    checks.append(_check("zeta*(Omega) = omega", pullback(zeta, omega_c), src.omega()))

    upsilon_real = src.zero(2)
    for a, f in enumerate(fs):
        f = _holomorphic_in_last(f, tgt)
        dza = tgt.d(f"z{a + 1}")
        ups = tgt.function(f) * wedge(dza, dzm)
        checks.append(_check(f"d(Upsilon^{a + 1}) = 0", extd(ups), tgt.zero(3)))
        th, dth, psi = src.theta(a), extd(src.theta(a)), src.psi(a)
        base = pullback(zeta, wedge(dza, dzm))
        checks.append(_check(f"zeta*(dz^{a + 1} ^ dz^m) = -(dtheta^{a + 1} + i psi^{a + 1})",
                             base, -(dth + I * psi)))
        checks.append(_check(f"zeta*(dz^{a + 1} ^ dz^m) = dtheta^{a + 1} - i psi^{a + 1}",
                             base, dth - I * psi, as_printed=True))
        K, H = conjugate_pair(f, m, max_degree)
        Kf, Hf = src.function(K), src.function(H)
        re_ups = pullback(zeta, ups).real()
        upsilon_real = upsilon_real + re_ups
        checks.append(_check(f"zeta*(Re Upsilon^{a + 1}) = -K dtheta + H psi",
                             re_ups, -(Kf * dth) + Hf * psi))
        checks.append(_check(f"zeta*(Re Upsilon^{a + 1}) = K dtheta + H psi",
                             re_ups, Kf * dth + Hf * psi, as_printed=True))
        rho = star_d(H, src)
        checks.append(_check(f"d K = *d H (component {a + 1})",
                             extd(Kf), rho))
        law = wedge(rho, th) + Hf * psi
        checks.append(_check(f"zeta*(Re Upsilon^{a + 1}) = rho^theta + H psi - d(K theta), rho = *dH",
                             re_ups, law - extd(Kf * th)))
        checks.append(_check(f"zeta*(Re Upsilon^{a + 1}) = rho^theta + H psi + d(H theta), rho = *dH",
                             re_ups, law + extd(Hf * th), as_printed=True))
        checks.append(_check(f"rho^theta + H psi closed (component {a + 1})",
                             extd(law), src.zero(3)))
    return UpsilonReport(checks)


# numeric evaluation --------------------------------------------------------

class NumericPoly:
    """Floating point evaluator for an exact polynomial."""

    def __init__(self, poly):
        items = list(poly.items())
        self.nvars = poly.ring.ngens
        self.monoms = np.array([mon for mon, _ in items], dtype=int).reshape(len(items), self.nvars)
        self.coeffs = np.array([complex(float(c.x), float(c.y)) for _, c in items])
        self.is_real = bool(np.all(self.coeffs.imag == 0))

    def __call__(self, values):
        """Evaluate; ``values`` is a sequence with one array per variable."""
        if not len(self.coeffs):
            shape = np.broadcast(*[np.asarray(v) for v in values if v is not None]).shape
            return np.zeros(shape)
        cache = {}
        total = 0
        for mon, c in zip(self.monoms, self.coeffs):
            term = c
            for k in np.nonzero(mon)[0]:
                key = (k, mon[k])
                if key not in cache:
                    if values[k] is None:
                        raise SpaceMismatchError(f"no values supplied for variable {k}")
                    cache[key] = np.asarray(values[k], dtype=float) ** mon[k]
                term = term * cache[key]
            total = total + term
        total = np.asarray(total)
        return total.real if self.is_real else total


def pullback_density(form, values, tangents):
    """Density of the pullback of ``form`` to a parametrized k-dimensional set.

    ``values[v]`` are the sampled coordinates, ``tangents[j][v]`` the partial
    derivatives of coordinate v along parameter j (k = form.degree).  Entries
    may be None for coordinates the form never differentiates.
    """
    k = form.degree
    if len(tangents) != k:
        raise DegreeError(f"need {k} tangent directions, got {len(tangents)}")
    total = 0.0
    for idx, coeff in form.terms.items():
        c = NumericPoly(coeff)(values)
        if k == 0:
            total = total + c
            continue
        mat = []
        for v in idx:
            row = []
            for j in range(k):
                t = tangents[j][v]
                if t is None:
                    raise SpaceMismatchError(f"missing tangent for variable {form.space.names[v]}")
                row.append(np.asarray(t, dtype=float))
            mat.append(row)
        total = total + c * _det(mat)
    return total


def _det(mat):
    k = len(mat)
    if k == 1:
        return mat[0][0]
    if k == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    out = 0
    for j in range(k):
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        out = out + (-1) ** j * mat[0][j] * _det(minor)
    return out


# serialization -----------------------------------------------------------

def _fmt_rational(q):
    q = Fraction(int(q.numerator), int(q.denominator))
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_coeff(c):
    re_, im_ = Fraction(int(c.x.numerator), int(c.x.denominator)), Fraction(int(c.y.numerator), int(c.y.denominator))
    if im_ == 0:
        return _fmt_rational(re_)
    if re_ == 0:
        return f"{_fmt_rational(im_)}*I"
    sign = "+" if im_ > 0 else "-"
    return f"({_fmt_rational(re_)}{sign}{_fmt_rational(abs(im_))}*I)"


def poly_to_str(poly):
    names = poly.ring.symbols
    parts = []
    for mon, c in sorted(poly.items(), reverse=True):
        factors = []
        for k, e in enumerate(mon):
            if e == 1:
                factors.append(str(names[k]))
            elif e:
                factors.append(f"{names[k]}^{e}")
        coeff = _fmt_coeff(c)
        if factors:
            if coeff == "1":
                body = "*".join(factors)
            elif coeff == "-1":
                body = "-" + "*".join(factors)
            else:
                body = coeff + "*" + "*".join(factors)
        else:
            body = coeff
        parts.append(body)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def poly_from_str(text, space):
    local = {name: Symbol(name) for name in space.names}
    try:
        expr = parse_expr(text.replace("^", "**"), local_dict=local)
        return space.ring.from_expr(expr)
    except Exception as exc:
        raise FormatError(f"cannot parse polynomial {text!r}") from exc


def to_sexpr(form):
    """``(form deg 2 ((dx1 dx2) poly "x1^2 - 1") ...)``."""
    names = form.space.names
    parts = [f"(form deg {form.degree}"]
    for idx in sorted(form.terms):
        diffs = " ".join("d" + names[k] for k in idx)
        parts.append(f" (({diffs}) poly \"{poly_to_str(form.terms[idx])}\")")
    return "".join(parts) + ")"


_TOKEN = re.compile(r'\s*(\(|\)|"[^"]*"|[^\s()"]+)')


def _tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise FormatError(f"bad s-expression near {text[pos:pos + 20]!r}")
        out.append(mt.group(1))
        pos = mt.end()
    return out


def _parse(tokens):
    tok = tokens.pop(0)
    if tok == "(":
        lst = []
        while tokens and tokens[0] != ")":
            lst.append(_parse(tokens))
        if not tokens:
            raise FormatError("unbalanced parentheses")
        tokens.pop(0)
        return lst
    if tok == ")":
        raise FormatError("unexpected ')'")
    return tok


def from_sexpr(text, space):
    tokens = _tokenize(text)
    tree = _parse(tokens)
    if tokens or not isinstance(tree, list) or tree[:2] != ["form", "deg"]:
        raise FormatError("expected (form deg K ...)")
    degree = int(tree[2])
    items = []
    for term in tree[3:]:
        if len(term) != 3 or term[1] != "poly":
            raise FormatError(f"bad term {term!r}")
        diffs = [space.index(d[1:]) for d in term[0]]
        sign, idx = _canonical(tuple(diffs))
        if not sign:
            continue
        coeff = poly_from_str(term[2].strip('"'), space)
        items.append((idx, coeff if sign > 0 else -coeff))
    return PolyForm._accumulate(space, degree, items)


# the identity regression -------------------------------------------------

def harmonic_polynomials(n, max_degree, space=None):
    """Exact basis of harmonic polynomials of degree <= max_degree on R^n."""
    from .harmonics import harmonic_polys_2d, solid_harmonic_polys
    if n == 2:
        polys = [p for _, p in harmonic_polys_2d(max_degree)]
    elif n == 3:
        polys = [p for _, p in solid_harmonic_polys(max_degree)]
    else:
        raise ValueError("n must be 2 or 3")
    if space is None:
        return polys
    return [space.coerce(p) for p in polys]


def _rand_poly(rng, space, degree, nterms=3):
    out = space.ring.zero
    for _ in range(nterms):
        mon = [0] * space.dim
        for _ in range(int(rng.integers(0, degree + 1))):
            mon[int(rng.integers(0, space.dim))] += 1
        c = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        out += space.ring.from_dict({tuple(mon): space.ring.domain.convert(c)})
    return out


def _rand_form(rng, space, degree, poly_degree=2):
    items = []
    for idx in combinations(range(space.dim), degree):
        if rng.random() < 0.3 or degree == 0:
            items.append((idx, _rand_poly(rng, space, poly_degree)))
    return PolyForm._accumulate(space, degree, items)


def identity_suite(max_poly_degree=6, seed=0):
    """Run every symbolic identity; returns a list of :class:`IdentityCheck`."""
    rng = np.random.default_rng(seed)
    checks = []
    cap = max(DEFAULT_MAX_DEGREE, max_poly_degree + 2)

    for n in (2, 3):
        sp = jet_space(n, 2, cap)
        ok = True
        for deg in range(0, n + 1):
            for _ in range(3):
                ok &= extd(extd(_rand_form(rng, sp, deg))).is_zero()
        checks.append(IdentityCheck(f"d(d(a)) = 0 on random forms, n={n}", ok))

        ok = True
        for a in range(sp.m):
            expected = sp.zero(2)
            for i in range(n):
                dp = PolyForm(sp, 1, {(sp.index(f"p{a + 1}_{i + 1}"),): 1})
                expected = expected - wedge(dp, sp.dx(i))
            ok &= extd(sp.theta(a)) == expected
        checks.append(IdentityCheck(f"d theta^a = -sum_i dp^a_i ^ dx^i, n={n}", ok))

        ok = True
        for k in range(n + 1):
            for idx in combinations(range(n), k):
                f = PolyForm(sp, k, {idx: sp.x(0) + 1})
                ok &= base_star(base_star(f)) == (-1) ** (k * (n - k)) * f
        checks.append(IdentityCheck(f"** = (-1)^(k(n-k)) on base forms, n={n}", ok))

        ok = all(base_star(sp.dx(i)) == sp.dx_hat(i) for i in range(n))
        hat_ok = True
        for i in range(n):
            rest = [j for j in range(n) if j != i]
            expect = PolyForm(sp, n - 1, {tuple(rest): (-1) ** i})
            hat_ok &= sp.dx_hat(i) == expect
        checks.append(IdentityCheck(f"*dx^i = (-1)^(i-1) dx^1^..^(omit i)^..^dx^n, n={n}", ok and hat_ok))

        polys = harmonic_polynomials(n, max_poly_degree, sp)
        closed = anti = True
        for h in polys:
            for comp in range(sp.m):
                H = [sp.ring.zero] * sp.m
                H[comp] = h
                law = normal_form_law(sp, H)
                closed &= extd(law).is_zero()
                anti &= extd(phi_antiderivative(sp, H)) == law
        # a genuinely vector-valued H
        H = [polys[-1], polys[len(polys) // 2]]
        law = normal_form_law(sp, H)
        closed &= extd(law).is_zero()
        anti &= extd(phi_antiderivative(sp, H)) == law
        checks.append(IdentityCheck(
            f"d(Phi_H) = 0 for harmonic H of degree <= {max_poly_degree}, n={n}", closed))
        checks.append(IdentityCheck(
            f"d(phi_H) = Phi_H for harmonic H of degree <= {max_poly_degree}, n={n}", anti))

        ok = True
        for _ in range(3):
            rho = [_rand_form(rng, sp, n - 1) for _ in range(sp.m)]
            sigma = [_rand_form(rng, sp, n - 2) for _ in range(sp.m)]
            H = [_rand_poly(rng, sp, 2) for _ in range(sp.m)]
            try:
                sigma_eliminate(sp, rho, sigma, H)
            except Exception:
                ok = False
        checks.append(IdentityCheck(f"sigma elimination rewriting, n={n}", ok))

    sp = jet_space(2, 1)
    res = sigma_eliminate(sp, [sp.zero(1)], [sp.function(sp.u(0))], [sp.ring.zero])
    checks.append(IdentityCheck("sigma elimination, n=2, m=1, sigma=u^1",
                                res.exact == extd(sp.function(sp.u(0)) * sp.theta(0))))

    for m in (2, 3):
        tgt = complex_space(m)
        w = tgt.var(f"z{m}")
        fs_list = [[tgt.const(1)] * (m - 1), [w] * (m - 1),
                   [w ** 2 + I * w] + [w ** 3] * (m - 2)]
        for fs in fs_list:
            for chk in verify_upsilon(fs):
                chk.name = f"{chk.name} [m={m}, f={poly_to_str(fs[0])}]"
                checks.append(chk)
    return checks


def suite_passes(checks):
    return all(c.holds for c in checks if not c.as_printed)
