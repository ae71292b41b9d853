import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from harmjet.conslaw import (FILLABLE, INDETERMINATE, NOT_FILLABLE, classify, eval_moment,
                             harmonic_basis, moment_by_form, moment_by_normal, moment_report,
                             stokes_cylinder_check)
from harmjet.errors import BoundaryError
from harmjet.extcalc import base_space, laplacian
from harmjet.fill import generate
from harmjet.jetgeom import JetBoundary

from conftest import circle, ellipse, graph_boundary, re_z2


def test_basis_enumeration_2d():
    basis = harmonic_basis(2, 1, 2)
    assert [H.label for H in basis] == ["1", "Re z^1", "Im z^1", "Re z^2", "Im z^2"]
    assert len(harmonic_basis(2, 3, 4)) == 3 * 9


def test_basis_enumeration_3d():
    basis = harmonic_basis(3, 1, 1)
    assert len(basis) == 4
    assert sorted(H.degree for H in basis) == [0, 1, 1, 1]
    assert len(harmonic_basis(3, 2, 3)) == 2 * 16


@pytest.mark.parametrize("n,K", [(2, 8), (3, 4)])
def test_every_test_function_is_harmonic(n, K):
    for H in harmonic_basis(n, 1, K):
        assert not laplacian(H.poly, base_space(n, H.poly_cap))


@pytest.mark.parametrize("n,K", [(2, 6), (3, 4)])
def test_gradient_matches_central_differences(n, K):
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, size=(20, n))
    step = 1e-5
    for H in harmonic_basis(n, 1, K):
        fd = np.stack([(H.value(pts + step * e) - H.value(pts - step * e)) / (2 * step)
                       for e in np.eye(n)], 1)
        assert_allclose(H.gradient(pts), fd, atol=1e-6)


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        harmonic_basis(2, 1, -1)


# ------------------------------------------------------- worked examples
def test_harmonic_graph_moments_vanish(unit_circle):
    u, A = re_z2(unit_circle)
    b = graph_boundary(unit_circle, u, A)
    for H in harmonic_basis(2, 1, 8):
        assert abs(eval_moment(b, H)) < 1e-10


def test_pure_normal_defect_constant_moment(unit_circle):
    N = len(unit_circle)
    b = JetBoundary(unit_circle, np.zeros((N, 1)), unit_circle[:, None, :].copy())
    H1 = harmonic_basis(2, 1, 0)[0]
    assert abs(eval_moment(b, H1) - 2 * np.pi) < 1e-12


def test_zero_data_zero_moments(unit_circle):
    N = len(unit_circle)
    b = JetBoundary(unit_circle, np.zeros((N, 1)), np.zeros((N, 1, 2)))
    assert all(eval_moment(b, H) == 0 for H in harmonic_basis(2, 1, 4))


def test_dimension_mismatch(unit_circle):
    N = len(unit_circle)
    b = JetBoundary(unit_circle, np.zeros((N, 2)), np.zeros((N, 2, 2)))
    with pytest.raises(BoundaryError):
        eval_moment(b, harmonic_basis(2, 1, 1)[0])
    with pytest.raises(BoundaryError):
        eval_moment(b, harmonic_basis(3, 2, 1)[0])


def test_report_verdicts():
    b = generate("harmonic_poly_graph", seed=1, deg=4)
    assert moment_report(b).verdict == FILLABLE
    assert moment_report(b, tol_mom=1e-8).verdict == FILLABLE
    eps = 1e-2
    bad = b.replace(A=b.A + eps * b.normal[:, None, :])
    rep = moment_report(bad)
    assert rep.verdict == NOT_FILLABLE
    assert_allclose(rep.max_abs, eps * 2 * np.pi, rtol=1e-10)
    assert rep.residuals[0] == pytest.approx(eps * 2 * np.pi, rel=1e-10)
    d = rep.to_dict()
    assert d["basis"]["size"] == len(rep.residuals) == 33


@pytest.mark.parametrize("ratio,verdict", [(0.5, FILLABLE), (1.0, INDETERMINATE),
                                           (9.9, INDETERMINATE), (10.5, NOT_FILLABLE)])
def test_classify_gray_band(ratio, verdict):
    assert classify(ratio) == verdict


# ---------------------------------------------------------- dual-route checks
def test_routes_agree_on_random_data():
    """100 random (boundary, H) pairs: form pullback equals the normal-form sum."""
    rng = np.random.default_rng(11)
    basis = harmonic_basis(2, 2, 8) + ()
    for trial in range(100):
        x = ellipse(256, a=rng.uniform(0.5, 2), b=rng.uniform(0.5, 2)) + rng.normal(size=2)
        b = JetBoundary(x, rng.normal(size=(256, 2)), rng.normal(size=(256, 2, 2)))
        H = basis[rng.integers(len(basis))]
        mf, mn = moment_by_form(b, H), moment_by_normal(b, H)
        mass = np.abs(mn) + 1.0
        assert abs(mf - mn) <= 1e-10 * max(mass, 1)


def test_routes_agree_on_sphere(sphere_grid):
    rng = np.random.default_rng(5)
    N = len(sphere_grid.points)
    b = JetBoundary(sphere_grid.points, rng.normal(size=(N, 1)), rng.normal(size=(N, 1, 3)),
                    grid=sphere_grid)
    for H in harmonic_basis(3, 1, 3):
        assert_allclose(moment_by_form(b, H), moment_by_normal(b, H), rtol=1e-10, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-3, 3), st.floats(-3, 3))
def test_moment_linear_in_data(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    x = circle(128)
    u1, u2 = rng.normal(size=(2, 128, 1))
    A1, A2 = rng.normal(size=(2, 128, 1, 2))
    H = harmonic_basis(2, 1, 5)[rng.integers(11)]
    mu = lambda u, A: moment_by_normal(JetBoundary(x, u, A), H)
    lhs = mu(alpha * u1 + beta * u2, alpha * A1 + beta * A2)
    rhs = alpha * mu(u1, A1) + beta * mu(u2, A2)
    assert abs(lhs - rhs) <= 1e-10 * (abs(alpha * mu(u1, A1)) + abs(beta * mu(u2, A2)) + 1)


def test_moment_linear_in_test_function(unit_circle):
    rng = np.random.default_rng(2)
    b = JetBoundary(unit_circle, rng.normal(size=(256, 1)), rng.normal(size=(256, 1, 2)))
    basis = harmonic_basis(2, 1, 3)
    c = rng.normal(size=len(basis))
    combined = sum(ci * H.value(b.x) for ci, H in zip(c, basis))
    dcombined = sum(ci * H.gradient(b.x) for ci, H in zip(c, basis))
    direct = np.sum(b.weights * (combined * np.einsum("ji,ji->j", b.A[:, 0], b.normal)
                                 - b.u[:, 0] * np.einsum("ji,ji->j", dcombined, b.normal)))
    assert_allclose(sum(ci * eval_moment(b, H) for ci, H in zip(c, basis)), direct,
                    rtol=1e-10)


@pytest.mark.parametrize("deg", [1, 3, 6])
def test_forward_direction_sphere(deg):
    b = generate("harmonic_poly_graph", seed=deg, n=3, deg=deg)
    rep = moment_report(b, harmonic_basis(3, 1, 4))
    assert rep.max_abs < 1e-8 and rep.verdict == FILLABLE


# ----------------------------------------------------------------- Stokes
def _zero(x, m=1):
    return JetBoundary(x, np.zeros((len(x), m)), np.zeros((len(x), m, 2)))


def test_stokes_zero_defect(unit_circle):
    u, A = re_z2(unit_circle)
    b = graph_boundary(unit_circle, u, A)
    lhs, rhs, diff = stokes_cylinder_check(b, np.zeros((256, 1)), harmonic_basis(2, 1, 2)[3])
    assert lhs == 0 and rhs == 0 and diff == 0


def test_stokes_constant_defect(unit_circle):
    chk = stokes_cylinder_check(_zero(unit_circle), np.ones((256, 1)),
                                harmonic_basis(2, 1, 0)[0])
    assert chk.diff < 1e-8
    assert abs(abs(chk.lhs) - 2 * np.pi) < 1e-12
    assert abs(chk.closed_form + 2 * np.pi) < 1e-12


def test_stokes_cosine_defect(unit_circle):
    zeta = unit_circle[:, :1].copy()
    chk = stokes_cylinder_check(_zero(unit_circle), zeta, harmonic_basis(2, 1, 1)[1])
    assert chk.diff < 1e-8
    assert abs(abs(chk.lhs) - np.pi) < 1e-8
    assert abs(chk.rhs - chk.closed_form) < 1e-10


def test_stokes_random_and_closed_form():
    rng = np.random.default_rng(9)
    for seed in range(5):
        b = generate("random_isotropic", seed=seed, m=2, domain="ellipse")
        s = b.s
        zeta = np.stack([np.cos(s + rng.normal()), np.sin(2 * s) * rng.normal()], 1)
        H = harmonic_basis(2, 2, 4)[rng.integers(18)]
        chk = stokes_cylinder_check(b, zeta, H)
        assert chk.diff < 1e-7 * max(1, abs(chk.lhs))
        assert abs(chk.rhs - chk.closed_form) < 1e-9


def test_stokes_sphere(sphere_grid):
    N = len(sphere_grid.points)
    b = JetBoundary(sphere_grid.points, np.zeros((N, 1)), np.zeros((N, 1, 3)), grid=sphere_grid)
    zeta = sphere_grid.points[:, 2:3] ** 2
    H = harmonic_basis(3, 1, 2)[0]
    chk = stokes_cylinder_check(b, zeta, H)
    assert chk.diff < 1e-8
    assert_allclose(chk.closed_form, -4 * np.pi / 3, rtol=1e-10)
