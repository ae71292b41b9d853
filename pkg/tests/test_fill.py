import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from harmjet.conslaw import FILLABLE, INDETERMINATE, NOT_FILLABLE, harmonic_basis
from harmjet.errors import IsotropyError
from harmjet.fill import check, fill, fill_with_estimate, generate
from harmjet.jetgeom import JetBoundary, isotropy_residual

from conftest import graph_boundary


def re_z3(x):
    u = x[:, 0] ** 3 - 3 * x[:, 0] * x[:, 1] ** 2
    grad = np.stack([3 * x[:, 0] ** 2 - 3 * x[:, 1] ** 2, -6 * x[:, 0] * x[:, 1]], 1)
    return u, grad


def test_fill_re_z3(unit_circle):
    b = graph_boundary(unit_circle, *re_z3(unit_circle))
    res = fill(b)
    assert res.method == "spectral"
    assert res.zeta_inf < 1e-8
    pts, V = res.extension.polar_grid()
    assert_allclose(V[:, 0], re_z3(pts)[0], atol=1e-8)


def test_fill_pure_normal_defect(unit_circle):
    # our defect is (A - grad V) . N, so A = N with u = 0 gives +1
    b = JetBoundary(unit_circle, np.zeros((256, 1)), unit_circle[:, None, :].copy())
    res = fill(b)
    assert_allclose(res.zeta, 1.0, atol=1e-12)
    pts, V = res.extension.polar_grid()
    assert np.abs(V).max() == 0


def test_fill_zero_data(unit_circle):
    b = JetBoundary(unit_circle, np.zeros((256, 1)), np.zeros((256, 1, 2)))
    assert fill(b).zeta_inf == 0


def test_fill_rejects_non_isotropic():
    b = generate("tangential_perturbed", seed=0, eps=1e-3)
    with pytest.raises(IsotropyError):
        fill(b)


@pytest.mark.parametrize("n", [2, 3])
def test_check_harmonic_graph_fillable(n):
    b = generate("harmonic_poly_graph", seed=7, n=n, deg=4)
    rep = check(b)
    assert rep.verdict == FILLABLE and rep.agreement
    assert rep.moment_verdict == rep.zeta_verdict == FILLABLE
    assert rep.exit_code == 0


def test_check_normal_perturbation_scales_linearly():
    ratios = []
    for eps in (1e-4, 1e-3, 1e-2):
        rep = check(generate("normal_perturbed", seed=3, eps=eps))
        assert rep.verdict == NOT_FILLABLE and rep.agreement
        ratios.append(rep.moments.max_normalized / rep.fill.zeta_inf)
    assert max(ratios) / min(ratios) < 1.1


def test_pairing_matches_moments():
    rep = check(generate("normal_perturbed", seed=5, eps=1e-3, m=2))
    assert rep.pairing["relative_difference"] < 1e-8
    assert rep.pairing["correlation"] > 0.999


def test_tangential_perturbation_rejected_at_isotropy():
    for eps in (1e-4, 1e-3):
        rep = check(generate("tangential_perturbed", seed=2, eps=eps))
        assert rep.stage == "isotropy" and rep.verdict == NOT_FILLABLE
        assert rep.zeta_verdict == "SKIPPED" and rep.fill is None
    small = check(generate("tangential_perturbed", seed=2, eps=1e-6))
    assert small.stage == "isotropy" and small.verdict == INDETERMINATE


def test_generate_determinism_and_zero_eps():
    a = generate("normal_perturbed", seed=4, eps=0)
    b = generate("harmonic_poly_graph", seed=4)
    assert a.to_json() == b.to_json()
    assert generate("random_isotropic", seed=9).to_json() == \
        generate("random_isotropic", seed=9).to_json()
    with pytest.raises(ValueError):
        generate("nonsense")


@pytest.mark.parametrize("n,domain", [(2, "circle"), (2, "ellipse"), (3, "circle")])
def test_random_isotropic_not_fillable(n, domain):
    b = generate("random_isotropic", seed=1, n=n, m=2, domain=domain)
    assert isotropy_residual(b) < 1e-10
    rep = check(b)
    assert rep.verdict == NOT_FILLABLE


@pytest.mark.parametrize("lam", [1e-3, 7.0])
def test_scaling(lam):
    """Moments scale by lam; normalized residuals by lam (1 + a) / (1 + lam a)."""
    from harmjet.jetgeom import gradient_scale
    b = generate("normal_perturbed", seed=8, eps=1e-2)
    scaled = b.replace(u=lam * b.u, A=lam * b.A)
    r0, r1 = check(b), check(scaled)
    assert_allclose(r1.moments.residuals, lam * r0.moments.residuals, rtol=1e-9,
                    atol=1e-13 * lam)
    a = gradient_scale(b)
    factor = lam * (1 + a) / (1 + lam * a)
    assert_allclose(r1.moments.max_normalized, factor * r0.moments.max_normalized, rtol=1e-9)
    if lam >= 1:
        assert r0.verdict == r1.verdict == NOT_FILLABLE


def test_agreement_over_many_cases():
    cases, gray = 0, 0
    for seed in range(40):
        kind = ("harmonic_poly_graph", "normal_perturbed", "random_isotropic")[seed % 3]
        rep = check(generate(kind, seed=seed, deg=1 + seed % 6, eps=10.0 ** -(2 + seed % 3)))
        cases += 1
        if rep.verdict == INDETERMINATE:
            gray += 1
        else:
            assert rep.agreement
        if kind == "harmonic_poly_graph":
            assert rep.verdict == FILLABLE
    assert gray / cases < 0.05


def test_ellipse_fd_path():
    b = generate("harmonic_poly_graph", seed=2, domain="ellipse", deg=3)
    res = fill_with_estimate(b)
    assert res.method == "fd" and res.h == pytest.approx(2 / 128)
    assert res.zeta_inf < 1e-2
    assert res.error_estimate > 0
    bad = generate("normal_perturbed", seed=2, domain="ellipse", deg=3, eps=1e-1)
    assert check(bad).verdict == NOT_FILLABLE


def test_report_json_and_tsv(unit_circle):
    b = generate("normal_perturbed", seed=0, eps=1e-2)
    rep = check(b)
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["format"] == 1 and d["verdict"] == NOT_FILLABLE
    assert set(d["zeta"]) >= {"zeta_inf", "zeta_l2", "tol_zeta", "method"}
    lines = rep.fill.zeta_tsv().splitlines()
    assert lines[0] == "s\tzeta1" and len(lines) == 257
    grid = rep.fill.grid_tsv(n_r=5, n_s=8).splitlines()
    assert grid[0] == "x\ty\tV1" and len(grid) == 1 + 1 + 4 * 8


def test_sphere_zeta_tsv():
    rep = check(generate("normal_perturbed", seed=1, n=3, eps=1e-2, samples=(8, 16)),
                basis=harmonic_basis(3, 1, 3))
    lines = rep.fill.zeta_tsv().splitlines()
    assert lines[0] == "theta\tphi\tzeta1" and len(lines) == 1 + 8 * 16
