import numpy as np
import pytest
from numpy.testing import assert_allclose

from harmjet.conslaw import FILLABLE, NOT_FILLABLE
from harmjet.errors import BoundaryError, EmbeddingError, FormatError, PeriodicityError
from harmjet.extcalc import zeta_map
from harmjet.fill import generate
from harmjet.holo import (ComplexLoop, HoloForm, conjugate_law, fill_holo, generate_loop,
                          holo_basis, holo_check, holo_moment, lift, periodicity_moment)
from harmjet.jetgeom import isotropy_residual

S = 2 * np.pi * np.arange(256) / 256
W = np.exp(1j * S)


def loop_of(*targets, w=W, g=None):
    return ComplexLoop(np.stack(list(targets) + [w], 1), graph_coord=g)


def test_polynomial_loop_moments_vanish():
    loop = loop_of(W ** 2)
    rep = holo_check(loop)
    assert rep.max_abs < 1e-12 and rep.verdict == FILLABLE
    assert len(rep.labels) == len(holo_basis(loop)) == 2 * 17 + 17


def test_conjugate_loop_moment_is_2pi_i():
    loop = loop_of(np.conj(W))
    mu = holo_moment(loop, HoloForm("zdw", 0, 0))
    assert abs(mu - 2j * np.pi) < 1e-12
    assert holo_check(loop).verdict == NOT_FILLABLE


def test_constant_loop_exact_form():
    loop = loop_of(np.full(256, 2 - 1j))
    assert abs(holo_moment(loop, HoloForm("dz", 0, 0))) < 1e-14
    # p is constant, so u = p . x is linear in x and not constant
    u = lift(loop).u[:, 0]
    exact = ((2 - 1j) * W).real
    assert_allclose(u - u.mean(), exact - exact.mean(), atol=1e-13)
    assert np.ptp(lift(loop_of(np.zeros(256))).u) == 0


def test_lift_matches_closed_primitive():
    loop = loop_of(W ** 2)
    b = lift(loop)
    assert isotropy_residual(b) < 1e-10
    exact = (W ** 3).real / 3
    assert_allclose(b.u[:, 0] - b.u[:, 0].mean(), exact - exact.mean(), atol=1e-13)
    assert_allclose(b.x, np.stack([W.real, -W.imag], 1))
    assert_allclose(b.A[:, 0], np.stack([(W ** 2).real, (W ** 2).imag], 1))


def test_lift_periodicity():
    # Re of the integral of conj(w) dw vanishes, so only the rotated loop fails
    assert abs(periodicity_moment(loop_of(np.conj(W)), 0)) < 1e-12
    lift(loop_of(np.conj(W)))
    with pytest.raises(PeriodicityError, match="z1"):
        lift(loop_of(1j * np.conj(W)))


def test_fill_holo_cubic():
    res = fill_holo(loop_of(W ** 3))
    assert res.verdict == FILLABLE
    assert res.cr_residual < 1e-8 and res.trace_error < 1e-8
    # f(w) = w^3 in the disk coordinate w = x1 - i x2
    w = res.points[:, 0] - 1j * res.points[:, 1]
    assert_allclose(res.f[:, 0], w ** 3, atol=1e-10)


def test_fill_holo_constant():
    res = fill_holo(loop_of(np.full(256, 0.5 + 0.25j)))
    assert res.verdict == FILLABLE and res.cr_residual < 1e-12
    assert_allclose(res.f[:, 0], 0.5 + 0.25j, atol=1e-12)


def test_contamination_detected_at_moments():
    res = fill_holo(loop_of(W ** 2 + 1e-2 * np.conj(W)))
    assert res.verdict == NOT_FILLABLE and res.stage == "moments"
    assert res.f is None and res.to_tsv() == ""


@pytest.mark.parametrize("power", [1, 2, 3])
@pytest.mark.parametrize("eps", [1e-6, 1e-3])
def test_contamination_residue(power, eps):
    loop = generate_loop(seed=power, deg=4, eps=eps, power=power)
    rep = holo_check(loop)
    assert rep.max_abs >= 2 * np.pi * eps * (1 - 1e-6)


def test_lift_of_graph_boundary_is_identity():
    b = generate("harmonic_poly_graph", seed=3, deg=5)
    w = b.x[:, 0] - 1j * b.x[:, 1]
    z1 = b.A[:, 0, 0] + 1j * b.A[:, 0, 1]
    back = lift(ComplexLoop(np.stack([z1, w], 1)))
    assert_allclose(back.A, b.A, atol=1e-14)
    du = back.u - b.u
    assert np.ptp(du) < 1e-12


def test_cr_residual_decreases_spectrally():
    # analytic but not polynomial: Fourier tail decays like 1.6^-k
    errs = []
    for N in (64, 128, 256):
        s = 2 * np.pi * np.arange(N) / N
        w = np.exp(1j * s)
        res = fill_holo(ComplexLoop(np.stack([1 / (w - 1.6), w], 1)), K=8)
        assert res.verdict == FILLABLE and res.cr_residual < 1e-8
        errs.append(res.trace_error)
    assert errs[0] > 1e3 * errs[1]
    assert errs[1] < 1e-10 and errs[2] < 1e-10


def test_generated_loops_round_trip():
    for seed in range(4):
        loop = generate_loop(seed=seed, m=3, deg=8)
        res = fill_holo(loop)
        assert res.verdict == FILLABLE
        assert res.trace_error < 1e-8 and res.cr_residual < 1e-8
        assert isotropy_residual(res.boundary) < 1e-10


def test_graph_coordinate_selection():
    z = np.stack([W, W ** 2], 1)
    assert ComplexLoop(z).graph_coord == 0
    with pytest.raises(EmbeddingError):
        ComplexLoop(np.stack([W ** 2, W ** 2], 1))
    with pytest.raises(BoundaryError):
        ComplexLoop(z, graph_coord=5)
    with pytest.raises(BoundaryError):
        ComplexLoop(W[:, None])


def test_loop_json_roundtrip():
    loop = generate_loop(seed=1)
    back = ComplexLoop.from_json(loop.to_json())
    assert np.array_equal(back.z, loop.z) and back.graph_coord == loop.graph_coord
    assert loop.to_dict()["graph_coord"] == 2
    for bad in ("[1]", "{}", "nope", '{"m": 2, "samples": 2, "z": [[[0, 0]]]}'):
        with pytest.raises(FormatError):
            ComplexLoop.from_json(bad)


def test_tsv_columns():
    res = fill_holo(loop_of(W ** 2, W))
    head = res.to_tsv().splitlines()[0]
    assert head == "x\ty\tre_f1\tim_f1\tre_f2\tim_f2"


def test_conjugate_law_examples():
    sp = zeta_map(2).source
    x1, x2 = sp.x(0), sp.x(1)
    law = conjugate_law([0, 1])
    assert law.K == x1 and law.H == -x2
    assert law.trace_error < 1e-13 and law.upsilon.all_hold
    law = conjugate_law([0, 0, 1])
    assert law.K == x1 ** 2 - x2 ** 2 and law.H == -2 * x1 * x2
    law = conjugate_law([3 + 2j])
    assert law.K == 3 * sp.ring.one and law.H == 2 * sp.ring.one and law.trace_error < 1e-12
