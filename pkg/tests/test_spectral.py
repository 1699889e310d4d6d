import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wzcbf.spectral import (
    TorusGrid,
    VelocityField,
    bilinear_B,
    check_a215,
    check_b1_bound,
    check_monotonicity_C,
    dual_norm2,
    gateaux_C,
    inner,
    ladyzhenskaya_ratio,
    leray_project,
    nonlinear_C,
    norm_grad,
    norm_H,
    norm_Lp,
    norms,
    random_field,
    stokes_A,
    taylor_green,
    trilinear_b,
)

G16 = TorusGrid(16)
G32 = TorusGrid(32)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def field(grid, seed, amp=1.0):
    return random_field(grid, np.random.default_rng(seed), amplitude=amp)


def shear(grid, a=1.0):
    x, y = grid.coords
    return VelocityField.from_physical(grid, np.stack((a * np.cos(y), 0 * x)))


# oracles ---------------------------------------------------------------


def test_grid_basics():
    g = TorusGrid(8, L=4.0)
    assert g.dx == 0.5
    assert g.zeros().coeffs.shape == (2, 8, 5)
    with pytest.raises(ValueError):
        TorusGrid(7)


def test_taylor_green_norms():
    g = taylor_green(G32)
    assert norm_H(g) == pytest.approx(1.0, abs=1e-14)
    assert norm_grad(g) ** 2 == pytest.approx(2.0, abs=1e-13)
    assert np.allclose(stokes_A(g).coeffs, 2.0 * g.coeffs)
    # V' norm of an eigenfunction with |k|^2 = 2
    assert dual_norm2(g) == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_taylor_green_is_steady_for_euler():
    # (g . grad) g is a gradient, so its projection vanishes
    g = taylor_green(G32, 3.0)
    assert np.max(np.abs(bilinear_B(g).coeffs)) < 1e-14


def test_parseval_against_quadrature():
    u = field(G32, 1)
    quad = G32.dx**2 * np.sum(u.physical() ** 2)
    assert inner(u, u) == pytest.approx(quad, rel=1e-12)
    assert norm_Lp(u, 2) ** 2 == pytest.approx(quad, rel=1e-12)


def test_nonlinear_C_on_shear():
    # |u|^2 u for u = a(cos y, 0) is a^3 (3 cos y + cos 3y)/4, already divergence-free
    a = 1.7
    c = nonlinear_C(shear(G32, a), 3).physical()
    x, y = G32.coords
    assert np.allclose(c[0], a**3 * (0.75 * np.cos(y) + 0.25 * np.cos(3 * y)), atol=1e-13)
    assert np.max(np.abs(c[1])) < 1e-13


def test_ladyzhenskaya_ratio_on_shear():
    # ||u||_4^4 = 3/8 (2 pi)^2,  ||u||^2 = ||grad u||^2 = 2 pi^2
    assert ladyzhenskaya_ratio(shear(G32)) == pytest.approx(3.0 / (8 * np.pi**2), rel=1e-12)


def test_norms_dict():
    u = shear(G32, 2.0)
    out = norms(u, 3)
    assert out["H"] ** 2 == pytest.approx(8 * np.pi**2)
    assert out["grad"] == pytest.approx(out["H"])
    assert out["V"] ** 2 == pytest.approx(16 * np.pi**2)
    assert out["lr"] == pytest.approx(16 * 0.375 * 4 * np.pi**2)
    assert out["Lr"] == pytest.approx(out["lr"] ** 0.25)


def test_gateaux_r1_and_at_zero():
    u, w = field(G16, 0), field(G16, 1)
    assert np.allclose(gateaux_C(u, w, 1).coeffs, w.coeffs)
    z = G16.zeros()
    assert np.all(np.isfinite(gateaux_C(z, w, 2.5).coeffs))
    assert np.max(np.abs(gateaux_C(z, w, 2.5).coeffs)) == 0
    with pytest.raises(ValueError):
        nonlinear_C(u, 0.5)


def pad(u, n):
    out = TorusGrid(n).zeros()
    h = u.grid.n // 2
    out.coeffs[:, :h, : h + 1] = u.coeffs[:, :h, :]
    out.coeffs[:, -h:, : h + 1] = u.coeffs[:, -h:, :]
    return out


def test_ladyzhenskaya_stable_under_refinement():
    # quartic quadrature is exact once n > 4 kcut, so further padding must not move the ratio
    u = field(G32, 3, amp=2.0)
    ratios = [ladyzhenskaya_ratio(pad(u, n)) for n in (64, 128, 256)]
    assert ratios[1] == pytest.approx(ratios[2], rel=1e-12)
    assert ratios[0] == pytest.approx(ratios[2], rel=0.02)


# properties ----------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_leray_idempotent_and_divergence_free(seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((2, 16, 9)) + 1j * rng.standard_normal((2, 16, 9))
    w = VelocityField(G16, c)
    p = leray_project(w)
    assert np.allclose(leray_project(p).coeffs, p.coeffs, atol=1e-14)
    div = G16.kx * p.coeffs[0] + G16.ky * p.coeffs[1]
    assert np.max(np.abs(div)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(s1=seeds, s2=seeds)
def test_trilinear_skew_symmetry(s1, s2):
    u, v = field(G16, s1, 3.0), field(G16, s2, 3.0)
    w = field(G16, s1 ^ s2)
    assert abs(trilinear_b(u, v, v)) < 1e-12
    assert trilinear_b(u, v, w) == pytest.approx(-trilinear_b(u, w, v), abs=1e-12)
    assert inner(bilinear_B(u, v), w) == pytest.approx(trilinear_b(u, v, w), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, r=st.sampled_from([1.0, 2.0, 3.0, 4.5]))
def test_C_pairing_is_Lr_norm(seed, r):
    u = field(G16, seed, 2.0)
    # the pairing happens before truncation, so compare with the truncated power
    lr = norms(u, r)["lr"]
    pair = inner(nonlinear_C(u, r), u)
    assert pair > 0
    assert pair == pytest.approx(lr, rel=0.05)


@settings(max_examples=25, deadline=None)
@given(s1=seeds, s2=seeds, r=st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0]))
def test_monotonicity_and_a215(s1, s2, r):
    u, v = field(G16, s1, 2.0), field(G16, s2, 1.0)
    lhs, rhs = check_monotonicity_C(u, v, r)
    assert lhs >= rhs - 1e-10 * max(1.0, abs(rhs))
    lhs, rhs = check_a215(u, v, r)
    assert lhs <= rhs * (1 + 1e-10) + 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=seeds, r=st.sampled_from([2.0, 3.0]))
def test_gateaux_matches_central_difference(seed, r):
    u, w = field(G32, seed, 2.0), field(G32, seed + 1)
    eps = 1e-5
    fd = (nonlinear_C(u + w * eps, r).coeffs - nonlinear_C(u - w * eps, r).coeffs) / (2 * eps)
    d = gateaux_C(u, w, r).coeffs
    assert np.max(np.abs(fd - d)) < 1e-6 * max(1.0, np.max(np.abs(d)))


@settings(max_examples=25, deadline=None)
@given(s1=seeds, s2=seeds, s3=seeds)
def test_b1_constant_bounded(s1, s2, s3):
    c = check_b1_bound(field(G16, s1), field(G16, s2), field(G16, s3))
    assert 0 <= c < 5.0
