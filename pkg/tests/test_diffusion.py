import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wzcbf.diffusion import VARIANTS, DiffusionTerm, eval_S, fit_growth, pointwise_S, validate
from wzcbf.spectral import TorusGrid, inner, random_field, taylor_green

G = TorusGrid(32)


def field(seed, amp=1.0):
    return random_field(G, np.random.default_rng(seed), amplitude=amp)


def test_unknown_variant():
    with pytest.raises(ValueError):
        DiffusionTerm("cubic", G)
    with pytest.raises(ValueError):
        DiffusionTerm("ndt3_example", G, q=0.5)


def test_zero_and_constant_and_linear():
    u = field(0)
    assert np.all(eval_S(DiffusionTerm("zero", G), 1.0, u).coeffs == 0)
    c = DiffusionTerm("constant_g", G, sigma=-0.3)
    assert np.allclose(eval_S(c, 2.0, u).coeffs, np.exp(-0.6) * taylor_green(G).coeffs)
    assert c.h_norm == pytest.approx(1.0)
    lin = DiffusionTerm("linear_u", G, kappa=0.7, sigma=0.1)
    assert np.allclose(eval_S(lin, 1.0, u).coeffs, 0.7 * np.exp(0.1) * u.coeffs, atol=1e-15)
    assert lin.h_norm == 0.0


def test_ndt1_pointwise_sine():
    # with g = 0 the nonlinear part is sin(u) componentwise
    term = DiffusionTerm("ndt1_example", G, g=G.zeros())
    u = field(1, 2.0)
    assert np.allclose(pointwise_S(term, 0.0, u), np.sin(u.physical()), atol=1e-14)


def test_ndt3_q1_saturates_bound():
    term = DiffusionTerm("ndt3_example", G, q=1.0, direction=(3.0, 4.0))
    assert term.direction == pytest.approx((0.6, 0.8))
    u = field(2, 5.0)
    mag = np.sqrt(np.sum(pointwise_S(term, 0.4, u) ** 2, axis=0))
    assert np.allclose(mag, term.bound_GS1(0.4, u), atol=1e-14)


def test_fit_growth_oracles():
    assert fit_growth([1.0, 2.0], [0.0, 0.0]) == (0.0, 0.0, 0.0)
    xs = np.array([0.5, 1.0, 2.0, 4.0, 8.0])
    s3, s4, s5 = fit_growth(xs, 2.0 * xs)
    assert (s3, s4, s5) == pytest.approx((0.0, 2.0, 0.0), abs=1e-12)
    s3, s4, s5 = fit_growth(xs, 1.0 + xs**1.5)
    assert 0.0 < s5 < 0.6
    assert np.all(1.0 + xs**1.5 <= s3 + s4 * xs ** (1 + s5) + 1e-12)
    # superquadratic data is clipped below 1
    assert fit_growth(xs, xs**3)[2] == 0.99


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), t=st.floats(min_value=-3, max_value=3))
def test_ndt2_orthogonal(seed, t):
    term = DiffusionTerm("ndt2_example", G)
    u = field(seed, 3.0)
    assert abs(inner(term.nonlinear(u), u)) < 1e-12
    # with kappa = 0 and no offset the full term is orthogonal too
    assert abs(inner(eval_S(term, t, u), u)) < 1e-11


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), sigma=st.floats(min_value=-1, max_value=1))
def test_offset_enters_linearly(seed, sigma):
    # S with offset h equals S without it plus exp(sigma t) P h
    u = field(seed)
    h = field(seed + 1, 0.3)
    a = DiffusionTerm("ndt1_example", G, kappa=0.2, sigma=sigma, h=h)
    b = DiffusionTerm("ndt1_example", G, kappa=0.2, sigma=sigma)
    assert np.allclose(eval_S(a, 1.5, u).coeffs - eval_S(b, 1.5, u).coeffs, np.exp(1.5 * sigma) * h.coeffs, atol=1e-14)


@pytest.mark.parametrize("variant", VARIANTS)
def test_validators_pass(variant):
    kw = {"kappa": 0.5} if variant != "ndt3_example" else {}
    rows = validate(DiffusionTerm(variant, TorusGrid(16), **kw), n_samples=16)
    assert rows
    assert all(r.passed for r in rows), rows
    names = {r.condition for r in rows}
    if variant == "ndt3_example":
        assert names == {"GS1_bound", "local_lip"}
    else:
        assert {"S2_lip", "S3_weak", "S4_s3", "S4_s4", "S4_s5"} <= names
