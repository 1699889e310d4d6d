import numpy as np
import pytest

from wzcbf.dynamics import CBFParams, Forcing, IntegrationError, integrate
from wzcbf.noise import WienerPath, colored_noise, ou_y
from wzcbf.spectral import TorusGrid, norm_H, random_field, taylor_green
from wzcbf.transforms import (
    OVERFLOW_LIMIT,
    additive_coefficient,
    from_v_additive,
    from_v_multiplicative,
    multiplicative_exponent,
    solve_additive,
    solve_multiplicative,
    to_v_additive,
    to_v_multiplicative,
    wz_system_for,
)

G = TorusGrid(16)
P = CBFParams(mu=0.5, alpha=1.0, beta=0.5, r=3.0)
F = Forcing(taylor_green(G))
DELTA = 0.05


@pytest.fixture(scope="module")
def path():
    return WienerPath.sample(3, -20.0, 2.0, 1e-3)


def u0():
    return random_field(G, np.random.default_rng(0), amplitude=1.5)


def test_coefficients(path):
    c = additive_coefficient(path, "white", 1.0, sigma=0.2)
    y = ou_y(path, 1.0)
    assert c(0.7) == pytest.approx(np.exp(0.14) * y.evaluate(0.7))
    a = multiplicative_exponent(path, "wz", DELTA)
    assert a(0.0) == 0.0
    assert a(1.0) == pytest.approx(colored_noise(path, DELTA).integrated(1.0))
    assert multiplicative_exponent(path, "white")(0.5) == pytest.approx(path(0.5))
    with pytest.raises(ValueError):
        additive_coefficient(path, "pink", 1.0)
    with pytest.raises(ValueError):
        multiplicative_exponent(path, "white")(5.0)


def test_maps_are_inverse(path):
    u, g = u0(), taylor_green(G)
    c = additive_coefficient(path, "wz", 1.0, delta=DELTA)
    back = from_v_additive(to_v_additive(u, 0.3, g, c), 0.3, g, c)
    assert np.allclose(back.coeffs, u.coeffs, atol=1e-15)
    a = multiplicative_exponent(path, "wz", DELTA)
    back = from_v_multiplicative(to_v_multiplicative(u, 0.3, a), 0.3, a)
    assert np.allclose(back.coeffs, u.coeffs, atol=1e-14)


def test_overflow_guard():
    big = WienerPath.from_function(lambda t: 40.0 * t, -1.0, 2.0, 1e-3)
    a = multiplicative_exponent(big, "white")
    assert abs(a(0.5)) < OVERFLOW_LIMIT
    with pytest.raises(IntegrationError):
        to_v_multiplicative(u0(), 1.0, a)


def _conjugacy_errors(kind, path):
    errs = []
    for dt in (1e-3, 5e-4, 2.5e-4):
        direct = integrate(wz_system_for(kind, G, P, F, path, DELTA), 0.0, 0.4, u0(), dt, ledger=False).final
        if kind == "additive":
            via = solve_additive(G, P, F, path, "wz", 0.0, 0.4, u0(), dt, delta=DELTA, ledger=False)[0]
        else:
            via = solve_multiplicative(G, P, F, path, "wz", 0.0, 0.4, u0(), dt, delta=DELTA, ledger=False)[0]
        errs.append(norm_H(direct - via))
    return np.array(errs)


@pytest.mark.parametrize("kind", ["additive", "multiplicative"])
def test_transformed_solution_matches_direct(kind, path):
    # with dt <= h the noise is smooth inside every step and the gap is second order
    errs = _conjugacy_errors(kind, path)
    assert errs[-1] < 1e-5
    assert np.all(errs[:-1] / errs[1:] > 3.0), errs


def test_zero_path_additive_is_plain_solution():
    zero = WienerPath.from_function(lambda t: 0 * t, -20.0, 2.0, 1e-3)
    direct = integrate(wz_system_for("additive", G, P, F, zero, DELTA), 0.0, 0.2, u0(), 2e-3, ledger=False).final
    via = solve_additive(G, P, F, zero, "white", 0.0, 0.2, u0(), 2e-3, ledger=False)[0]
    assert np.allclose(direct.coeffs, via.coeffs, atol=1e-14)
