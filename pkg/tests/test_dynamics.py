import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wzcbf.diffusion import DiffusionTerm
from wzcbf.dynamics import (
    LEDGER_COLUMNS,
    CBFParams,
    CFLViolation,
    Forcing,
    IntegrationError,
    WZSystem,
    cocycle_eval,
    integrate,
)
from wzcbf.noise import WienerPath, colored_noise
from wzcbf.spectral import TorusGrid, VelocityField, norm_H, random_field, taylor_green

G = TorusGrid(32)
PARAMS = CBFParams(mu=0.5, alpha=1.0, beta=0.5, r=3.0)


def noisy_system(seed=0, delta=0.05, params=PARAMS, grid=G):
    path = WienerPath.sample(seed, -3.0, 3.0, 1e-3)
    term = DiffusionTerm("ndt1_example", grid, kappa=0.1, h=taylor_green(grid, 0.3))
    forcing = Forcing(taylor_green(grid, 1.0))
    return WZSystem(grid, params, term, forcing, colored_noise(path, delta)), path


def u0(seed=1, amp=1.0, grid=G):
    return random_field(grid, np.random.default_rng(seed), amplitude=amp)


def rel(a, b):
    return norm_H(a - b) / max(norm_H(b), 1e-300)


# oracles ---------------------------------------------------------------


def test_taylor_green_decays_exactly():
    # B(g, g) = 0 for Taylor-Green and beta = 0, so only the exact linear factor acts
    p = CBFParams(mu=0.3, alpha=0.7, beta=0.0, r=1.0)
    g = taylor_green(G, 2.0)
    out = integrate(WZSystem(G, p), 0.0, 1.0, g, 0.01).final
    assert np.allclose(out.coeffs, np.exp(-(2 * p.mu + p.alpha)) * g.coeffs, atol=1e-13)


def test_forced_taylor_green_relaxes_to_stokes_state():
    p = CBFParams(mu=0.5, alpha=1.0, beta=0.0, r=1.0)
    g = taylor_green(G)
    lam = 2 * p.mu + p.alpha
    sys_ = WZSystem(G, p, forcing=Forcing(g * 1.5))
    T, dt = 2.0, 1e-2
    out = integrate(sys_, 0.0, T, G.zeros(), dt).final
    exact = 1.5 / lam * (1 - np.exp(-lam * T))
    assert np.allclose(out.coeffs, exact * g.coeffs, atol=5 * dt**2)


def test_nse_preset():
    p = CBFParams.nse(0.2)
    assert (p.mu, p.alpha, p.beta, p.r) == (0.2, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        CBFParams(r=0.5)
    with pytest.raises(ValueError):
        CBFParams(mu=0.0)


def test_forcing_tempered():
    g = taylor_green(G)
    assert Forcing().dnft1(1.0) == (True, 0.0)
    assert Forcing(g).dnft1(1.0) == (True, 0.5)
    assert Forcing(g, gamma_f=-0.1).dnft1(1.0)[0] is False
    assert Forcing(g, gamma_f=0.5).dual_norm2(1.0) == pytest.approx(np.e / 3.0)


# structure -------------------------------------------------------------


def test_ledger_columns_and_storage():
    sys_, _ = noisy_system()
    traj = integrate(sys_, 0.0, 0.1, u0(), 1e-2, store_every=3)
    assert set(traj.ledger) == set(LEDGER_COLUMNS) - {"time"}
    assert len(traj.times) == 11
    assert traj.snapshot_times == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.1])
    assert len(traj.ledger_rows()) == 11
    with pytest.raises(ValueError):
        integrate(sys_, 0.0, 0.105, u0(), 1e-2)


def test_restart_consistency():
    sys_, _ = noisy_system()
    full = integrate(sys_, 0.2, 0.4, u0(), 1e-3, ledger=False).final
    half = integrate(sys_, 0.2, 0.2, u0(), 1e-3, ledger=False).final
    two = integrate(sys_, 0.4, 0.2, half, 1e-3, ledger=False).final
    assert rel(two, full) < 1e-10


@pytest.mark.parametrize("s,tau,t", [(0.0, 0.2, 0.3), (-1.0, 0.5, 0.25)])
def test_cocycle_property(s, tau, t):
    sys_, path = noisy_system()
    a = cocycle_eval(sys_, path, t + tau, s, u0(), 1e-3)
    mid = cocycle_eval(sys_, path, tau, s, u0(), 1e-3)
    b = cocycle_eval(sys_, path.shifted(tau), t, tau + s, mid, 1e-3)
    assert rel(b, a) < 1e-9


def test_self_convergence_order():
    sys_, _ = noisy_system(params=CBFParams(mu=0.1, alpha=0.5, beta=1.0, r=3.0))
    sols = [integrate(sys_, 0.0, 0.5, u0(amp=2.0), dt, ledger=False).final for dt in (4e-3, 2e-3, 1e-3, 5e-4)]
    errs = [norm_H(sols[i] - sols[i + 1]) for i in range(3)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9), orders


def test_energy_residual_small_and_second_order():
    sys_, _ = noisy_system(params=CBFParams(mu=0.1, alpha=0.5, beta=1.0, r=3.0))
    res = [np.max(np.abs(integrate(sys_, 0.0, 0.5, u0(amp=2.0), dt).residual)) for dt in (1e-3, 5e-4)]
    assert res[0] < 1e-3 * 0.5
    assert res[0] / res[1] >= 3.5


def test_cfl_violation():
    with pytest.raises(CFLViolation) as err:
        integrate(WZSystem(G, PARAMS), 0.0, 0.5, u0(amp=200.0), 0.05)
    assert err.value.t_last == 0.0


def test_nonfinite_state_aborts():
    bad = VelocityField(G, np.full((2,) + G.shape, np.nan + 0j))
    with pytest.raises(IntegrationError):
        integrate(WZSystem(G, PARAMS, forcing=Forcing(bad)), 0.0, 0.1, u0(), 1e-2, cfl=False)


# properties ----------------------------------------------------------


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), amp=st.floats(min_value=0.1, max_value=5.0))
def test_unforced_energy_decays(seed, amp):
    # (B(u), u) = 0 and (C(u), u) >= 0, so ||u(t)|| <= exp(-(mu + alpha) t) ||u0|| for mean-free u
    g = TorusGrid(16)
    out = integrate(WZSystem(g, PARAMS), 0.0, 0.2, u0(seed, amp, g), 2e-3, ledger=False).final
    assert norm_H(out) <= np.exp(-(PARAMS.mu + PARAMS.alpha) * 0.2) * amp * (1 + 1e-10)
