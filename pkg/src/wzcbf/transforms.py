"""Random transformations that turn the stochastic system into a pathwise one.

Additive noise ``S = exp(sigma t) g``::

    v = u - exp(sigma t) g y        (white noise, y the OU process)
    v = u - exp(sigma t) g z_delta  (Wong-Zakai, z_delta the colored OU process)

    dv/dt + mu A v + B(v + c g) + alpha v + beta C(v + c g)
        = f + (ell - sigma - alpha) c g - mu c A g,      c = exp(sigma t) y

Linear multiplicative noise ``S = u``::

    v = exp(-a(t)) u,  a = omega(t) or int_0^t Z_delta

    dv/dt + mu A v + exp(a) B(v) + alpha v + beta exp((r-1) a) C(v) = exp(-a) f

The multiplicative coefficients are frozen at each step midpoint.
"""

from __future__ import annotations

import numpy as np

from .dynamics import (
    Forcing,
    IntegrationError,
    WZSystem,
    _info,
    _inner,
    _nonlin_phys,
    _phys_and_grad,
    _power_phys,
    _speed,
    integrate,
)
from .diffusion import DiffusionTerm
from .noise import colored_noise, ou_y, ou_z
from .spectral import _project, taylor_green, to_spectral

__all__ = [
    "OVERFLOW_LIMIT",
    "AdditiveSystem",
    "MultiplicativeSystem",
    "additive_coefficient",
    "multiplicative_exponent",
    "to_v_additive",
    "from_v_additive",
    "to_v_multiplicative",
    "from_v_multiplicative",
    "solve_additive",
    "solve_multiplicative",
    "wz_system_for",
]

OVERFLOW_LIMIT = 30.0


def additive_coefficient(path, mode, ell, sigma=0.0, delta=None):
    """``t -> exp(sigma t) y(t)`` (mode 'white') or ``exp(sigma t) z_delta(t)`` (mode 'wz')."""
    if mode == "white":
        proc = ou_y(path, ell)
    elif mode == "wz":
        proc = ou_z(path, delta, ell)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    def c(t):
        return np.exp(sigma * t) * float(proc.evaluate(t))

    c.process = proc
    return c


def multiplicative_exponent(path, mode, delta=None):
    """``t -> omega(t)`` (mode 'white') or ``int_0^t Z_delta`` (mode 'wz')."""
    if mode == "white":
        times, vals = path.times, path.samples
    elif mode == "wz":
        zn = colored_noise(path, delta)
        times, vals = zn.times, zn.integral
    else:
        raise ValueError(f"unknown mode {mode!r}")

    def a(t):
        if t < times[0] - 1e-9 or t > times[-1] + 1e-9:
            raise ValueError(f"t={t} outside the noise window")
        return float(np.interp(t, times, vals))

    return a


def to_v_additive(u, t, g, coef):
    return u - g * coef(t)


def from_v_additive(v, t, g, coef):
    return v + g * coef(t)


def to_v_multiplicative(u, t, a):
    return u * np.exp(-_guard(a(t), t))


def from_v_multiplicative(v, t, a):
    return v * np.exp(_guard(a(t), t))


def _guard(val, t):
    if abs(val) > OVERFLOW_LIMIT:
        raise IntegrationError(f"|noise exponent| = {abs(val):.3g} exceeds {OVERFLOW_LIMIT} at t={t:.6g}", t_last=t)
    return val


class AdditiveSystem:
    """The v-equation of the additive transformation.

    Arguments
    ---------
    grid, params, forcing
        As for :class:`~wzcbf.dynamics.WZSystem`.
    g : VelocityField
        Divergence-free noise profile.
    coef : callable
        ``t -> exp(sigma t) y(t)`` or its colored analogue.
    ell, sigma : float

    """

    frozen = False

    def __init__(self, grid, params, forcing, g, coef, ell, sigma=0.0, mode=None, delta=None, path=None):
        self.grid = grid
        self.params = params
        self.forcing = forcing or Forcing()
        self.g = g
        self.coef = coef
        self.ell = ell
        self.sigma = sigma
        self.mode, self.delta, self.path = mode, delta, path
        self._drift = ((ell - sigma - params.alpha) * g.coeffs - params.mu * grid.k2 * g.coeffs)

    def rhs(self, t, vc, t_coef=None, info=False):
        grd, p = self.grid, self.params
        c = self.coef(t)
        wc = vc + c * self.g.coeffs
        wp, gw = _phys_and_grad(grd, wc)
        n = -_project(grd, grd.mask * to_spectral(grd, _nonlin_phys(wp, gw, p.beta, p.r)))
        f = self.forcing.hat(t, vc)
        s = c * self._drift
        n += f + s
        out = {"speed": _speed(wp)}
        if info:
            vp = wp - c * self._g_phys()
            out.update(_info(grd, vc, vp, p.r, _inner(grd, f, vc), _inner(grd, s, vc)))
        return n, out

    def _g_phys(self):
        if not hasattr(self, "_gp"):
            self._gp = self.g.physical()
        return self._gp

    def with_path(self, path):
        coef = additive_coefficient(path, self.mode, self.ell, self.sigma, self.delta)
        return AdditiveSystem(
            self.grid, self.params, self.forcing, self.g, coef, self.ell, self.sigma, self.mode, self.delta, path
        )


class MultiplicativeSystem:
    """The v-equation of the multiplicative transformation, coefficients frozen at ``t_coef``."""

    frozen = True

    def __init__(self, grid, params, forcing, a, mode=None, delta=None, path=None):
        self.grid = grid
        self.params = params
        self.forcing = forcing or Forcing()
        self.a = a
        self.mode, self.delta, self.path = mode, delta, path

    def rhs(self, t, vc, t_coef=None, info=False):
        grd, p = self.grid, self.params
        tc = t if t_coef is None else t_coef
        a = _guard(self.a(tc), tc)
        ea = np.exp(a)
        vp, gv = _phys_and_grad(grd, vc)
        val = ea * np.einsum("ixy,ijxy->jxy", vp, gv)
        if p.beta != 0:
            val += p.beta * np.exp((p.r - 1.0) * a) * _power_phys(vp, p.r)
        n = -_project(grd, grd.mask * to_spectral(grd, val))
        f = np.exp(-a) * self.forcing.hat(t, vc)
        n += f
        out = {"speed": ea * _speed(vp)}
        if info:
            out.update(_info(grd, vc, vp, p.r, _inner(grd, f, vc), 0.0))
        return n, out

    def with_path(self, path):
        return MultiplicativeSystem(
            self.grid, self.params, self.forcing, multiplicative_exponent(path, self.mode, self.delta),
            self.mode, self.delta, path,
        )


def wz_system_for(kind, grid, params, forcing, path, delta, g=None, sigma=0.0):
    """Untransformed Wong-Zakai system with additive ``exp(sigma t) g`` or linear multiplicative noise."""
    if kind == "additive":
        g = taylor_green(grid) if g is None else g
        term = DiffusionTerm("constant_g", grid, sigma=sigma, h=g)
    elif kind == "multiplicative":
        term = DiffusionTerm("linear_u", grid, kappa=1.0)
    else:
        raise ValueError(f"unknown transformation kind {kind!r}")
    return WZSystem(grid, params, term, forcing, colored_noise(path, delta))


def solve_additive(grid, params, forcing, path, mode, s, T, u_s, dt, ell=1.0, sigma=0.0, delta=None, g=None, **kw):
    """Solve through the v-equation and map back.

    Returns ``(u_final, trajectory_of_v, coefficient)``.
    """
    g = taylor_green(grid) if g is None else g
    coef = additive_coefficient(path, mode, ell, sigma, delta)
    system = AdditiveSystem(grid, params, forcing, g, coef, ell, sigma, mode, delta, path)
    v_s = to_v_additive(u_s, s, g, coef)
    traj = integrate(system, s, T, v_s, dt, **kw)
    return from_v_additive(traj.final, s + T, g, coef), traj, coef


def solve_multiplicative(grid, params, forcing, path, mode, s, T, u_s, dt, delta=None, **kw):
    """Solve through the v-equation and map back; returns ``(u_final, trajectory_of_v, exponent)``."""
    a = multiplicative_exponent(path, mode, delta)
    system = MultiplicativeSystem(grid, params, forcing, a, mode, delta, path)
    v_s = to_v_multiplicative(u_s, s, a)
    traj = integrate(system, s, T, v_s, dt, **kw)
    return from_v_multiplicative(traj.final, s + T, a), traj, a
