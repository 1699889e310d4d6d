"""Time integration of the Wong-Zakai convective Brinkman-Forchheimer system.

The equation is

    du/dt + mu A u + B(u) + alpha u + beta C(u) = f(t) + S(t, x, u) Z_delta(theta_t omega).

All systems in this package share one stepper: the linear part
``mu |k|^2 + alpha`` is integrated exactly and the rest by Heun's method in
integrating-factor form (second order).  Every step also records an energy
ledger, from which the residual of the energy equality is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .noise import colored_noise
from .spectral import (
    VelocityField,
    _inner,
    _lr_integral,
    _power_phys,
    _project,
    dual_norm2,
    to_physical,
    to_spectral,
)

__all__ = [
    "CBFParams",
    "Forcing",
    "WZSystem",
    "Trajectory",
    "IntegrationError",
    "CFLViolation",
    "integrate",
    "step",
    "energy_residual",
    "cocycle_eval",
    "LEDGER_COLUMNS",
]

CFL_LIMIT = 0.5
LEDGER_COLUMNS = (
    "time",
    "h_norm2",
    "grad_norm2",
    "lr_norm",
    "work_f",
    "work_S",
    "residual",
    "v_norm2",
    "work_other",
)


class IntegrationError(RuntimeError):
    """Integration stopped; ``t_last`` is the last time with a finite state."""

    def __init__(self, msg, t_last=None):
        super().__init__(msg)
        self.t_last = t_last


class CFLViolation(IntegrationError):
    pass


@dataclass(frozen=True)
class CBFParams:
    """Physical parameters; ``r`` is the absorption exponent, ``r >= 1``."""

    mu: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    r: float = 3.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.r < 1:
            raise ValueError("r must be at least 1")

    @classmethod
    def nse(cls, mu=1.0):
        """Navier-Stokes limit, no damping and no absorption."""
        return cls(mu=mu, alpha=0.0, beta=0.0, r=1.0)


@dataclass(frozen=True)
class Forcing:
    """Deterministic forcing ``f(t) = exp(gamma_f t) F``."""

    F: VelocityField | None = None
    gamma_f: float = 0.0

    def hat(self, t, like):
        if self.F is None:
            return np.zeros_like(like)
        return np.exp(self.gamma_f * t) * self.F.coeffs

    def dual_norm2(self, t):
        """``||f(t)||_{V'}^2``; accepts an array of times."""
        if self.F is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return np.exp(2.0 * self.gamma_f * np.asarray(t, dtype=float)) * dual_norm2(self.F)

    def dnft1(self, alpha):
        """Whether the forcing is tempered for pullback use and a valid rate ``gamma`` in ``[0, alpha)``."""
        if self.F is None:
            return True, 0.0
        if self.gamma_f > 0:
            return True, 0.0
        if self.gamma_f == 0 and alpha > 0:
            return True, 0.5 * alpha
        return False, None


def _phys_and_grad(grid, uc):
    """Physical ``u`` and ``d_i u_j`` from a single batched transform."""
    stack = np.stack((uc, 1j * grid.kx * uc, 1j * grid.ky * uc))
    vals = to_physical(grid, stack)
    return vals[0], vals[1:]


def _nonlin_phys(up, gu, beta, r):
    """Grid values of ``(u.grad)u + beta |u|^{r-1}u``."""
    val = np.einsum("ixy,ijxy->jxy", up, gu)
    if beta != 0:
        val += beta * _power_phys(up, r)
    return val


def _info(grid, uc, up, r, wf, ws):
    return {
        "wf": wf,
        "wS": ws,
        "lr": _lr_integral(grid, up, r + 1.0),
        "h2": _inner(grid, uc, uc),
        "g2": grid.L**2 * float(np.sum(grid.weights * grid.k2 * np.abs(uc) ** 2)),
    }


def _speed(up):
    return float(np.sqrt(np.max(np.sum(up**2, axis=0))))


class WZSystem:
    """Right-hand side of the Wong-Zakai system on the velocity itself.

    Arguments
    ---------
    grid : TorusGrid
    params : CBFParams
    diffusion : DiffusionTerm or None
        ``S``; None means no noise term.
    forcing : Forcing or None
    noise : ColoredNoise or None
        ``Z_delta`` along the path.  None disables the noise term.

    A system's ``rhs(t, uc, t_coef, info)`` returns the explicit part ``N``
    of ``du/dt = -(mu A + alpha) u + N`` together with the largest advecting
    speed and, when ``info`` is set, the energy pairings at ``(t, uc)``.
    """

    frozen = False

    def __init__(self, grid, params, diffusion=None, forcing=None, noise=None):
        self.grid = grid
        self.params = params
        self.diffusion = diffusion
        self.forcing = forcing or Forcing()
        self.noise = noise

    def noise_value(self, t):
        return 0.0 if self.noise is None else float(self.noise(t))

    def rhs(self, t, uc, t_coef=None, info=False):
        g, p = self.grid, self.params
        up, gu = _phys_and_grad(g, uc)
        val = _nonlin_phys(up, gu, p.beta, p.r)
        z = self.noise_value(t)
        noisy = self.diffusion is not None and z != 0.0 and self.diffusion.variant != "zero"
        s_phys = lin = None
        if noisy:
            amp = z * self.diffusion.envelope(t)
            s_phys = self.diffusion.nonlinear_phys(uc, up, gu)
            if s_phys is not None:
                s_phys *= amp
                val -= s_phys
            lin = self.diffusion.linear_hat(uc)
            if lin is not None:
                lin = amp * lin
        n = -_project(g, g.mask * to_spectral(g, val))
        f = self.forcing.hat(t, uc)
        n += f
        if lin is not None:
            n += lin
        out = {"speed": _speed(up)}
        if info:
            ws = 0.0
            if s_phys is not None:
                ws += g.dx**2 * float(np.sum(s_phys * up))
            if lin is not None:
                ws += _inner(g, lin, uc)
            out.update(_info(g, uc, up, p.r, _inner(g, f, uc), ws))
        return n, out

    def with_path(self, path):
        """Same system driven by the colored noise of another path."""
        if self.noise is None:
            return self
        return WZSystem(self.grid, self.params, self.diffusion, self.forcing, colored_noise(path, self.noise.delta))


@dataclass
class Trajectory:
    """Result of :func:`integrate`.

    ``times`` and ``ledger`` hold one entry per step node; ``snapshots`` holds
    the states at ``snapshot_times``.  ``final`` is the state at ``times[-1]``.
    """

    times: np.ndarray
    dt: float
    ledger: dict
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final: VelocityField | None = None
    params: CBFParams | None = None

    @property
    def residual(self):
        return self.ledger["residual"]

    def ledger_rows(self):
        cols = [self.ledger[c] if c != "time" else self.times for c in LEDGER_COLUMNS]
        return list(zip(*cols))


def step(system, t, uc, dt, factor=None, info=False):
    """One integrating-factor Heun step from ``t``.

    Returns ``(new_coeffs, rhs_at_t, info_at_t)``; for systems with frozen
    coefficients the rhs is the one with coefficients at the step midpoint.
    """
    g, p = system.grid, system.params
    if factor is None:
        factor = np.exp(-(p.mu * g.k2 + p.alpha) * dt)
    tm = t + 0.5 * dt
    n0, info = system.rhs(t, uc, tm, info=info)
    pred = factor * (uc + dt * n0)
    n1, _ = system.rhs(t + dt, pred, tm)
    return factor * uc + 0.5 * dt * (factor * n0 + n1), n0, info


def integrate(system, s, T, u_s, dt, store_every=None, ledger=True, cfl=True):
    """Integrate ``system`` from ``(s, u_s)`` over ``[s, s + T]`` with step ``dt``.

    ``T`` must be a multiple of ``dt``.  States are stored every
    ``store_every`` steps (initial and final state always).  Raises
    :class:`CFLViolation` when ``dt * max|u| * k_max`` exceeds 0.5 and
    :class:`IntegrationError` on a non-finite state.
    """
    g, p = system.grid, system.params
    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"T={T} must be a positive multiple of dt={dt}")
    uc = _project(g, g.mask * np.array(u_s.coeffs, dtype=complex))
    factor = np.exp(-(p.mu * g.k2 + p.alpha) * dt)
    times = s + dt * np.arange(nsteps + 1)
    cols = {c: np.zeros(nsteps + 1) for c in LEDGER_COLUMNS if c != "time"}
    snap_t, snaps = [times[0]], [VelocityField(g, uc.copy())]

    def log(i, uc, n_full, info):
        cols["h_norm2"][i] = info["h2"]
        cols["grad_norm2"][i] = info["g2"]
        cols["v_norm2"][i] = info["h2"] + info["g2"]
        cols["lr_norm"][i] = info["lr"]
        cols["work_f"][i] = info["wf"]
        cols["work_S"][i] = info["wS"]
        wn = _inner(g, n_full, uc)
        cols["work_other"][i] = wn - info["wf"] - info["wS"] + p.beta * info["lr"]

    for i in range(nsteps):
        t = times[i]
        want = ledger and not system.frozen
        new, n_full, info = step(system, t, uc, dt, factor, info=want)
        if cfl and dt * info["speed"] * g.kmax > CFL_LIMIT:
            raise CFLViolation(
                f"CFL number {dt * info['speed'] * g.kmax:.3g} > {CFL_LIMIT} at t={t:.6g}", t_last=t
            )
        if ledger:
            if system.frozen:
                n_full, info = system.rhs(t, uc, t, info=True)
            log(i, uc, n_full, info)
        if not np.all(np.isfinite(new)):
            raise IntegrationError(f"non-finite state after t={t:.6g}", t_last=t)
        uc = new
        if store_every and (i + 1) % store_every == 0 and i + 1 < nsteps:
            snap_t.append(times[i + 1])
            snaps.append(VelocityField(g, uc.copy()))
    if ledger:
        n_full, info = system.rhs(times[-1], uc, times[-1], info=True)
        log(nsteps, uc, n_full, info)
        cols["residual"] = energy_residual(times, cols, p)
    else:
        cols = {}
    final = VelocityField(g, uc)
    snap_t.append(times[-1])
    snaps.append(final)
    return Trajectory(times, dt, cols, snap_t, snaps, final, p)


def _cumtrapz(t, y):
    return np.concatenate(([0.0], np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))))


def energy_residual(times, cols, params):
    """Normalized residual of the energy equality along a ledger.

    ``|u(t)|^2 + 2 mu int |grad u|^2 + 2 alpha int |u|^2 + 2 beta int |u|_{L^{r+1}}^{r+1}
    - |u(s)|^2 - 2 int (f, u) - 2 int (S Z, u) - 2 int (other, u)``,
    time integrals by the trapezoid rule, divided by ``max(1, |u(s)|^2)``.
    """
    mu, alpha, beta = params.mu, params.alpha, params.beta
    h2 = cols["h_norm2"]
    lhs = (
        h2
        + 2.0 * mu * _cumtrapz(times, cols["grad_norm2"])
        + 2.0 * alpha * _cumtrapz(times, h2)
        + 2.0 * beta * _cumtrapz(times, cols["lr_norm"])
    )
    rhs = h2[0] + 2.0 * _cumtrapz(times, cols["work_f"] + cols["work_S"] + cols["work_other"])
    return np.abs(lhs - rhs) / max(1.0, h2[0])


def cocycle_eval(system, path, t, s, u_s, dt, **kw):
    """``Phi(t, s, omega, u_s) = u(t + s; s, theta_{-s} omega, u_s)``.

    ``system`` is any system with a ``with_path`` method; it is rebuilt on the
    shifted path before integrating from ``s`` to ``s + t``.
    """
    shifted = path.shifted(-s)
    return integrate(system.with_path(shifted), s, t, u_s, dt, ledger=kw.pop("ledger", False), **kw).final
