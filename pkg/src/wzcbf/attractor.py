"""Pullback experiments: absorbing radii, endpoint ensembles, Hausdorff distances, tails.

Pullback endpoints are ``u(s; s - t, theta_{-s} omega, u0)`` for a list of
depths ``t``.  Radii are computed by trapezoid quadrature on the nodes of the
sampled path over a finite backward window ``[t_min, 0]``; the neglected tail
is estimated and reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .diffusion import DiffusionTerm
from .dynamics import Forcing, WZSystem, integrate
from .noise import colored_noise, ou_y, ou_z
from .spectral import TorusGrid, VelocityField, norm_H, random_field, taylor_green
from .transforms import solve_additive, solve_multiplicative

__all__ = [
    "PullbackSchedule",
    "PullbackProblem",
    "EndpointEnsemble",
    "RadiusResult",
    "initial_conditions",
    "pullback_run",
    "absorbing_radius_wz",
    "absorbing_radius_additive",
    "absorbing_radius_multiplicative",
    "s7_constant",
    "hausdorff_semidist",
    "usc_experiment",
    "TailCutoff",
    "tail_mass",
    "smoothstep",
]


# schedules and problems ------------------------------------------------


@dataclass(frozen=True)
class PullbackSchedule:
    """Target time ``s``, depths ``t_list`` and initial data settings."""

    s: float = 0.0
    t_list: tuple = (1.0, 2.0, 4.0, 8.0)
    n_ics: int = 8
    ic_max: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if any(t <= 0 for t in self.t_list) or list(self.t_list) != sorted(self.t_list):
            raise ValueError("depths must be positive and increasing")


def initial_conditions(grid, schedule):
    """``n_ics`` random divergence-free fields with norms spread over ``(0, ic_max]``."""
    rng = np.random.Generator(np.random.Philox(key=int(schedule.seed) + 7919))
    amps = schedule.ic_max * np.arange(1, schedule.n_ics + 1) / schedule.n_ics
    return [random_field(grid, rng, a) for a in amps]


@dataclass
class PullbackProblem:
    """Which system a pullback run integrates.

    ``kind`` is ``'wz'`` (the Wong-Zakai system with a general diffusion term,
    ``delta`` required), ``'additive'`` or ``'multiplicative'`` (solved through
    the transformed equations; ``delta=None`` selects white noise).
    """

    kind: str
    grid: TorusGrid
    params: object
    forcing: Forcing = field(default_factory=Forcing)
    delta: float | None = None
    diffusion: DiffusionTerm | None = None
    ell: float = 1.0
    sigma: float = 0.0
    g: VelocityField | None = None

    def __post_init__(self):
        if self.kind not in ("wz", "additive", "multiplicative"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind == "wz" and self.delta is None:
            raise ValueError("the Wong-Zakai system needs delta")
        if self.kind == "additive" and self.g is None:
            self.g = taylor_green(self.grid)

    @property
    def mode(self):
        return "white" if self.delta is None else "wz"

    def with_delta(self, delta):
        return PullbackProblem(
            self.kind, self.grid, self.params, self.forcing, delta, self.diffusion, self.ell, self.sigma, self.g
        )

    def solve(self, path, start, T, u0, dt):
        """State at ``start + T`` from ``u0`` at ``start``, noise read from ``path``."""
        if self.kind == "wz":
            system = WZSystem(self.grid, self.params, self.diffusion, self.forcing, colored_noise(path, self.delta))
            return integrate(system, start, T, u0, dt, ledger=False).final
        if self.kind == "additive":
            return solve_additive(
                self.grid, self.params, self.forcing, path, self.mode, start, T, u0, dt,
                ell=self.ell, sigma=self.sigma, delta=self.delta, g=self.g, ledger=False,
            )[0]
        return solve_multiplicative(
            self.grid, self.params, self.forcing, path, self.mode, start, T, u0, dt, delta=self.delta, ledger=False
        )[0]


@dataclass
class EndpointEnsemble:
    """Pullback endpoints indexed by depth and initial condition."""

    s: float
    depths: list
    endpoints: dict
    ic_norms: list
    radius: float | None = None

    def at_depth(self, t):
        return [self.endpoints[(t, i)] for i in range(len(self.ic_norms))]

    def rows(self, slack=1.05):
        out = []
        for t in self.depths:
            for i in range(len(self.ic_norms)):
                n2 = norm_H(self.endpoints[(t, i)]) ** 2
                inside = self.radius is not None and n2 <= slack * self.radius
                out.append({"depth": t, "ic": i, "ic_norm": self.ic_norms[i], "norm2": n2, "inside": inside})
        return out


def pullback_run(problem, path, schedule, dt, ics=None, depths=None, pool=None):
    """Endpoints ``u(s; s - t, theta_{-s} omega, u0)`` for all depths and initial data."""
    ics = initial_conditions(problem.grid, schedule) if ics is None else ics
    depths = list(schedule.t_list if depths is None else depths)
    s = schedule.s
    shifted = path.shifted(-s)
    jobs = [(t, i) for t in depths for i in range(len(ics))]

    def run(job):
        t, i = job
        return problem.solve(shifted, s - t, t, ics[i], dt)

    results = list(pool.map(run, jobs)) if pool is not None else [run(j) for j in jobs]
    return EndpointEnsemble(s, depths, dict(zip(jobs, results)), [norm_H(u) for u in ics])


# absorbing radii -------------------------------------------------------


@dataclass(frozen=True)
class RadiusResult:
    """Squared radius ``value`` of the absorbing ball and the estimated neglected tail."""

    value: float
    tail_estimate: float
    window: float
    parts: dict = field(default_factory=dict)


def _window(times, window):
    """Indices of the nodes in ``[-window, 0]``, ordered backward from 0."""
    h = times[1] - times[0]
    i0 = int(round(-times[0] / h))
    n = i0 if window is None else min(i0, int(round(window / h)))
    return np.arange(i0, i0 - n - 1, -1)


def _backward_integral(xi, integrand):
    """``int_{xi_min}^0`` by trapezoid, with ``xi`` decreasing from 0."""
    return float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * -np.diff(xi)))


def _tail(xi, weight, base, rate):
    # heuristic remainder: last weight times a unit of the integrand, decaying at ``rate``.
    # The true remainder depends on the path beyond the window and can be larger.
    last = slice(max(0, len(xi) - int(round(1.0 / (xi[0] - xi[1]))) - 1), len(xi))
    return float(weight[-1] * np.max(np.abs(base[last])) / max(rate, 1e-300))


def s7_constant(params, s4, s5):
    """``s4 (1 - s5) [4 s4 (1 + s5) / min(mu, alpha)]^{(1 + s5)/(1 - s5)}``."""
    m = min(params.mu, params.alpha)
    return s4 * (1.0 - s5) * (4.0 * s4 * (1.0 + s5) / m) ** ((1.0 + s5) / (1.0 - s5))


def absorbing_radius_wz(path, delta, params, forcing, kappa=0.0, sigma=0.0, h_norm=0.0, growth=(0.0, 0.0, 0.0), s=0.0, window=None):
    """Squared absorbing radius for the Wong-Zakai system with a general diffusion term.

    ``4/min(mu, alpha) int_{-inf}^0 e^{E(xi)} ||f(xi + s)||_{V'}^2 dxi``
    ``+ int_{-inf}^0 e^{E(xi)} {2 s3 e_Z + 2 s6 e_Z^2 + s7 e_Z^{2/(1-s5)}} dxi`` with
    ``E(xi) = int_0^xi (alpha - 2 kappa e^{sigma(zeta+s)} Z_delta(theta_zeta omega)) dzeta``,
    ``e_Z = e^{sigma(xi+s)} |Z_delta(theta_xi omega)|`` and ``s6 = 2||h||^2/alpha``.
    """
    if not params.alpha > 0:
        raise ValueError("the radius needs alpha > 0")
    zn = colored_noise(path, delta)
    idx = _window(zn.times, window)
    xi = zn.times[idx]
    z = zn.values[idx]
    env = np.exp(sigma * (xi + s))
    rate = params.alpha - 2.0 * kappa * env * z
    E = np.concatenate(([0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(xi))))
    w = np.exp(E)
    m = min(params.mu, params.alpha)
    s3, s4, s5 = growth
    s6 = 2.0 * h_norm**2 / params.alpha
    s7 = s7_constant(params, s4, s5) if s4 > 0 else 0.0
    fz = forcing.dual_norm2(xi + s)
    ez = env * np.abs(z)
    noise = 2.0 * s3 * ez + 2.0 * s6 * ez**2 + s7 * ez ** (2.0 / (1.0 - s5))
    base = 4.0 / m * fz + noise
    parts = {
        "forcing": _backward_integral(xi, w * 4.0 / m * fz),
        "noise": _backward_integral(xi, w * noise),
        "s6": s6,
        "s7": s7,
        "xi": xi,
        "E": E,
    }
    value = parts["forcing"] + parts["noise"]
    return RadiusResult(value, _tail(xi, w, base, params.alpha), float(-xi[-1]), parts)


def absorbing_radius_additive(path, mode, params, forcing, g_norm=1.0, ell=1.0, sigma=0.0, delta=None, s=0.0, form="2d", R5=1.0, R8=1.0, window=None):
    """Squared absorbing radius of the additive-noise system, white or Wong-Zakai.

    ``3 ||g||^2 |e^{sigma s} c(0)|^2 + 2 R int_{-inf}^0 e^{alpha xi}[||f(xi+s)||_{V'}^2
    + |c|^2 + |c|^{r+1} + |c|^{2(r+1)/(r-1)}] dxi`` with ``c = e^{sigma(xi+s)} y(xi)``
    (or ``z_delta``).  The ``'3d'`` form drops the last power and uses ``R8``.
    """
    p = params
    if form == "2d" and not p.r > 1:
        raise ValueError("the 2D form needs r > 1")
    if not p.alpha > 0:
        raise ValueError("the radius needs alpha > 0")
    proc = ou_y(path, ell) if mode == "white" else ou_z(path, delta, ell)
    idx = _window(proc.times, window)
    xi = proc.times[idx]
    c = np.abs(np.exp(sigma * (xi + s)) * proc.values[idx])
    w = np.exp(p.alpha * xi)
    base = forcing.dual_norm2(xi + s) + c**2 + c ** (p.r + 1.0)
    if form == "2d":
        base = base + c ** (2.0 * (p.r + 1.0) / (p.r - 1.0))
        R = R5
    elif form == "3d":
        R = R8
    else:
        raise ValueError("form must be '2d' or '3d'")
    head = 3.0 * g_norm**2 * c[0] ** 2
    integral = _backward_integral(xi, w * base)
    return RadiusResult(head + 2.0 * R * integral, 2.0 * R * _tail(xi, w, base, p.alpha), float(-xi[-1]),
                        {"head": head, "integral": integral})


def absorbing_radius_multiplicative(path, mode, params, forcing, delta=None, s=0.0, window=None):
    """``4/min(mu, alpha) int_{-inf}^0 e^{alpha xi - 2 a(xi)} ||f(xi + s)||_{V'}^2 dxi``.

    ``a = omega`` for white noise and ``a(xi) = int_0^xi Z_delta`` otherwise.
    """
    p = params
    if not p.alpha > 0:
        raise ValueError("the radius needs alpha > 0")
    if mode == "white":
        times, a = path.times, path.samples
    else:
        zn = colored_noise(path, delta)
        times, a = zn.times, zn.integral
    idx = _window(times, window)
    xi = times[idx]
    w = np.exp(p.alpha * xi - 2.0 * a[idx])
    base = forcing.dual_norm2(xi + s)
    m = min(p.mu, p.alpha)
    return RadiusResult(4.0 / m * _backward_integral(xi, w * base), 4.0 / m * _tail(xi, w, base, p.alpha), float(-xi[-1]))


# distances and the USC experiment -------------------------------------


def _as_vectors(fields):
    g = fields[0].grid
    scale = g.L * np.sqrt(g.weights)
    out = []
    for u in fields:
        c = u.coeffs * scale
        out.append(np.concatenate((c.real.ravel(), c.imag.ravel())))
    return np.array(out)


def hausdorff_semidist(A, B):
    """``max_{a in A} min_{b in B} ||a - b||_H`` over finite sets of fields."""
    if not A:
        return 0.0
    if not B:
        return float("inf")
    d = cdist(_as_vectors(A), _as_vectors(B))
    return float(np.max(np.min(d, axis=1)))


def usc_experiment(problem, path, schedule, delta_list, dt, gate=0.01, pool=None):
    """Hausdorff semidistance of Wong-Zakai endpoint sets from the white-noise set.

    Endpoints are taken at the deepest depth; the gate requires the relative
    drift between the two deepest depths to stay below ``gate`` for every
    initial condition.  Returns a list of dicts
    ``delta, dist_H, converged, drift``.
    """
    if len(schedule.t_list) < 2:
        raise ValueError("the depth gate needs at least two depths")
    depths = list(schedule.t_list[-2:])
    ics = initial_conditions(problem.grid, schedule)

    def endpoints(prob):
        ens = pullback_run(prob, path, schedule, dt, ics, depths, pool)
        deep, prev = ens.at_depth(depths[-1]), ens.at_depth(depths[-2])
        drift = max(norm_H(a - b) / max(norm_H(a), 1e-300) for a, b in zip(deep, prev))
        return deep, drift

    ref, ref_drift = endpoints(problem.with_delta(None))
    rows = []
    for delta in delta_list:
        pts, drift = endpoints(problem.with_delta(delta))
        worst = max(drift, ref_drift)
        rows.append({"delta": float(delta), "dist_H": hausdorff_semidist(pts, ref), "converged": worst < gate, "drift": worst})
    return rows


# tails -------------------------------------------------------------------


def smoothstep(x):
    """``Psi``: 0 for ``x <= 1``, 1 for ``x >= 2``, quintic smoothstep between."""
    t = np.clip(np.asarray(x, dtype=float) - 1.0, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


SMOOTHSTEP_MAX_SLOPE = 15.0 / 8.0


@dataclass(frozen=True)
class TailCutoff:
    """Cutoff ``Psi(|x|^2 / k^2)``; ``unit=True`` replaces ``Psi`` by 1."""

    k: float
    unit: bool = False

    def weight(self, grid):
        if self.unit:
            return np.ones((grid.n, grid.n))
        if not 2.0 * self.k < grid.L / 2.0:
            raise ValueError("need 2k < L/2 so the cutoff fits in the box")
        x, y = grid.coords
        cx = (x + grid.L / 2.0) % grid.L - grid.L / 2.0
        cy = (y + grid.L / 2.0) % grid.L - grid.L / 2.0
        return smoothstep((cx**2 + cy**2) / self.k**2)


def tail_mass(u, cutoff):
    """``int Psi(|x|^2/k^2) |u|^2 dx`` with ``x`` measured from the origin of the torus."""
    g = u.grid
    return g.dx**2 * float(np.sum(cutoff.weight(g) * np.sum(u.physical() ** 2, axis=0)))
