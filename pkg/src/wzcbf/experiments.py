"""Named experiments with embedded checks, shared by the command line and the tests.

Each experiment takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` holding CSV tables and pass/fail checks.  Nothing
here depends on wall-clock time or on the order in which workers finish, so
outputs are reproducible for a fixed configuration.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .attractor import (
    PullbackProblem,
    PullbackSchedule,
    TailCutoff,
    absorbing_radius_additive,
    absorbing_radius_multiplicative,
    absorbing_radius_wz,
    initial_conditions,
    pullback_run,
    tail_mass,
    usc_experiment,
)
from .diffusion import DiffusionTerm, validate
from .dynamics import CBFParams, Forcing, WZSystem, integrate
from .noise import NoiseParams, WienerPath, colored_noise, noise_diagnostics, ou_forced
from .spectral import (
    TorusGrid,
    VelocityField,
    check_a215,
    check_monotonicity_C,
    gateaux_C,
    inner,
    leray_project,
    nonlinear_C,
    norm_grad,
    norm_H,
    random_field,
    stokes_A,
    taylor_green,
    trilinear_b,
)
from .transforms import solve_additive, solve_multiplicative

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "ConfigError",
    "EXPERIMENTS",
    "run_experiment",
    "config_hash",
]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    """Flat experiment configuration; every field round-trips through JSON."""

    experiment: str = "noise-convergence"
    mode: str = "additive"
    # grid and physics
    n: int = 64
    L: float = 2.0 * math.pi
    mu: float = 0.5
    alpha: float = 1.0
    beta: float = 0.5
    r: float = 3.0
    # noise
    ell: float = 1.0
    h: float = 1e-3
    delta_list: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    # diffusion term
    variant: str = "ndt1_example"
    kappa: float = 0.1
    sigma: float = 0.0
    h_amp: float = 0.3
    q: float = 2.0
    # forcing f = exp(gamma_f t) F with ||F||_H = forcing_amp
    forcing_amp: float = 1.0
    gamma_f: float = 0.0
    # scheduling
    s: float = 0.0
    T: float = 1.0
    dt: float = 1e-3
    depths: list = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    n_ics: int = 8
    ic_amp: float = 1.0
    ic_max: float = 10.0
    seed: int = 0
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    samples: int = 100
    window: float = 60.0
    R5: float = 1.0

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        exp = data.get("experiment", cls.experiment)
        if exp not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown value {exp!r}; expected one of {sorted(EXPERIMENTS)}")
        merged = dict(EXPERIMENTS[exp][1])
        merged.update(data)
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    def to_dict(self):
        return dataclasses.asdict(self)

    def validate(self):
        def need(cond, name, msg):
            if not cond:
                raise ConfigError(f"{name}: {msg} (got {getattr(self, name)!r})")

        need(self.experiment in EXPERIMENTS, "experiment", "unknown experiment")
        need(self.mode in ("additive", "multiplicative"), "mode", "must be 'additive' or 'multiplicative'")
        need(isinstance(self.n, int) and self.n >= 8 and self.n % 2 == 0, "n", "must be an even integer >= 8")
        need(self.L > 0, "L", "must be positive")
        need(self.mu > 0, "mu", "must be positive")
        need(self.alpha >= 0, "alpha", "must be nonnegative")
        need(self.beta >= 0, "beta", "must be nonnegative")
        need(self.r >= 1, "r", "must be at least 1")
        need(self.ell > 0, "ell", "must be positive")
        need(self.h > 0, "h", "must be positive")
        need(len(self.delta_list) > 0 and all(d > 0 for d in self.delta_list), "delta_list", "must be positive values")
        for d in self.delta_list:
            need(abs(d / self.h - round(d / self.h)) < 1e-9 * max(1.0, d / self.h), "delta_list",
                 f"every delta must be a multiple of h={self.h}")
        need(self.variant in ("zero", "constant_g", "linear_u", "ndt1_example", "ndt2_example", "ndt3_example"),
             "variant", "unknown diffusion variant")
        need(1 <= self.q < self.r + 1, "q", "must satisfy 1 <= q < r + 1")
        need(self.dt > 0, "dt", "must be positive")
        need(self.T > 0, "T", "must be positive")
        need(len(self.depths) > 0 and all(t > 0 for t in self.depths) and list(self.depths) == sorted(self.depths),
             "depths", "must be positive and increasing")
        need(self.n_ics >= 1, "n_ics", "must be at least 1")
        need(0 < self.ic_max, "ic_max", "must be positive")
        need(self.samples >= 2, "samples", "must be at least 2")
        need(self.window > 0, "window", "must be positive")
        need(len(self.seeds) > 0, "seeds", "must not be empty")


def config_hash(cfg):
    text = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ExperimentResult:
    """Tables (name -> (columns, rows)) and checks (name, passed, detail)."""

    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    ensembles: dict = field(default_factory=dict)

    def check(self, name, passed, detail=""):
        self.checks.append((name, bool(passed), detail))

    @property
    def passed(self):
        return all(c[1] for c in self.checks)


# helpers ----------------------------------------------------------------


def _grid(cfg):
    return TorusGrid(cfg.n, cfg.L)


def _params(cfg):
    return CBFParams(cfg.mu, cfg.alpha, cfg.beta, cfg.r)


def _forcing(cfg, grid):
    if cfg.forcing_amp == 0:
        return Forcing()
    rng = np.random.Generator(np.random.Philox(key=int(cfg.seed) + 104729))
    return Forcing(random_field(grid, rng, cfg.forcing_amp), cfg.gamma_f)


def _diffusion(cfg, grid, variant=None):
    variant = variant or cfg.variant
    h = taylor_green(grid, cfg.h_amp) if cfg.h_amp else None
    return DiffusionTerm(variant, grid, kappa=cfg.kappa, sigma=cfg.sigma, h=h, q=cfg.q)


def _ceil_to(x, h):
    return math.ceil(x / h - 1e-9) * h


def _path(seed, before, after, h):
    """Sampled path covering ``[-before, after]`` rounded outward to the grid."""
    return WienerPath.sample(seed, -_ceil_to(before, h), _ceil_to(after, h), h)


def _initial(cfg, grid, seed):
    rng = np.random.Generator(np.random.Philox(key=int(seed) + 15485863))
    return random_field(grid, rng, cfg.ic_amp)


@contextmanager
def _pool(threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            yield ex
    else:
        yield None


def _strictly_decreasing(xs):
    return all(b < a for a, b in zip(xs, xs[1:]))


# experiments ----------------------------------------------------------


def exp_noise_convergence(cfg, threads=1):
    res = ExperimentResult()
    params = NoiseParams(tuple(cfg.delta_list), cfg.ell, cfg.s, cfg.T)
    after = cfg.s + cfg.T + max(cfg.delta_list)
    rows = []
    analytic = WienerPath.from_function(lambda t: t**2, -_ceil_to(1.0, cfg.h), _ceil_to(after, cfg.h), cfg.h)
    an_rows = noise_diagnostics(analytic, params)
    worst = 0.0
    for row in an_rows:
        rows.append({"path": "t^2", **row})
        worst = max(worst, abs(row["sup_wz_error"] - cfg.T * row["delta"]))
    res.check("analytic_delta_T_law", worst <= 1e-6, f"max |err - T delta| = {worst:.3e}")
    bad = []
    for seed in cfg.seeds:
        path = _path(seed, 30.0 / cfg.ell, after, cfg.h)
        srows = noise_diagnostics(path, params)
        rows.extend({"path": f"seed{seed}", **r} for r in srows)
        if not _strictly_decreasing([r["sup_wz_error"] for r in srows]):
            bad.append(seed)
    res.check("seeded_strict_decrease", not bad, f"seeds failing: {bad}")
    cols = ["path", "delta", "sup_wz_error", "sup_zy_error", "ergodic_mean", "growth_ratio"]
    res.tables["noise_convergence"] = (cols, rows)
    return res


def exp_ou_convergence(cfg, threads=1):
    res = ExperimentResult()
    params = NoiseParams(tuple(cfg.delta_list), cfg.ell, cfg.s, cfg.T)
    after = cfg.s + cfg.T + max(cfg.delta_list)
    rows, inversions = [], []
    for seed in cfg.seeds:
        path = _path(seed, 30.0 / cfg.ell, after, cfg.h)
        errs = [r["sup_zy_error"] for r in noise_diagnostics(path, params)]
        for d, e in zip(cfg.delta_list, errs):
            rows.append({"seed": seed, "delta": d, "sup_zy_error": e})
        for a, b in zip(errs, errs[1:]):
            if b > a:
                inversions.append(b / a - 1.0)
    ok = len(inversions) == 0 or (len(inversions) == 1 and inversions[0] <= 0.05)
    res.check("nonincreasing_one_5pct_inversion", ok, f"inversions: {[round(x, 4) for x in inversions]}")
    # constant forcing: stationary value c/ell
    c = 1.7
    t_end = 25.0 / cfg.ell
    times = np.arange(0.0, t_end + cfg.h / 2, cfg.h)
    z = ou_forced(times, np.full(times.size, c), cfg.ell)
    late = times >= 20.0 / cfg.ell
    err = float(np.max(np.abs(z.values[late] - c / cfg.ell)))
    res.check("stationary_value", err <= 1e-8, f"max |z - c/ell| after t >= 20/ell: {err:.3e}")
    rows.append({"seed": "constant", "delta": 0.0, "sup_zy_error": err})
    res.tables["ou_convergence"] = (["seed", "delta", "sup_zy_error"], rows)
    return res


def exp_operator_audit(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    rng = np.random.Generator(np.random.Philox(key=int(cfg.seed)))
    rows = []
    worst = {"skew": 0.0, "antisym": 0.0, "stokes": 0.0, "leray": 0.0}
    for i in range(cfg.samples):
        u, v, w = (random_field(grid, rng, 10.0 ** rng.uniform(-1, 1), rng.uniform(1, 3), mean_zero=False) for _ in range(3))
        up = u.physical()
        umax = float(np.sqrt(np.max(np.sum(up**2, axis=0))))
        scale_vv = umax * norm_grad(v) * norm_H(v)
        scale_vw = umax * max(norm_grad(v) * norm_H(w), norm_grad(w) * norm_H(v))
        skew = abs(trilinear_b(u, v, v)) / scale_vv
        anti = abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) / scale_vw
        stokes = abs(inner(stokes_A(u), u) - norm_grad(u) ** 2) / norm_grad(u) ** 2
        p = leray_project(u)
        leray = norm_H(leray_project(p) - p) / norm_H(u)
        rows.append({"sample": i, "skew": skew, "antisym": anti, "stokes": stokes, "leray": leray})
        for k, val in zip(worst, (skew, anti, stokes, leray)):
            worst[k] = max(worst[k], val)
    res.check("b_uvv_zero", worst["skew"] <= 1e-9, f"max rel {worst['skew']:.3e}")
    res.check("b_antisymmetry", worst["antisym"] <= 1e-9, f"max rel {worst['antisym']:.3e}")
    res.check("stokes_energy", worst["stokes"] <= 1e-10, f"max rel {worst['stokes']:.3e}")
    res.check("leray_idempotent", worst["leray"] <= 1e-12, f"max rel {worst['leray']:.3e}")
    res.tables["operator_audit"] = (["sample", "skew", "antisym", "stokes", "leray"], rows)
    return res


def exp_nonlinearity_audit(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    rng = np.random.Generator(np.random.Philox(key=int(cfg.seed)))
    rows = []
    for r in (1.5, 2.0, 3.0, 5.0):
        mo_bad = a_bad = 0
        margin_mo = margin_a = np.inf
        for _ in range(cfg.samples):
            u1 = random_field(grid, rng, 10.0 ** rng.uniform(-1, 1), mean_zero=False)
            u2 = random_field(grid, rng, 10.0 ** rng.uniform(-1, 1), mean_zero=False)
            lhs, rhs = check_monotonicity_C(u1, u2, r)
            margin_mo = min(margin_mo, (lhs - rhs) / max(abs(lhs), 1e-300))
            mo_bad += lhs < rhs * (1.0 - 1e-12)
            lhs, rhs = check_a215(u1, u2, r)
            margin_a = min(margin_a, (rhs - lhs) / max(abs(rhs), 1e-300))
            a_bad += lhs > rhs * (1.0 + 1e-12)
        gat = float("nan")
        if r in (2.0, 3.0, 5.0):
            eps = 1e-5
            gat = 0.0
            for _ in range(10):
                u = random_field(grid, rng, 1.0, mean_zero=False)
                w = random_field(grid, rng, 1.0, mean_zero=False)
                fd = (nonlinear_C(u + eps * w, r) - nonlinear_C(u - eps * w, r)) / (2 * eps)
                gd = gateaux_C(u, w, r)
                gat = max(gat, norm_H(fd - gd) / norm_H(gd))
            res.check(f"gateaux_r{r:g}", gat < 1e-4, f"max rel error {gat:.3e}")
        res.check(f"monotonicity_r{r:g}", mo_bad == 0, f"{mo_bad} violations, min margin {margin_mo:.3e}")
        res.check(f"a215_r{r:g}", a_bad == 0, f"{a_bad} violations, min margin {margin_a:.3e}")
        rows.append({"r": r, "mo_violations": mo_bad, "mo_min_margin": margin_mo,
                     "a215_violations": a_bad, "a215_min_margin": margin_a, "gateaux_rel_error": gat})
    cols = ["r", "mo_violations", "mo_min_margin", "a215_violations", "a215_min_margin", "gateaux_rel_error"]
    res.tables["nonlinearity_audit"] = (cols, rows)
    return res


def _energy_system(cfg, grid, path, delta):
    return WZSystem(grid, _params(cfg), _diffusion(cfg, grid), _forcing(cfg, grid), colored_noise(path, delta))


def exp_energy_audit(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    delta = cfg.delta_list[-1]
    path = _path(cfg.seed, 1.0, cfg.s + cfg.T + delta, cfg.h)
    u0 = _initial(cfg, grid, cfg.seed)
    system = _energy_system(cfg, grid, path, delta)
    jobs = [cfg.dt, cfg.dt / 2.0]
    with _pool(threads) as pool:
        run = lambda dt: integrate(system, cfg.s, cfg.T, u0, dt)  # noqa: E731
        trajs = list(pool.map(run, jobs)) if pool else [run(dt) for dt in jobs]
    r1, r2 = (float(np.max(t.residual)) for t in trajs)
    res.check("residual_bound", r1 < 1e-3 * cfg.T, f"max residual {r1:.3e} vs {1e-3 * cfg.T:.1e}")
    res.check("residual_order", r1 / r2 >= 3.5, f"ratio {r1 / r2:.3f} ({r1:.3e} -> {r2:.3e})")
    from .dynamics import LEDGER_COLUMNS

    res.tables["energy_ledger"] = (list(LEDGER_COLUMNS), trajs[0].ledger_rows())
    res.tables["energy_summary"] = (["dt", "max_residual"], [(jobs[0], r1), (jobs[1], r2)])
    return res


def exp_decay(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    params = _params(cfg)
    u0 = _initial(cfg, grid, cfg.seed)
    traj = integrate(WZSystem(grid, params), cfg.s, cfg.T, u0, cfg.dt)
    h = np.sqrt(traj.ledger["h_norm2"])
    bound = np.exp(-params.alpha * (traj.times - cfg.s)) * h[0]
    excess = float(np.max(h - bound))
    res.check("exponential_decay", excess <= 1e-8, f"max(|u| - bound) = {excess:.3e}")
    res.check("monotone_norm", bool(np.all(np.diff(h) <= 1e-14)), "")
    res.tables["decay"] = (["time", "norm_H", "bound"], list(zip(traj.times, h, bound)))
    return res


def _solve_mode(mode, grid, params, forcing, path, kind, s, T, u0, dt, delta, cfg):
    if mode == "additive":
        return solve_additive(grid, params, forcing, path, kind, s, T, u0, dt, ell=cfg.ell, sigma=cfg.sigma,
                              delta=delta, ledger=False)[0]
    return solve_multiplicative(grid, params, forcing, path, kind, s, T, u0, dt, delta=delta, ledger=False)[0]


def exp_solution_convergence(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    params, forcing = _params(cfg), _forcing(cfg, grid)
    u0 = _initial(cfg, grid, cfg.seed)
    rows, bad = [], []
    for seed in cfg.seeds:
        path = _path(seed, 30.0 / cfg.ell, cfg.s + cfg.T + max(cfg.delta_list), cfg.h)
        jobs = [None] + list(cfg.delta_list)

        def run(delta, path=path):
            kind = "white" if delta is None else "wz"
            return _solve_mode(cfg.mode, grid, params, forcing, path, kind, cfg.s, cfg.T, u0, cfg.dt, delta, cfg)

        with _pool(threads) as pool:
            sols = list(pool.map(run, jobs)) if pool else [run(d) for d in jobs]
        errs = [norm_H(u - sols[0]) for u in sols[1:]]
        factors = [a / b for a, b in zip(errs, errs[1:])]
        for d, e in zip(cfg.delta_list, errs):
            rows.append({"seed": seed, "delta": d, "error": e})
        if not (_strictly_decreasing(errs) and all(f >= 1.3 for f in factors)):
            bad.append((seed, [round(float(f), 3) for f in factors]))
    res.check(f"{cfg.mode}_decrease_factor_1.3", not bad, f"failing (seed, factors): {bad}")
    res.tables[f"solution_convergence_{cfg.mode}"] = (["seed", "delta", "error"], rows)
    return res


def _absorb_setup(cfg, grid):
    params = _params(cfg)
    term = _diffusion(cfg, grid)
    growth = (0.0, 0.0, 0.0)
    if term.variant not in ("zero", "constant_g", "linear_u"):
        report = {c.condition: c.constant for c in validate(term, seed=cfg.seed)}
        growth = (report.get("S4_s3", 0.0), report.get("S4_s4", 0.0), report.get("S4_s5", 0.0))
    return params, term, growth


def exp_absorb(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    params, term, growth = _absorb_setup(cfg, grid)
    forcing = _forcing(cfg, grid)
    delta = cfg.delta_list[-1]
    depth = max(cfg.depths)
    path = _path(cfg.seed, max(depth, cfg.window) - cfg.s, max(cfg.s, 0.0) + delta, cfg.h)
    rad = absorbing_radius_wz(path, delta, params, forcing, term.kappa if term.has_kappa else 0.0, term.sigma,
                              term.h_norm, growth, cfg.s, window=cfg.window)
    R = rad.value
    xi, E = rad.parts["xi"], rad.parts["E"]
    schedule = PullbackSchedule(cfg.s, tuple(cfg.depths), cfg.n_ics, cfg.ic_max, cfg.seed)
    ics = initial_conditions(grid, schedule)
    max0 = max(norm_H(u) for u in ics) ** 2
    # first depth whose initial-data term e^{E(-t)} max|u0|^2 fits in the 5% slack
    t_star = None
    for t in cfg.depths:
        if np.exp(np.interp(-t, xi[::-1], E[::-1])) * max0 <= 0.05 * R:
            t_star = t
            break
    problem = PullbackProblem("wz", grid, params, forcing, delta, term)
    with _pool(threads) as pool:
        ens = pullback_run(problem, path, schedule, cfg.dt, ics, pool=pool)
    ens.radius = R
    rows = ens.rows()
    for row in rows:
        row["radius"] = R
    after = [row for row in rows if t_star is not None and row["depth"] >= t_star]
    ok = t_star is not None and all(row["inside"] for row in after)
    worst = max((row["norm2"] / R for row in after), default=float("nan"))
    res.check("inside_ball_after_T_star", ok, f"T*={t_star}, R={R:.6g}, max |u|^2/R after T* = {worst:.3e}")
    res.check("radius_tail_small", rad.tail_estimate <= 1e-6 * R, f"tail {rad.tail_estimate:.3e}")
    res.tables["absorb"] = (["depth", "ic", "ic_norm", "norm2", "radius", "inside"], rows)
    res.tables["absorb_summary"] = (
        ["radius", "tail_estimate", "T_star", "s3", "s4", "s5", "s6", "s7"],
        [(R, rad.tail_estimate, -1.0 if t_star is None else t_star, *growth, rad.parts["s6"], rad.parts["s7"])],
    )
    res.ensembles["absorb"] = ens
    return res


def exp_radius_convergence(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    params, forcing = _params(cfg), _forcing(cfg, grid)
    g_norm = 1.0
    path = _path(cfg.seed, cfg.window - cfg.s, max(cfg.s, 0.0) + max(cfg.delta_list), cfg.h)
    rows = []
    for mode in ("additive", "multiplicative"):
        def radius(delta):
            kind = "white" if delta is None else "wz"
            if mode == "additive":
                return absorbing_radius_additive(path, kind, params, forcing, g_norm, cfg.ell, cfg.sigma, delta,
                                                 cfg.s, R5=cfg.R5, window=cfg.window)
            return absorbing_radius_multiplicative(path, kind, params, forcing, delta, cfg.s, window=cfg.window)

        white = radius(None)
        diffs = []
        for delta in cfg.delta_list:
            r = radius(delta)
            diffs.append(abs(r.value - white.value))
            rows.append({"mode": mode, "delta": delta, "radius": r.value, "white_radius": white.value,
                         "abs_diff": diffs[-1], "tail_estimate": r.tail_estimate})
        tol = 1e-6 * white.value
        ok = all(b <= a + tol for a, b in zip(diffs, diffs[1:]))
        res.check(f"{mode}_monotone_convergence", ok,
                  f"|R_delta - R_0| / R_0 = {[round(float(d / white.value), 5) for d in diffs]}")
    res.tables["radius_convergence"] = (["mode", "delta", "radius", "white_radius", "abs_diff", "tail_estimate"], rows)
    return res


def exp_usc(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    params, forcing = _params(cfg), _forcing(cfg, grid)
    depth = max(cfg.depths)
    path = _path(cfg.seed, depth - cfg.s, max(cfg.s, 0.0) + max(cfg.delta_list), cfg.h)
    schedule = PullbackSchedule(cfg.s, tuple(cfg.depths), cfg.n_ics, cfg.ic_max, cfg.seed)
    problem = PullbackProblem(cfg.mode, grid, params, forcing, None, ell=cfg.ell, sigma=cfg.sigma)
    with _pool(threads) as pool:
        rows = usc_experiment(problem, path, schedule, cfg.delta_list, cfg.dt, pool=pool)
    d = [row["dist_H"] for row in rows]
    ok = all(b <= 1.2 * a for a, b in zip(d, d[1:]))
    gate = all(row["converged"] for row in rows)
    res.check(f"{cfg.mode}_dist_nonincreasing_20pct", ok, f"dist_H = {[f'{x:.4g}' for x in d]}")
    res.check("depth_gate", gate, f"max drift {max(row['drift'] for row in rows):.3e}")
    res.tables[f"usc_{cfg.mode}"] = (["delta", "dist_H", "converged", "drift"], rows)
    return res


def exp_validate_assumptions(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    rows = []
    wanted = {
        "ndt1_example": ("S2_lip", "S3_weak", "S4_s3", "S4_s4", "S4_s5"),
        "ndt2_example": ("S1_orth",),
        "ndt3_example": ("GS1_bound",),
    }
    for variant, conds in wanted.items():
        term = _diffusion(cfg, grid, variant)
        for c in validate(term, n_samples=cfg.samples, seed=cfg.seed):
            rows.append({"variant": variant, "condition": c.condition, "constant": c.constant,
                         "samples": c.samples, "pass": c.passed})
            if c.condition in conds:
                res.check(f"{variant}_{c.condition}", c.passed, f"constant {c.constant:.6g}")
    res.tables["assumptions"] = (["variant", "condition", "constant", "samples", "pass"], rows)
    return res


def exp_tail_diagnostic(cfg, threads=1):
    res = ExperimentResult()
    grid = _grid(cfg)
    x, y = grid.coords
    cx = (x + grid.L / 2) % grid.L - grid.L / 2
    cy = (y + grid.L / 2) % grid.L - grid.L / 2
    width = grid.L / 24.0
    psi = np.exp(-(cx**2 + cy**2) / (2 * width**2))
    # divergence-free bump from the stream function psi
    ph = np.fft.rfft2(psi)
    u = VelocityField(grid, np.stack((1j * grid.ky * ph, -1j * grid.kx * ph)) / grid.n**2)
    energy = norm_H(u) ** 2
    ks = [grid.L * f for f in (0.12, 0.15, 0.18, 0.21, 0.24)]
    rng = np.random.Generator(np.random.Philox(key=int(cfg.seed)))
    v = random_field(grid, rng, 1.0)
    rows = []
    for k in ks:
        cut = TailCutoff(k)
        rows.append({"k": k, "bump_tail": tail_mass(u, cut) / energy, "random_tail": tail_mass(v, cut)})
    rt = [row["random_tail"] for row in rows]
    res.check("monotone_in_k", all(b <= a + 1e-15 for a, b in zip(rt, rt[1:])), "")
    res.check("localized_bump_tail", rows[-1]["bump_tail"] <= 1e-6, f"{rows[-1]['bump_tail']:.3e}")
    unit = tail_mass(v, TailCutoff(ks[0], unit=True))
    res.check("unit_weight_energy", abs(unit - norm_H(v) ** 2) <= 1e-12, "")
    res.tables["tail_diagnostic"] = (["k", "bump_tail", "random_tail"], rows)
    return res


# name -> (function, default overrides)
EXPERIMENTS = {
    "noise-convergence": (exp_noise_convergence, {"T": 5.0, "h": 1e-3, "seeds": [0, 1, 2, 3, 4]}),
    "ou-convergence": (exp_ou_convergence, {"T": 5.0, "h": 1e-3, "seeds": [0, 1, 2, 3, 4]}),
    "operator-audit": (exp_operator_audit, {"samples": 100}),
    "nonlinearity-audit": (exp_nonlinearity_audit, {"samples": 100}),
    "energy-audit": (exp_energy_audit, {"T": 1.0, "dt": 1e-3, "h": 1e-3, "r": 3.0, "variant": "ndt1_example",
                                        "mu": 0.1, "alpha": 0.5, "beta": 1.0, "delta_list": [0.05]}),
    "decay": (exp_decay, {"T": 2.0, "dt": 1e-3, "forcing_amp": 0.0, "variant": "zero", "ic_amp": 2.0}),
    "wz-solution-convergence": (exp_solution_convergence, {"T": 2.0, "dt": 2e-3, "h": 2e-3}),
    "absorb": (exp_absorb, {"dt": 2.5e-3, "h": 2.5e-3, "delta_list": [0.05], "depths": [1.0, 2.0, 4.0, 8.0],
                            "n_ics": 8, "ic_max": 10.0, "window": 60.0}),
    "radius-convergence": (exp_radius_convergence, {"h": 2.5e-3, "delta_list": [0.2, 0.1, 0.05, 0.025],
                                                    "window": 60.0}),
    "usc": (exp_usc, {"dt": 2.5e-3, "h": 2.5e-3, "depths": [6.0, 8.0], "n_ics": 3, "ic_max": 10.0}),
    "validate-assumptions": (exp_validate_assumptions, {"samples": 16}),
    "tail-diagnostic": (exp_tail_diagnostic, {}),
}


def run_experiment(cfg, threads=1):
    cfg.validate()
    return EXPERIMENTS[cfg.experiment][0](cfg, threads)
