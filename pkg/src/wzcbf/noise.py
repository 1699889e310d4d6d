"""Sampled Wiener paths, Wong-Zakai colored noise and Ornstein-Uhlenbeck processes.

A two-sided Wiener path is stored on the uniform grid ``t_min + i*h`` with the
normalization ``omega(0) = 0``.  Between nodes the path is linear, so every
quantity derived from it (the colored noise ``Z_delta``, its running integral,
the OU processes) is computed exactly for that piecewise-linear path, up to the
one-step recursion used for the white-noise OU process.

The colored noise is the forward difference quotient

    Z_delta(theta_t omega) = (omega(t + delta) - omega(t)) / delta,

which for ``delta`` a multiple of ``h`` is again piecewise linear on the grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WienerPath",
    "ColoredNoise",
    "OUProcess",
    "NoiseParams",
    "colored_noise",
    "ou_y",
    "ou_z",
    "noise_diagnostics",
    "TruncationWarning",
]

_SNAP = 1e-9
TRUNCATION_TOL = 1e-6


class TruncationWarning(UserWarning):
    """OU value is evaluated too close to the start of the sampling window."""


def _node_count(span, h):
    m = span / h
    k = int(round(m))
    if abs(m - k) > _SNAP * max(1.0, abs(m)):
        raise ValueError(f"{span} is not an integer multiple of h={h}")
    return k


class WienerPath:
    """Piecewise-linear two-sided Wiener path on a uniform grid.

    Arguments
    ---------
    t_min : float
        First node.  Must satisfy ``-t_min / h`` integer so that ``t = 0`` is a node.
    h : float
        Grid step.
    samples : (N,) array_like
        Path values at the nodes; the value at ``t = 0`` must be exactly zero.
    seed : int or None
        Seed the path was generated from, kept for provenance.

    """

    def __init__(self, t_min, h, samples, seed=None):
        h = float(h)
        if not h > 0:
            raise ValueError("h must be positive")
        samples = np.array(samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("samples must be a 1D array with at least two nodes")
        i0 = _node_count(-float(t_min), h)
        if not 0 <= i0 < samples.size:
            raise ValueError("t = 0 must lie inside the sampling window")
        if samples[i0] != 0.0:
            raise ValueError("omega(0) must be exactly zero")
        samples.setflags(write=False)
        self.t_min = float(t_min)
        self.h = h
        self.samples = samples
        self.seed = seed
        self.i0 = i0
        self._cache = {}

    # construction -----------------------------------------------------

    @classmethod
    def sample(cls, seed, t_min, t_max, h):
        """Draw a path from a counter-based generator keyed by ``seed``.

        All increments come from one Philox stream in a fixed order, so the
        path does not depend on how or when it is later evaluated.
        """
        n_left = _node_count(-float(t_min), h)
        n_right = _node_count(float(t_max), h)
        if n_left < 0 or n_right < 0:
            raise ValueError("need t_min <= 0 <= t_max")
        rng = np.random.Generator(np.random.Philox(key=int(seed)))
        dw = rng.standard_normal(n_left + n_right) * np.sqrt(h)
        w = np.concatenate(([0.0], np.cumsum(dw)))
        w = w - w[n_left]
        w[n_left] = 0.0
        return cls(-n_left * h, h, w, seed=seed)

    @classmethod
    def from_function(cls, fn, t_min, t_max, h):
        """Sample a deterministic path ``fn`` on the grid, shifted so that omega(0) = 0."""
        n_left = _node_count(-float(t_min), h)
        n_right = _node_count(float(t_max), h)
        t = (np.arange(n_left + n_right + 1) - n_left) * h
        w = np.asarray(fn(t), dtype=float) - float(fn(np.zeros(1))[0])
        w[n_left] = 0.0
        return cls(-n_left * h, h, w)

    # grid -------------------------------------------------------------

    @property
    def n(self):
        return self.samples.size

    @property
    def t_max(self):
        return self.t_min + (self.n - 1) * self.h

    @property
    def times(self):
        return (np.arange(self.n) - self.i0) * self.h

    def index(self, t):
        """Grid index of the node at ``t``; raises if ``t`` is not a node."""
        x = (t - self.t_min) / self.h
        i = int(round(x))
        if abs(x - i) > _SNAP * max(1.0, abs(x)) or not 0 <= i < self.n:
            raise ValueError(f"t={t} is not a node of the path")
        return i

    def steps(self, dt):
        """Number of grid steps in ``dt``; raises unless ``dt`` is a multiple of h."""
        return _node_count(float(dt), self.h)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min - _SNAP * self.h) or np.any(t > self.t_max + _SNAP * self.h):
            raise ValueError("evaluation time outside the sampling window")
        return np.interp(t, self.times, self.samples)

    # transformations --------------------------------------------------

    def shifted(self, tau):
        """Wiener shift ``theta_tau omega = omega(. + tau) - omega(tau)``.

        ``tau`` must be a multiple of h; the result is again normalized at 0.
        """
        j = self.index(tau)
        w = self.samples - self.samples[j]
        w[j] = 0.0
        return WienerPath(self.t_min - (j - self.i0) * self.h, self.h, w, seed=self.seed)

    def refined(self, seed=None):
        """Brownian-bridge refinement onto the grid with step h/2.

        The original nodes are kept; midpoints are drawn from the bridge with a
        generator keyed by ``seed`` (defaults to the path seed plus one).
        """
        if seed is None:
            seed = 0 if self.seed is None else int(self.seed) + 1
        rng = np.random.Generator(np.random.Philox(key=int(seed)))
        w = self.samples
        mid = 0.5 * (w[1:] + w[:-1]) + rng.standard_normal(w.size - 1) * np.sqrt(self.h / 4.0)
        out = np.empty(2 * w.size - 1)
        out[0::2] = w
        out[1::2] = mid
        return WienerPath(self.t_min, self.h / 2.0, out, seed=seed)

    def __repr__(self):
        return f"WienerPath(t_min={self.t_min}, t_max={self.t_max}, h={self.h}, seed={self.seed})"


@dataclass(frozen=True)
class ColoredNoise:
    """Node values of ``Z_delta`` and of its running integral from 0.

    Defined on nodes ``t_min .. t_max - delta``.
    """

    path: WienerPath
    delta: float
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    integral: np.ndarray = field(repr=False)

    def __call__(self, t):
        return _interp_checked(t, self.times, self.values)

    def integrated(self, t):
        """``int_0^t Z_delta(theta_s omega) ds`` (negative orientation for t < 0)."""
        return _interp_checked(t, self.times, self.integral)


def _interp_checked(t, times, values):
    t = np.asarray(t, dtype=float)
    h = times[1] - times[0]
    if np.any(t < times[0] - _SNAP * h) or np.any(t > times[-1] + _SNAP * h):
        raise ValueError("evaluation time outside the window where the process is defined")
    return np.interp(t, times, values)


def _cumtrapz_from(values, h, i0):
    """Trapezoid integral from node ``i0`` to every node, signed."""
    c = np.concatenate(([0.0], np.cumsum(0.5 * h * (values[1:] + values[:-1]))))
    return c - c[i0]


def colored_noise(path, delta):
    """Colored noise ``Z_delta`` on the nodes of ``path``.

    ``delta`` must be a positive multiple of the path step.  The running
    integral uses the composite trapezoid rule on the grid, which is exact
    because ``Z_delta`` is linear between nodes.
    """
    key = ("Z", float(delta))
    if key in path._cache:
        return path._cache[key]
    if not delta > 0:
        raise ValueError("delta must be positive")
    m = path.steps(delta)
    if m < 1 or m >= path.n - path.i0:
        raise ValueError("delta must be at least h and leave t = 0 inside the window")
    w = path.samples
    z = (w[m:] - w[:-m]) / delta
    times = path.times[: path.n - m]
    integral = _cumtrapz_from(z, path.h, path.i0)
    for a in (times, z, integral):
        a.setflags(write=False)
    out = ColoredNoise(path, float(delta), times, z, integral)
    path._cache[key] = out
    return out


@dataclass(frozen=True)
class OUProcess:
    """Node values of an OU process started from 0 at the window start."""

    ell: float
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    delta: float | None = None
    forcing: np.ndarray | None = field(default=None, repr=False)

    def truncation_bound(self, t):
        """Weight ``exp(-ell (t - t_min))`` of the discarded history before the window."""
        return np.exp(-self.ell * (np.asarray(t, dtype=float) - self.times[0]))

    def __call__(self, t):
        bound = self.truncation_bound(t)
        if np.any(bound > TRUNCATION_TOL):
            warnings.warn(
                f"OU value within {float(np.max(bound)):.3g} of the window-start transient",
                TruncationWarning,
                stacklevel=2,
            )
        return self.evaluate(t)

    def evaluate(self, t):
        """Value at ``t`` without the truncation warning.

        With a piecewise-linear forcing stored, points between nodes are
        propagated exactly from the node to their left; otherwise the node
        values are interpolated linearly.
        """
        if self.forcing is None:
            return _interp_checked(t, self.times, self.values)
        t = np.asarray(t, dtype=float)
        _interp_checked(t, self.times, self.values)
        h = self.times[1] - self.times[0]
        x = (t - self.times[0]) / h
        i = np.clip(np.floor(x + _SNAP).astype(int), 0, self.times.size - 2)
        tau = np.clip((x - i) * h, 0.0, h)
        ell = self.ell
        a = -np.expm1(-ell * tau) / ell
        b = tau / ell - a / ell
        f0, f1 = self.forcing[i], self.forcing[i + 1]
        return np.exp(-ell * tau) * self.values[i] + f0 * a + (f1 - f0) * b / h


def ou_y(path, ell):
    """White-noise OU process ``dy = -ell y dt + d omega`` by the exact-decay recursion.

    ``y_{i+1} = exp(-ell h) y_i + (omega_{i+1} - omega_i)`` from ``y(t_min) = 0``.
    """
    key = ("y", float(ell))
    if key in path._cache:
        return path._cache[key]
    if not ell > 0:
        raise ValueError("ell must be positive")
    decay = np.exp(-ell * path.h)
    dw = np.diff(path.samples)
    y = np.empty(path.n)
    y[0] = 0.0
    _linear_recursion(y, decay, dw)
    times = path.times
    times.setflags(write=False)
    y.setflags(write=False)
    out = OUProcess(float(ell), times, y)
    path._cache[key] = out
    return out


def ou_z(path, delta, ell):
    """Colored OU process ``dz/dt = -ell z + Z_delta`` from ``z(t_min) = 0``.

    Uses the exponential integrator that is exact for forcing linear on each
    grid interval, which ``Z_delta`` is.
    """
    key = ("z", float(delta), float(ell))
    if key in path._cache:
        return path._cache[key]
    if not ell > 0:
        raise ValueError("ell must be positive")
    zn = colored_noise(path, delta)
    out = ou_forced(zn.times, zn.values, ell)
    out = OUProcess(float(ell), out.times, out.values, float(delta), zn.values)
    path._cache[key] = out
    return out


def ou_forced(times, forcing, ell):
    """Solve ``z' = -ell z + F`` from 0 with ``F`` piecewise linear on ``times``."""
    h = times[1] - times[0]
    e = np.exp(-ell * h)
    a = -np.expm1(-ell * h) / ell
    b = h / ell - a / ell
    f = np.asarray(forcing, dtype=float)
    inc = f[:-1] * (a - b / h) + f[1:] * (b / h)
    z = np.empty(f.size)
    z[0] = 0.0
    _linear_recursion(z, e, inc)
    times = np.array(times)
    times.setflags(write=False)
    z.setflags(write=False)
    return OUProcess(float(ell), times, z, forcing=f)


def _linear_recursion(x, decay, inc):
    # x[i+1] = decay * x[i] + inc[i], done as a scaled cumulative sum in blocks
    # to keep decay**-i away from overflow
    n = inc.size
    block = max(1, int(200.0 / max(-np.log(decay), 1e-300)))
    block = min(block, n) if n else 1
    start = 0
    while start < n:
        stop = min(n, start + block)
        k = np.arange(1, stop - start + 1)
        p = decay ** k
        x[start + 1 : stop + 1] = p * (x[start] + np.cumsum(inc[start:stop] / p))
        start = stop


@dataclass(frozen=True)
class NoiseParams:
    """Settings for :func:`noise_diagnostics`."""

    delta_list: tuple = (0.2, 0.1, 0.05)
    ell: float = 1.0
    s: float = 0.0
    T: float = 5.0


def noise_diagnostics(path, params):
    """One row per ``delta``: WZ error, colored-vs-white OU gap, ergodic mean, growth ratio.

    Returns a list of dicts with keys ``delta, sup_wz_error, sup_zy_error,
    ergodic_mean, growth_ratio``.  Sups run over the nodes of ``[s, s + T]``.
    """
    t = np.asarray(path.times)
    lo, hi = params.s, params.s + params.T
    y = ou_y(path, params.ell)
    rows = []
    for delta in params.delta_list:
        zn = colored_noise(path, delta)
        if hi > zn.times[-1] + _SNAP * path.h or lo < path.t_min:
            raise ValueError("diagnostic window exceeds the path window")
        sel = (t >= lo - _SNAP * path.h) & (t <= hi + _SNAP * path.h)
        idx = np.nonzero(sel)[0]
        wz = np.max(np.abs(zn.integral[idx] - path.samples[idx]))
        z = ou_z(path, delta, params.ell)
        zy = np.max(np.abs(z.values[idx] - y.values[idx]))
        t_end = hi if hi != 0 else lo
        ergodic = abs(float(zn.integrated(t_end)) / t_end) if t_end != 0 else float("nan")
        growth = np.max(np.abs(zn.values[idx]) / (1.0 + np.abs(t[idx])))
        rows.append(
            {
                "delta": float(delta),
                "sup_wz_error": float(wz),
                "sup_zy_error": float(zy),
                "ergodic_mean": float(ergodic),
                "growth_ratio": float(growth),
            }
        )
    return rows
