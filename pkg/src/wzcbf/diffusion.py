"""Nonlinear diffusion terms ``S(t, x, u)`` and empirical checks of their structure.

Most variants have the form ``S = exp(sigma t) [kappa u + Sc(u) + h(x)]`` and
differ only in the nonlinear part ``Sc``:

    zero          S = 0
    constant_g    S = exp(sigma t) h, with h the profile g by default
    linear_u      S = exp(sigma t) kappa u
    ndt1_example  Sc(u) = sin(u) componentwise + B(g1, u)
    ndt2_example  Sc(u) = B(g2, u), so (Sc(u), u) = 0
    ndt3_example  S = S1(t, x) |u|^{q-1} d + S2(t, x) d with a fixed unit vector d

The field returned by :func:`eval_S` is truncated to the kept modes and
Leray-projected, since only ``P S`` enters the velocity equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    TorusGrid,
    VelocityField,
    _grad_phys,
    _project,
    dual_norm2,
    inner,
    norm_grad,
    norm_H,
    random_field,
    taylor_green,
    to_physical,
    to_spectral,
)

__all__ = ["DiffusionTerm", "eval_S", "pointwise_S", "validate", "fit_growth", "VARIANTS", "ConditionResult"]

VARIANTS = ("zero", "constant_g", "linear_u", "ndt1_example", "ndt2_example", "ndt3_example")


def _shear_profile(grid):
    """Smooth divergence-free profile used as g1/g2 by default."""
    x, y = grid.coords
    a = 2.0 * np.pi / grid.L
    u = VelocityField.from_physical(grid, np.stack((np.sin(a * y), 0.5 * np.cos(2 * a * x))))
    return u * (1.0 / norm_H(u))


@dataclass
class DiffusionTerm:
    """Diffusion term ``S(t, x, u)`` on a fixed grid.

    Arguments
    ---------
    variant : str
        One of :data:`VARIANTS`.
    grid : TorusGrid
    kappa, sigma : float
        Linear coefficient and exponential time envelope rate.
    h : VelocityField or None
        Additive offset; zero if None (``constant_g`` uses the Taylor-Green profile).
    g : VelocityField or None
        Advecting profile g1 or g2 for the ``ndt1``/``ndt2`` examples.
    q, s1, s2 : float
        Growth exponent and amplitudes of the ``ndt3`` example, ``1 <= q < r + 1``.

    """

    variant: str
    grid: TorusGrid
    kappa: float = 0.0
    sigma: float = 0.0
    h: VelocityField | None = None
    g: VelocityField | None = None
    q: float = 2.0
    s1: float = 0.5
    s2: float = 0.2
    direction: tuple = (0.6, 0.8)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown diffusion variant {self.variant!r}")
        if self.variant == "constant_g" and self.h is None:
            self.h = taylor_green(self.grid)
        if self.variant in ("ndt1_example", "ndt2_example") and self.g is None:
            self.g = _shear_profile(self.grid)
        if self.variant == "ndt3_example":
            if self.q < 1:
                raise ValueError("q must be at least 1")
            d = np.asarray(self.direction, dtype=float)
            self.direction = tuple(d / np.linalg.norm(d))
        for f in (self.h, self.g):
            if f is not None and f.grid != self.grid:
                raise ValueError("profiles must live on the term's grid")

    # pieces -----------------------------------------------------------

    @property
    def has_kappa(self):
        return self.variant in ("linear_u", "ndt1_example", "ndt2_example") and self.kappa != 0

    @property
    def h_norm(self):
        """``||h||_H`` of the offset actually used."""
        return 0.0 if self.h is None or self.variant in ("zero", "linear_u", "ndt3_example") else norm_H(self.h)

    def envelope(self, t):
        return np.exp(self.sigma * t)

    def _weights(self):
        if "w" not in self._cache:
            x, y = self.grid.coords
            a = 2.0 * np.pi / self.grid.L
            self._cache["w"] = (
                self.s1 * (1.0 + 0.5 * np.cos(a * x) * np.cos(a * y)),
                self.s2 * (1.0 + 0.5 * np.sin(a * x)),
            )
        return self._cache["w"]

    def _g_phys(self):
        if "g" not in self._cache:
            self._cache["g"] = to_physical(self.grid, self.g.coeffs)
        return self._cache["g"]

    def nonlinear_phys(self, uc, up=None, gu=None):
        """Grid values of ``Sc(u)`` before truncation (time envelope excluded), or None.

        For ``ndt3`` this is the whole term.
        """
        grid = self.grid
        v = self.variant
        if v in ("zero", "constant_g", "linear_u"):
            return None
        if up is None:
            up = to_physical(grid, uc)
        if v == "ndt3_example":
            w1, w2 = self._weights()
            mag = np.sqrt(np.sum(up**2, axis=0))
            amp = w1 * mag ** (self.q - 1.0) + w2
            return amp[None] * np.asarray(self.direction)[:, None, None]
        if gu is None:
            gu = _grad_phys(grid, uc)
        out = np.einsum("ixy,ijxy->jxy", self._g_phys(), gu)
        if v == "ndt1_example":
            out += np.sin(up)
        return out

    def linear_hat(self, uc):
        """Coefficients of ``kappa u + h`` (time envelope excluded), or None."""
        out = None
        if self.has_kappa:
            out = self.kappa * uc
        if self.h is not None and self.variant in ("constant_g", "ndt1_example", "ndt2_example"):
            out = self.h.coeffs if out is None else out + self.h.coeffs
        return out

    def nonlinear_hat(self, uc, up=None, gu=None):
        """Coefficients of ``P Sc(u)``."""
        val = self.nonlinear_phys(uc, up, gu)
        if val is None:
            return np.zeros_like(uc)
        return _project(self.grid, self.grid.mask * to_spectral(self.grid, val))

    def hat(self, t, uc, up=None, gu=None):
        """Coefficients of ``P S(t, ., u)``."""
        if self.variant == "zero":
            return np.zeros_like(uc)
        out = self.nonlinear_hat(uc, up, gu)
        lin = self.linear_hat(uc)
        if lin is not None:
            out = out + lin
        return self.envelope(t) * out

    def nonlinear(self, u):
        return VelocityField(self.grid, self.nonlinear_hat(u.coeffs))

    def bound_GS1(self, t, u):
        """Pointwise growth bound ``S1 |u|^{q-1} + S2`` of the ``ndt3`` example."""
        w1, w2 = self._weights()
        mag = np.sqrt(np.sum(u.physical() ** 2, axis=0))
        return self.envelope(t) * (w1 * mag ** (self.q - 1.0) + w2)


def eval_S(term, t, u):
    """Projected diffusion field ``P S(t, ., u)``."""
    return VelocityField(term.grid, term.hat(t, u.coeffs))


def pointwise_S(term, t, u):
    """Grid values of ``S(t, x, u)`` before projection and truncation."""
    grid = term.grid
    e = term.envelope(t)
    v = term.variant
    up = u.physical()
    if v == "zero":
        return np.zeros_like(up)
    if v == "ndt3_example":
        w1, w2 = term._weights()
        mag = np.sqrt(np.sum(up**2, axis=0))
        d = np.asarray(term.direction)[:, None, None]
        return e * (w1 * mag ** (term.q - 1.0) + w2)[None] * d
    out = np.zeros_like(up)
    if term.has_kappa:
        out += term.kappa * up
    if term.h is not None and v in ("constant_g", "ndt1_example", "ndt2_example"):
        out += term.h.physical()
    if v in ("ndt1_example", "ndt2_example"):
        out += np.einsum("ixy,ijxy->jxy", term._g_phys(), _grad_phys(grid, u.coeffs))
    if v == "ndt1_example":
        out += np.sin(up)
    return e * out


# empirical structure checks ------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    constant: float
    samples: int
    passed: bool


def _stable(a, b, rel=0.25, floor=1e-12):
    return bool(max(abs(a), abs(b)) <= floor or abs(a - b) <= rel * max(abs(a), abs(b)))


def _sample_fields(grid, rng, count, lo=-2.0, hi=2.0):
    amps = 10.0 ** rng.uniform(lo, hi, size=count)
    slopes = rng.uniform(1.0, 3.0, size=count)
    return [random_field(grid, rng, a, s) for a, s in zip(amps, slopes)]


def _orth(term, fields):
    return max(abs(inner(term.nonlinear(u), u)) / max(norm_H(u) ** 2 + norm_grad(u) ** 2, 1e-300) for u in fields)


def _lip_H_V(term, pairs):
    out = 0.0
    for u, v in pairs:
        d = u - v
        dv = np.sqrt(norm_H(d) ** 2 + norm_grad(d) ** 2)
        out = max(out, norm_H(term.nonlinear(u) - term.nonlinear(v)) / dv)
    return out


def _weak(term, pairs):
    # sup over w of |(Sc(u) - Sc(v), w)| / ||w||_V is the V' norm of the difference
    out = 0.0
    for u, v in pairs:
        out = max(out, np.sqrt(dual_norm2(term.nonlinear(u) - term.nonlinear(v))) / norm_H(u - v))
    return out


def fit_growth(xs, ys, s5=None):
    """Fit ``y <= s3 + s4 x^{1+s5}`` with ``s5`` in ``[0, 1)``.

    Unless given, ``s5`` comes from the log-log slope of the upper envelope
    over the samples with ``x >= 1``, clipped to ``[0, 0.99]``; ``s4`` is the
    smallest constant covering those samples and ``s3`` the smallest offset
    covering the rest.
    """
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if np.max(ys) <= 1e-12 * max(1.0, float(np.max(xs)) ** 2):
        return 0.0, 0.0, 0.0
    big = xs >= 1.0
    if s5 is not None:
        slope = 1.0 + s5
    elif big.sum() >= 2:
        lx, ly = np.log(xs[big]), np.log(np.maximum(ys[big], 1e-300))
        order = np.argsort(lx)
        # running envelope of ly as a function of lx
        env = np.maximum.accumulate(ly[order])
        slope = np.polyfit(lx[order], env, 1)[0] if np.ptp(lx) > 0 else 1.0
    else:
        slope = 1.0
    s5 = float(np.clip(slope - 1.0, 0.0, 0.99))
    s4 = float(np.max(ys[big] / xs[big] ** (1.0 + s5))) if big.any() else 0.0
    s3 = float(max(0.0, np.max(ys - s4 * xs ** (1.0 + s5))))
    return s3, s4, s5


_RAY_AMPS = np.logspace(-2.0, 2.0, 17)


def _growth(term, fields):
    """Growth constants along rays.

    Each sampled field only fixes a direction, which is scaled through a
    fixed amplitude ladder.  ``s5`` is the largest slope, over rays, of the
    running maximum of ``|(Sc(u), u)|`` across the top decade of ``||u||_V``.
    """
    xs, ys, slopes = [], [], []
    for u in fields:
        d = u * (1.0 / norm_H(u))
        x = np.array([np.sqrt(norm_H(d * a) ** 2 + norm_grad(d * a) ** 2) for a in _RAY_AMPS])
        y = np.array([abs(inner(term.nonlinear(d * a), d * a)) for a in _RAY_AMPS])
        env = np.maximum.accumulate(y)
        if env[-1] > 1e-12 * x[-1] ** 2:
            slopes.append(np.log(env[-1] / env[-5]) / np.log(x[-1] / x[-5]))
        xs.append(x)
        ys.append(y)
    s5 = float(np.clip(max(slopes) - 1.0, 0.0, 0.99)) if slopes else None
    return fit_growth(np.concatenate(xs), np.concatenate(ys), s5)


def _gs1(term, fields, t=0.0):
    worst = -np.inf
    for u in fields:
        mag = np.sqrt(np.sum(pointwise_S(term, t, u) ** 2, axis=0))
        bound = term.bound_GS1(t, u)
        worst = max(worst, float(np.max(mag - bound)))
    return worst


def _local_lip(term, pairs):
    out = 0.0
    for u, v in pairs:
        out = max(out, norm_H(term.nonlinear(u) - term.nonlinear(v)) / norm_H(u - v))
    return out


def validate(term, n_samples=16, seed=0, tol_orth=1e-9):
    """Empirical constants for the structural conditions of ``term``.

    Each constant is computed on ``n_samples`` random fields and again on
    ``2 n_samples``; constants other than the orthogonality and pointwise
    bound checks pass when the two estimates agree within 25%.
    """
    grid = term.grid
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    fields = _sample_fields(grid, rng, 2 * n_samples)
    # pairs at several separations
    pairs = []
    for u in fields:
        eps = 10.0 ** rng.uniform(-3.0, 0.0)
        pairs.append((u, u + random_field(grid, rng, eps * max(norm_H(u), 1e-3))))
    half = slice(0, n_samples)
    out = []
    v = term.variant

    def stable_row(name, fn, data):
        a, b = fn(term, data[half]), fn(term, data)
        out.append(ConditionResult(name, float(b), len(data), bool(_stable(a, b) and np.isfinite(b))))

    if v in ("ndt2_example",):
        c = _orth(term, fields)
        out.append(ConditionResult("S1_orth", float(c), len(fields), bool(c <= tol_orth)))
    if v in ("ndt1_example", "ndt2_example", "zero", "constant_g", "linear_u"):
        stable_row("S2_lip", _lip_H_V, pairs)
        stable_row("S3_weak", _weak, pairs)
        g1, g2 = _growth(term, fields[half]), _growth(term, fields)
        for name, a, b in zip(("S4_s3", "S4_s4", "S4_s5"), g1, g2):
            out.append(ConditionResult(name, b, len(fields), _stable(a, b)))
    if v == "ndt3_example":
        c = _gs1(term, fields)
        out.append(ConditionResult("GS1_bound", float(c), len(fields), bool(c <= 1e-12)))
        bounded = [(u, v_) for u, v_ in pairs if norm_H(u) <= 10.0]
        stable_row("local_lip", _local_lip, bounded)
    return out
