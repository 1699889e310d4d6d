"""Fourier pseudospectral operators for divergence-free fields on the 2D torus.

Fields are stored as forward-normalized half-spectrum coefficients, so that
``u(x) = sum_k u_k exp(i k.x)`` and the coefficient array has shape
``(2, n, n//2 + 1)``.  Axis 0 of a physical array is x, axis 1 is y.

Quadratic and power nonlinearities are truncated with the 2/3 rule.  The kept
modes satisfy ``|m_j| < n/3`` per component, so a product of three kept fields
is integrated exactly by the grid sum, which makes ``b(u, v, v) = 0`` hold to
rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "TorusGrid",
    "VelocityField",
    "to_physical",
    "to_spectral",
    "inner",
    "norms",
    "norm_H",
    "norm_grad",
    "norm_Lp",
    "dual_norm2",
    "leray_project",
    "stokes_A",
    "bilinear_B",
    "trilinear_b",
    "nonlinear_C",
    "gateaux_C",
    "check_monotonicity_C",
    "check_a215",
    "ladyzhenskaya_ratio",
    "check_b1_bound",
    "random_field",
    "taylor_green",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TorusGrid:
    """Uniform ``n x n`` grid on the periodic box ``[0, L)^2``."""

    n: int
    L: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError("n must be even and at least 8")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def dx(self):
        return self.L / self.n

    @property
    def shape(self):
        return (self.n, self.n // 2 + 1)

    @cached_property
    def mx(self):
        return np.fft.fftfreq(self.n, 1.0 / self.n)[:, None]

    @cached_property
    def my(self):
        return np.fft.rfftfreq(self.n, 1.0 / self.n)[None, :]

    @cached_property
    def kx(self):
        return (2.0 * np.pi / self.L) * self.mx * np.ones(self.shape)

    @cached_property
    def ky(self):
        return (2.0 * np.pi / self.L) * self.my * np.ones(self.shape)

    @cached_property
    def k2(self):
        return self.kx**2 + self.ky**2

    @cached_property
    def kcut(self):
        """Largest kept integer wavenumber per component."""
        return (self.n - 1) // 3

    @cached_property
    def kmax(self):
        """Largest kept physical wavenumber per component."""
        return 2.0 * np.pi / self.L * self.kcut

    @cached_property
    def mask(self):
        return ((np.abs(self.mx) <= self.kcut) & (np.abs(self.my) <= self.kcut)).astype(float)

    @cached_property
    def weights(self):
        """Multiplicity of each stored half-spectrum mode in the full spectrum."""
        w = np.full(self.shape, 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w

    @cached_property
    def inv_k2(self):
        k2 = self.k2.copy()
        k2[0, 0] = 1.0
        out = 1.0 / k2
        out[0, 0] = 0.0
        return out

    @cached_property
    def coords(self):
        x = np.arange(self.n) * self.dx
        return np.meshgrid(x, x, indexing="ij")

    def zeros(self):
        return VelocityField(self, np.zeros((2,) + self.shape, dtype=complex))


def to_physical(grid, coeffs):
    """Inverse transform over the last two axes."""
    return sfft.irfft2(coeffs, s=(grid.n, grid.n), axes=(-2, -1), norm="forward")


def to_spectral(grid, values):
    """Forward transform over the last two axes."""
    return sfft.rfft2(values, axes=(-2, -1), norm="forward")


class VelocityField:
    """Two-component field held by its Fourier coefficients."""

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (2,) + grid.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {grid}")
        self.grid = grid
        self.coeffs = coeffs

    @classmethod
    def from_physical(cls, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (2, grid.n, grid.n):
            raise ValueError("physical values must have shape (2, n, n)")
        return cls(grid, to_spectral(grid, values))

    def physical(self):
        return to_physical(self.grid, self.coeffs)

    def copy(self):
        return VelocityField(self.grid, self.coeffs.copy())

    def _other(self, other):
        if isinstance(other, VelocityField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.coeffs
        return NotImplemented

    def __add__(self, other):
        c = self._other(other)
        return NotImplemented if c is NotImplemented else VelocityField(self.grid, self.coeffs + c)

    def __sub__(self, other):
        c = self._other(other)
        return NotImplemented if c is NotImplemented else VelocityField(self.grid, self.coeffs - c)

    def __mul__(self, a):
        if np.ndim(a) != 0:
            return NotImplemented
        return VelocityField(self.grid, self.coeffs * a)

    __rmul__ = __mul__

    def __truediv__(self, a):
        return VelocityField(self.grid, self.coeffs / a)

    def __neg__(self):
        return VelocityField(self.grid, -self.coeffs)

    def __repr__(self):
        return f"VelocityField(n={self.grid.n}, L={self.grid.L:g}, |u|_H={norm_H(self):.6g})"


# spectral kernels on raw coefficient arrays ---------------------------


def _inner(grid, a, b):
    return grid.L**2 * float(np.sum(grid.weights * (a.conj() * b).real))


def _project(grid, c):
    div = grid.kx * c[0] + grid.ky * c[1]
    div = div * grid.inv_k2
    return np.stack((c[0] - grid.kx * div, c[1] - grid.ky * div))


def _grad_phys(grid, c):
    """Physical values of ``d_i u_j`` as an array indexed ``[i, j]``."""
    ik = np.stack((1j * grid.kx, 1j * grid.ky))
    return to_physical(grid, ik[:, None] * c[None, :])


def _advect_hat(grid, u_phys, grad_v):
    """Truncated, projected coefficients of ``(u . grad) v``."""
    adv = np.einsum("ixy,ijxy->jxy", u_phys, grad_v)
    return _project(grid, grid.mask * to_spectral(grid, adv))


def _power_phys(u_phys, r):
    mag = np.sqrt(np.sum(u_phys**2, axis=0))
    return mag ** (r - 1.0) * u_phys if r != 1 else u_phys.copy()


def _lr_integral(grid, u_phys, p):
    mag = np.sqrt(np.sum(u_phys**2, axis=0))
    return grid.dx**2 * float(np.sum(mag**p))


# public operators -----------------------------------------------------


def _coeffs(u):
    return u.coeffs if isinstance(u, VelocityField) else np.asarray(u)


def inner(u, v):
    """``(u, v)`` in L^2 by Parseval."""
    return _inner(u.grid, u.coeffs, v.coeffs)


def norm_H(u):
    return np.sqrt(max(inner(u, u), 0.0))


def norm_grad(u):
    g = u.grid
    return np.sqrt(g.L**2 * float(np.sum(g.weights * g.k2 * np.abs(u.coeffs) ** 2)))


def norm_Lp(u, p):
    """``||u||_{L^p}`` by grid quadrature of the pointwise Euclidean magnitude."""
    return _lr_integral(u.grid, u.physical(), p) ** (1.0 / p)


def dual_norm2(u):
    """Squared ``V'`` norm ``L^2 sum |u_k|^2 / (1 + |k|^2)``, dual to ``||u||^2 + ||grad u||^2``."""
    g = u.grid
    return g.L**2 * float(np.sum(g.weights * np.abs(u.coeffs) ** 2 / (1.0 + g.k2)))


def norms(u, r=None):
    """Dict of ``H``, ``grad``, ``V`` norms and, if ``r`` is given, ``L^{r+1}``.

    ``lr`` holds the integral ``||u||_{L^{r+1}}^{r+1}`` itself.
    """
    h2 = inner(u, u)
    g2 = norm_grad(u) ** 2
    out = {"H": np.sqrt(h2), "grad": np.sqrt(g2), "V": np.sqrt(h2 + g2)}
    if r is not None:
        lr = _lr_integral(u.grid, u.physical(), r + 1.0)
        out["lr"] = lr
        out["Lr"] = lr ** (1.0 / (r + 1.0))
    return out


def leray_project(u):
    """Helmholtz-Leray projection ``(I - k k^T/|k|^2) u_k``; the mean mode is kept."""
    return VelocityField(u.grid, _project(u.grid, u.coeffs))


def stokes_A(u):
    """Stokes operator, ``|k|^2 u_k``."""
    return VelocityField(u.grid, u.grid.k2 * u.coeffs)


def bilinear_B(u, v=None):
    """``P[(u . grad) v]`` with 2/3-rule truncation; ``B(u) = B(u, u)``."""
    g = u.grid
    uc = g.mask * u.coeffs
    vc = uc if v is None else g.mask * v.coeffs
    return VelocityField(g, _advect_hat(g, to_physical(g, uc), _grad_phys(g, vc)))


def trilinear_b(u, v, w):
    """``b(u, v, w) = int u_i (d_i v_j) w_j dx`` by grid quadrature."""
    g = u.grid
    up, wp = to_physical(g, u.coeffs), to_physical(g, w.coeffs)
    gv = _grad_phys(g, v.coeffs)
    return g.dx**2 * float(np.einsum("ixy,ijxy,jxy->", up, gv, wp))


def nonlinear_C(u, r):
    """``P(|u|^{r-1} u)`` evaluated on the grid and truncated."""
    if r < 1:
        raise ValueError("r must be at least 1")
    g = u.grid
    return VelocityField(g, _project(g, g.mask * to_spectral(g, _power_phys(u.physical(), r))))


def gateaux_C(u, w, r):
    """Directional derivative of ``C`` at ``u`` along ``w``.

    ``P(|u|^{r-1} w) + (r-1) P(u |u|^{r-3} (u . w))``.  The second term is set
    to zero where ``u`` vanishes, its limit for ``r > 1`` along any direction
    of ``|u|^{r-1}``; ``r = 1`` gives ``P w``.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    g = u.grid
    if r == 1:
        return VelocityField(g, _project(g, g.mask * w.coeffs))
    up, wp = u.physical(), w.physical()
    mag = np.sqrt(np.sum(up**2, axis=0))
    unit = up / np.maximum(mag, _EPS)
    unit[:, mag == 0] = 0.0
    dot = np.sum(unit * wp, axis=0)
    val = mag ** (r - 1.0) * (wp + (r - 1.0) * dot * unit)
    return VelocityField(g, _project(g, g.mask * to_spectral(g, val)))


def check_monotonicity_C(u1, u2, r):
    """Both sides of the monotonicity bound for ``C``.

    Returns ``(lhs, rhs)`` with ``lhs = <|u1|^{r-1}u1 - |u2|^{r-1}u2, u1 - u2>``
    and ``rhs = 1/2 || |u1|^{(r-1)/2}(u1-u2) ||^2 + 1/2 || |u2|^{(r-1)/2}(u1-u2) ||^2``,
    both by grid quadrature before projection.
    """
    g = u1.grid
    a, b = u1.physical(), u2.physical()
    d = a - b
    lhs = g.dx**2 * float(np.sum((_power_phys(a, r) - _power_phys(b, r)) * d))
    ma = np.sqrt(np.sum(a**2, axis=0))
    mb = np.sqrt(np.sum(b**2, axis=0))
    dd = np.sum(d**2, axis=0)
    rhs = 0.5 * g.dx**2 * float(np.sum((ma ** (r - 1.0) + mb ** (r - 1.0)) * dd))
    return lhs, rhs


def check_a215(u, v, r):
    """Both sides of ``||u-v||_{L^{r+1}}^{r+1} <= c (|| |u|^{(r-1)/2}(u-v) ||^2 + || |v|^{(r-1)/2}(u-v) ||^2)``.

    ``c = 2^{r-2}`` for ``r >= 2`` and ``c = 1`` for ``1 <= r <= 2``.
    Returns ``(lhs, rhs)`` with the constant folded into ``rhs``.
    """
    g = u.grid
    a, b = u.physical(), v.physical()
    d = a - b
    dd = np.sum(d**2, axis=0)
    lhs = g.dx**2 * float(np.sum(dd ** ((r + 1.0) / 2.0)))
    ma = np.sqrt(np.sum(a**2, axis=0))
    mb = np.sqrt(np.sum(b**2, axis=0))
    c = 2.0 ** (r - 2.0) if r >= 2 else 1.0
    rhs = c * g.dx**2 * float(np.sum((ma ** (r - 1.0) + mb ** (r - 1.0)) * dd))
    return lhs, rhs


def ladyzhenskaya_ratio(u):
    """``||u||_{L^4}^4 / (||u||^2 ||grad u||^2)``."""
    num = _lr_integral(u.grid, u.physical(), 4.0)
    return num / (inner(u, u) * norm_grad(u) ** 2)


def check_b1_bound(u, v, w):
    """Empirical constant in ``|b(u,v,w)| <= C ||u||^{1/2}||grad u||^{1/2} ||grad v|| ||w||^{1/2}||grad w||^{1/2}``."""
    rhs = np.sqrt(norm_H(u) * norm_grad(u)) * norm_grad(v) * np.sqrt(norm_H(w) * norm_grad(w))
    return abs(trilinear_b(u, v, w)) / rhs


# sample fields --------------------------------------------------------


def random_field(grid, rng, amplitude=1.0, slope=2.0, mean_zero=True):
    """Random divergence-free field with ``||u||_H = amplitude``.

    White noise on the grid is filtered by ``(1 + |k|^2)^{-slope/2}``,
    truncated to the kept modes and projected.
    """
    white = rng.standard_normal((2, grid.n, grid.n))
    c = to_spectral(grid, white) * grid.mask * (1.0 + grid.k2) ** (-slope / 2.0)
    c = _project(grid, c)
    if mean_zero:
        c[:, 0, 0] = 0.0
    u = VelocityField(grid, c)
    nrm = norm_H(u)
    return u * (amplitude / nrm) if nrm > 0 else u


def taylor_green(grid, amplitude=1.0):
    """``(sin x cos y, -cos x sin y)`` on the box, scaled to ``||g||_H = amplitude``."""
    x, y = grid.coords
    a = 2.0 * np.pi / grid.L
    g = VelocityField.from_physical(
        grid, np.stack((np.sin(a * x) * np.cos(a * y), -np.cos(a * x) * np.sin(a * y)))
    )
    return g * (amplitude / norm_H(g))
