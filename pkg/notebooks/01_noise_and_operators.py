# %% [markdown]
# # Colored noise, OU processes and the spectral operators
#
# A quick tour of the building blocks.  Everything runs in a few seconds.

# %%
import numpy as np

from wzcbf.noise import NoiseParams, WienerPath, colored_noise, noise_diagnostics, ou_y, ou_z
from wzcbf.spectral import (
    TorusGrid,
    bilinear_B,
    inner,
    leray_project,
    nonlinear_C,
    norms,
    random_field,
    trilinear_b,
)

# %% [markdown]
# ## Wiener path and its difference quotient
#
# The path lives on a fixed grid of step `h` and is pinned to 0 at t = 0.
# `colored_noise` gives `Z_delta(t) = (w(t + delta) - w(t)) / delta` and its running integral.

# %%
path = WienerPath.sample(seed=0, t_min=-30.0, t_max=6.0, h=1e-3)
for delta in (0.2, 0.1, 0.05):
    zn = colored_noise(path, delta)
    t = np.arange(0.0, 5.0, 1e-3)
    gap = np.max(np.abs(np.array([zn.integrated(s) for s in t[::50]]) - path(t[::50])))
    print(f"delta={delta:<5} sup |int Z - w| ~ {gap:.4f}")

# %% [markdown]
# The same numbers, with the OU comparison and ergodic means, come from `noise_diagnostics`.

# %%
for row in noise_diagnostics(path, NoiseParams()):
    print({k: round(v, 5) for k, v in row.items()})

# %% [markdown]
# ## OU processes
#
# `y` is driven by the increments of the path, `z_delta` by the colored noise.
# They agree more closely as delta shrinks.

# %%
y = ou_y(path, 1.0)
t = np.linspace(0.0, 5.0, 501)
for delta in (0.2, 0.05):
    z = ou_z(path, delta, 1.0)
    print(delta, np.max(np.abs(z.evaluate(t) - y.evaluate(t))))

# %% [markdown]
# ## Operators on the torus
#
# Fields are stored as half-spectrum coefficients.  The truncation keeps
# `|m| <= (n - 1) // 3`, so the triple product vanishes to rounding.

# %%
grid = TorusGrid(32)
rng = np.random.default_rng(1)
u, v, w = (random_field(grid, rng, a) for a in (1.0, 2.0, 0.5))
print("b(u, v, v)        ", trilinear_b(u, v, v))
print("b(u,v,w)+b(u,w,v) ", trilinear_b(u, v, w) + trilinear_b(u, w, v))
print("(B(u, v), w) - b  ", inner(bilinear_B(u, v), w) - trilinear_b(u, v, w))
print("P P u - P u       ", np.max(np.abs(leray_project(leray_project(u)).coeffs - leray_project(u).coeffs)))

# %%
r = 3.0
print("(C(u), u) =", inner(nonlinear_C(u, r), u), " ||u||_{L^4}^4 =", norms(u, r)["lr"])
