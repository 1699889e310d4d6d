# %% [markdown]
# # Pullback endpoints and the absorbing radius
#
# A scaled-down version of the absorption experiment on a 32 x 32 grid,
# followed by the Hausdorff comparison of Wong-Zakai and white-noise endpoints.

# %%
import numpy as np

from wzcbf.attractor import (
    PullbackProblem,
    PullbackSchedule,
    absorbing_radius_multiplicative,
    hausdorff_semidist,
    pullback_run,
)
from wzcbf.dynamics import CBFParams, Forcing
from wzcbf.noise import WienerPath
from wzcbf.spectral import TorusGrid, norm_H, random_field

grid = TorusGrid(32)
params = CBFParams(mu=0.5, alpha=1.0, beta=0.5, r=3.0)
forcing = Forcing(random_field(grid, np.random.default_rng(5), 1.0))
path = WienerPath.sample(seed=0, t_min=-40.0, t_max=1.0, h=2.5e-3)

# %% [markdown]
# ## Radius of the absorbing ball
#
# For linear multiplicative noise the squared radius is a weighted integral
# of the forcing over the past, with weight `exp(alpha xi - 2 a(xi))`.

# %%
for mode, delta in (("white", None), ("wz", 0.1), ("wz", 0.05)):
    rad = absorbing_radius_multiplicative(path, mode, params, forcing, delta=delta, window=30.0)
    print(f"{mode:<5} delta={delta}  R^2={rad.value:.4f}  tail~{rad.tail_estimate:.1e}")

# %% [markdown]
# ## Pullback endpoints
#
# Start at `s - t` from several initial data and look at the state at `s = 0`.
# Larger initial data are forgotten at rate about `exp(-alpha t)`.

# %%
problem = PullbackProblem("multiplicative", grid, params, forcing, delta=0.05)
schedule = PullbackSchedule(t_list=(1.0, 2.0, 4.0), n_ics=4, ic_max=10.0)
ens = pullback_run(problem, path, schedule, dt=5e-3)
ens.radius = absorbing_radius_multiplicative(path, "wz", params, forcing, delta=0.05, window=30.0).value
for row in ens.rows():
    print(row["depth"], row["ic"], round(row["ic_norm"], 2), round(row["norm2"], 4), row["inside"])

# %% [markdown]
# ## Distance to the white-noise endpoints

# %%
white = pullback_run(problem.with_delta(None), path, schedule, dt=5e-3)
deep = schedule.t_list[-1]
print("dist_H =", hausdorff_semidist(ens.at_depth(deep), white.at_depth(deep)))
print("spread of endpoints:", max(norm_H(a - b) for a in ens.at_depth(deep) for b in ens.at_depth(deep)))
