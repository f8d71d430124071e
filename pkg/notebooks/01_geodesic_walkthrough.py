# %% [markdown]
# # Solving for an eps-geodesic
#
# Two one-mode potentials on a 16 x 16 torus grid, joined by the regularised
# Monge-Ampere continuation.  We look at the continuation stages, the length,
# and how far the path sits below the straight line.

# %%
import math

import numpy as np

from kahler_torus import SolverConfig, distance, mode_field
from kahler_torus.geometry import PathGrid, path_length

A0 = 0.05 / math.pi**2
N = 16
phi0 = mode_field([(1, 0, 0.4 * A0, 0.0)], N)
phi1 = mode_field([(0, 1, 0.3 * A0, 0.5), (1, 1, 0.2 * A0, 0.0)], N) + 0.3

# %%
cfg = SolverConfig(M=8, eps_target=1e-4)
rep = distance(phi0, phi1, cfg)
print(rep.solve.to_text())
print(rep.to_text())

# %% [markdown]
# The straight line is a competitor with the same ends, so it can only be longer
# (up to the eps and grid slack).  The geodesic bends below it.

# %%
line = PathGrid.linear(phi0, phi1, cfg.M)
print("straight line length", path_length(line))
print("geodesic length     ", rep.length)
print("max dip below line  ", float((line.slices - rep.path.slices).max()))

# %% [markdown]
# Refining the regularisation: the length settles as eps goes to zero.

# %%
for eps in (1e-1, 1e-2, 1e-3, 1e-4):
    r = distance(phi0, phi1, SolverConfig(M=8, eps_target=eps))
    print(f"eps {eps:.0e}  length {r.length:.12f}  effective eps {r.effective_eps:.3e}")
