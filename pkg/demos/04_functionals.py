# %% [markdown]
# # Smoothing, linear functionals and Lorenz curves
#
# Once a curve is monotone, smooth functionals of it inherit its good
# behaviour. Here we smooth a rearranged curve with a box kernel and compute
# its Lorenz curve.

# %%
import numpy as np

from rearrangement import GridCurve, SmoothingSpec, lorenz_curve, make_grid, rearrange, smooth
from rearrangement.functionals import linear_functional, lower_tail_weight

u = make_grid(99)
rng = np.random.default_rng(0)
q = GridCurve(u, np.exp(u) + rng.normal(0, 0.05, u.size))
q_star = rearrange(q)
print(np.round(smooth(q_star, SmoothingSpec(0.05)).values[:8], 4))

# %% [markdown]
# Partial means are linear functionals with an indicator weight. The Lorenz
# curve is the partial mean divided by the overall mean.

# %%
print(linear_functional(q_star, lower_tail_weight, 0.5) / linear_functional(q_star, lambda s, a: 1.0, None))
L = lorenz_curve(q_star)
print(L.values[49], L.values[-1])

# %% [markdown]
# For the uniform quantile function the Lorenz curve is u^2, up to a net
# error below 2/k.

# %%
ident = GridCurve(u, u)
print(np.max(np.abs(lorenz_curve(ident).values - u**2)), 2 / u.size)
