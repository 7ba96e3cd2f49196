# %% [markdown]
# # Sorting a curve into a monotone one
#
# A fitted quantile curve sampled on a net of probability indices may go
# down somewhere. Rearranging it means sorting the sampled values. The
# result is nondecreasing and takes the same values with the same
# frequencies.

# %%
import numpy as np

from rearrangement import GridCurve, make_grid, pre_cdf, rearrange, rearrange_via_cdf

u = make_grid(9)
q = GridCurve(u, [0.2, 0.5, 0.4, 0.9, 0.7, 1.1, 1.0, 1.6, 1.5])
print("original  ", q.values)
print("rearranged", rearrange(q).values)

# %% [markdown]
# The same answer comes out of a second route: tabulate the distribution of
# the sampled values, then invert it from the left.

# %%
F = pre_cdf(q)
print(np.column_stack([F.y_grid, F.probs]))
print(np.array_equal(rearrange_via_cdf(q).values, rearrange(q).values))

# %% [markdown]
# Sorting commutes with increasing affine maps, and sorting twice changes
# nothing.

# %%
a, b = -3.0, 2.5
lhs = rearrange(q.with_values(a + b * q.values)).values
print(np.max(np.abs(lhs - (a + b * rearrange(q).values))))
r = rearrange(q)
print(np.array_equal(rearrange(r).values, r.values))

# %% [markdown]
# Curves on other intervals are mapped affinely onto the unit interval,
# sorted there and mapped back.

# %%
from rearrangement.rearrange import rearrange_on_domain

x = np.linspace(20.0, 60.0, 9)
x_back, sorted_vals = rearrange_on_domain(x, np.cos(x / 7))
print(np.column_stack([x_back, sorted_vals]))
