# %% [markdown]
# # A smooth non-monotone curve and its rearrangement
#
# `Q(u) = 5 (u + sin(2 pi u) / pi)` rises, dips between u = 1/3 and 2/3,
# and rises again. Its rearrangement is the quantile function of Q(U) with
# U uniform. Everything below is computed from the roots of `Q(u) = y`, and
# each closed form is checked against a brute-force integrator.

# %%
import numpy as np

from rearrangement import analytic as an

q = an.sine_curve()
print("critical points", q.critical_points())
print("critical values", q.critical_values())

# %% [markdown]
# Distribution, density and rearranged curve at a few levels and indices.
# The density jumps when y crosses a critical value, because the number of
# roots of `Q(u) = y` changes there.

# %%
for y in [1.0, 1.9, 2.0, 2.5, 3.0, 3.1, 4.0]:
    print(f"y={y:4.1f}  F={an.analytic_cdf(q, y):.6f}  oracle={an.brute_force_cdf(q, y):.6f}  "
          f"f={an.analytic_density(q, y):.4f}  roots={an.find_roots(q, y).K}")

for u in [0.1, 0.5, 0.9]:
    print(f"u={u}  Q*={an.rearranged_value(q, u):.6f}  sparsity={an.sparsity(q, u):.4f}")

# %% [markdown]
# Evaluating at a critical value is refused rather than answered badly.

# %%
try:
    an.analytic_cdf(q, q.critical_values()[0])
except an.CriticalValueError as exc:
    print("refused:", exc)

# %% [markdown]
# ## Directional derivatives
#
# Perturb Q by t h. The change in the distribution at level y, divided by t,
# approaches `-sum h(u_k) / |Q'(u_k)|` over the roots u_k. The
# finite-difference side never calls the root finder.

# %%
h = lambda u: np.sin(3 * u)
for y in [1.0, 2.5, 4.0]:
    exact = an.hadamard_D(q, h, y)
    approx = [an.finite_diff_D(q, h, t, y) for t in (1e-2, 1e-3, 1e-4)]
    print(f"y={y}: exact {exact:.6f}  finite differences {np.round(approx, 6)}")

# %% [markdown]
# For the rearranged curve the derivative is a weighted average of h over
# the roots. When Q is already increasing there is a single root and the
# derivative is h itself.

# %%
print(an.hadamard_Dtilde(q, h, 0.5), an.finite_diff_Dtilde(q, h, 1e-4, 0.5))
lin = an.linear_curve(2.0)
print(an.hadamard_Dtilde(lin, h, 0.3) - h(0.3))

# %% [markdown]
# Uniform statements need to stay away from the flat spots. `regular_region`
# reports where the slope exceeds a chosen threshold.

# %%
print(an.regular_region(q, 0.5))
