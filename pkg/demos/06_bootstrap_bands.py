# %% [markdown]
# # Uniform bands and a test of monotonicity
#
# Pairs bootstrap of the instrumental quantile estimator, then a studentised
# sup-t band. Rearranging every bootstrap curve gives a band for the sorted
# estimate. Intersecting it with the set of nondecreasing functions can only
# narrow it.

# %%
from rearrangement import DgpParams, bootstrap, gen_sample, ivqr_fit, make_grid
from rearrangement.inference import monotone_intersect, monotonicity_test, uniform_band

taus = make_grid(99)
sample = gen_sample(DgpParams(), 11_627, seed=3)
ens = bootstrap(sample, lambda s: ivqr_fit(s, taus).curves(), b=200, seed=11)

band = uniform_band(ens[1], level=0.9)
rband = monotone_intersect(uniform_band(ens[1].rearranged(), level=0.9))
print("critical value", round(band.critical_value, 3))
print("mean width original", band.width.mean().round(1), "rearranged", rband.width.mean().round(1))

# %% [markdown]
# If the sorted point estimate leaves the band of the original estimator,
# the hypothesis of a monotone population curve is rejected. Under a
# monotone truth this rarely happens.

# %%
print(monotonicity_test(ens, level=0.9))
