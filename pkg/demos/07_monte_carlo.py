# %% [markdown]
# # Monte Carlo comparison
#
# Repeat the estimation on fresh samples and compare the errors of the
# original, rearranged and isotonized curves. Ratios are in percent of the
# original error, so values below 100 mean improvement. Each replication
# uses its own child seed, which makes the table reproducible.

# %%
from rearrangement.experiment import coverage_experiment, error_ratio_experiment

res = error_ratio_experiment(n=2000, reps=200, seed=0)
print(f"{res.reps} reps in {res.seconds:.1f}s, failures {res.n_failed}, "
      f"contraction violations {res.contraction_violations()}")
for row in res.table():
    print({k: (round(v, 1) if isinstance(v, float) else v) for k, v in row.items()})

# %% [markdown]
# Coverage of the 90% band takes a few minutes at full size. A short run
# shows the mechanics.

# %%
cov = coverage_experiment(n=2000, runs=20, b=200, seed=1)
print("coverage treated cell", cov.coverage("original", 1), "rearranged", cov.coverage("rearranged", 1))
print("rejection rate", cov.rejection_rate())
