# %% [markdown]
# # Local regularity and self-stabilization
#
# Freeze the prefix up to `t`, then draw many independent futures. Right
# after `t` the path should look like a stable motion with index
# `alpha(Z(t))`: increments scale like `h**(1/alpha(Z(t)))`. These runs use
# small sizes; the acceptance suite runs them at full scale.

# %%
from selfstab import AlphaFunction, ProcessConfig, check_holder, check_local_form

alpha = AlphaFunction.tanh(1.2, 0.4)
cfg = ProcessConfig(0, 1, 0, 2.0**12, rng_seed=0)
rep = check_holder(0.5, cfg, alpha, replicas=2000, h_grid=[2.0**-k for k in range(3, 9)])
print(f"alpha(Z(t)) = {rep.stat('alpha(Z(t))'):.3f}, target slope 2/alpha = {2 / rep.stat('alpha(Z(t))'):.3f}")
print(f"median slope {rep.stat('slope'):.3f}, mean-statistic slope {rep.stat('slope_mean_statistic'):.3f}")

# %% [markdown]
# Scaled increments against an independent stable sampler, and the
# distance to the fixed-index companion built from the same points.

# %%
rep = check_local_form(0.5, cfg, alpha, replicas=2000, r_grid=(1e-2, 1e-3), window_points=5000)
for v in rep.verdicts:
    print(f"  {'ok  ' if v['passed'] else 'FAIL'} {v['criterion']}: {v['value']:.3g} vs {v['threshold']:.3g}")
