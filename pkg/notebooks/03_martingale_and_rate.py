# %% [markdown]
# # Sign martingale and convergence rate
#
# Conditionally on the point positions, flipping signs makes
# `Z_m - Z_n` a martingale difference. On a small set every sign vector
# can be enumerated, which gives exact moments to compare with Monte Carlo.

# %%
from selfstab import (
    AlphaFunction,
    ProcessConfig,
    TruncationSchedule,
    check_convergence_rate,
    check_sign_martingale,
    enumerate_sign_moments,
    sample_half_plane,
)

alpha = AlphaFunction.tanh(1.2, 0.4)
ps = sample_half_plane(0, 1, 0, 4, seed=1)
exact = enumerate_sign_moments(ps, alpha, 0.0, 1, 4)
print(f"{len(ps)} points: exact mean {exact['mean']:.2e}, exact E sup^2 {exact['sup_sq']:.4f}")
rep = check_sign_martingale(ps, alpha, 0.0, 1, 4, resamples=5000, seed=1)
for v in rep.verdicts:
    print(f"  {'ok  ' if v['passed'] else 'FAIL'} {v['criterion']}: {v['value']:.4g} vs {v['threshold']:.4g}")

# %% [markdown]
# Along a truncation schedule `e(n) = E sup |Z_n - Z_N|^2` should fall at
# least as fast as the rate bound predicts.

# %%
alpha = AlphaFunction.tanh(1.0, 0.2)
cfg = ProcessConfig(0, 1, 0, 1024, y0=0.5, rng_seed=11)
rep = check_convergence_rate(cfg, alpha, TruncationSchedule((4, 16, 64, 256, 1024)), replicas=200)
for s in rep.statistics:
    print(f"  {s['label']:>20} = {s['value']:.4g}")
print("passed:", rep.passed)
