# %% [markdown]
# # Constants and bounds
#
# The normalising constant makes the point-sum stable motion standard:
# `C_alpha = I(alpha)**(-1/alpha)` with `I(alpha) = int_0^inf u^-alpha sin u du`.

# %%
import numpy as np

from selfstab import (
    AlphaFunction,
    cauchy_bound,
    rate_bound,
    sample_half_plane,
    stable_integral,
    stable_norm_constant,
    tail_sum_expectation,
)

for a in (0.5, 1.0, 1.5, 1.9):
    print(f"alpha={a}: I = {stable_integral(a):.10f} (quadrature {stable_integral(a, 'quadrature'):.10f}),"
          f" C = {stable_norm_constant(a):.10f}")

# %% [markdown]
# The rate bound controls `E sup |Z_n - Z|^2` once small `y` are cut off at
# `y0`. It decays like `n**(-(2-b)/b)` but carries a large constant.

# %%
alpha = AlphaFunction.tanh(1.0, 0.2)
for n in (4, 16, 64, 256, 1024):
    rep = rate_bound(0, 1, alpha.a, alpha.b, alpha.M, 0.5, n)
    print(f"n={n:5d}  bound={rep.value:10.4f}")
print(rep.to_json())

# %% [markdown]
# For a fixed point set the Cauchy bound is a plain point sum, and the
# expected tail sum above `n` has a closed form.

# %%
alpha = AlphaFunction.tanh(1.2, 0.4)
ps = sample_half_plane(0, 1, 0, 8, seed=3)
for n, m in [(1, 2), (2, 4), (4, 8)]:
    rep = cauchy_bound(ps, alpha, n, m)
    print(f"(n,m)=({n},{m})  bound={rep.value:.4f}  product={rep.details['product']:.3g}")
print("E tail sum above n=4 with b=1.2:", tail_sum_expectation(0, 1, 2.0, 1.2, 4))
