# %% [markdown]
# # Companion processes
#
# Two relatives built from the same points: the multistable motion, whose
# index depends on the jump *time*, and the stable subordinator, which
# ignores signs and only moves up.

# %%
import numpy as np

from selfstab import AlphaFunction, build_multistable, build_subordinator, sample_half_plane
from selfstab.construction import build_local_companion

ps = sample_half_plane(0, 1, 0, 512, seed=4)
ramp = AlphaFunction.custom(lambda x: 0.6 + np.asarray(x), 0.6, 1.6, 1 / 0.6**2, name="ramp")
multi = build_multistable(ps, ramp, 0, 1)
print("multistable: jumps", multi.n_jumps, "early |jump| mean", np.abs(multi.jump_sizes[:50]).mean(),
      "late", np.abs(multi.jump_sizes[-50:]).mean())

# %%
sub = build_subordinator(ps, 0.6, 0, 1)
print("subordinator at t=0.25, 0.5, 0.75:", sub(np.array([0.25, 0.5, 0.75])))

# %%
comp = build_local_companion(ps, 1.3, 0.5, 0.6)
print("companion on (0.5, 0.6): jumps", comp.n_jumps, "value at 0.599:", comp(0.599))
