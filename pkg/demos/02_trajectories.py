# %% [markdown]
# # Single trajectories
#
# Each run is a pure function of `(spec, t0, horizon, seed)`.  Under constant
# reinforcement the draws keep flipping; under geometric reinforcement one
# colour takes over after a handful of steps.

# %%
from __future__ import annotations

import numpy as np

from tdurn.sequence import SequenceSpec
from tdurn.urn import domination_proxy, monopoly_proxy, simulate, window_count

N = 10_000
for name, spec in (("constant", SequenceSpec.constant(1.0, 2.0)), ("geometric", SequenceSpec.geometric(2.0, 2.0)),
                   ("decaypower", SequenceSpec.decay_power(0.5, 2.0))):
    s = simulate(spec, 1.0, N, seed=2024, record_path=True)
    print(f"{name:11s} final={s.final_theta:.4f} last_flip={s.last_flip} "
          f"monopoly={monopoly_proxy(s)} domination={domination_proxy(s)}")
    print("            theta at n=10,100,1000,10000:", np.round(s.path_theta[[10, 100, 1000, N]], 4))
    print("            white draws in (100, 10000]:", window_count(s.path_draws, 100, 100))

# %% [markdown]
# ## Monotone coupling
#
# Shared uniforms make the path from a larger start stay above the other.

# %%
spec = SequenceSpec.power_law(1.0, 2.0)
low = simulate(spec, 0.5, 2000, seed=5, record_path=True).path_theta
high = simulate(spec, 1.5, 2000, seed=5, record_path=True).path_theta
print("high >= low at every step:", bool(np.all(high >= low)))
print("gap at n = 0, 10, 100, 2000:", np.round((high - low)[[0, 10, 100, 2000]], 5))
