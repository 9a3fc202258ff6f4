# %% [markdown]
# # The never-white product
#
# On the event that no white ball is drawn, theta_n = t0 / tau_n exactly, so
# that event has probability prod_{n<N} (1 - t0 / tau_n).  It is both an exact
# finite-N check of the simulator and a lower bound for P(M).

# %%
from __future__ import annotations

import math

from tdurn.ensemble import EnsembleConfig, run_ensemble
from tdurn.sequence import SequenceSpec
from tdurn.theory import product_never_white

trials = 50_000
for name, spec, N in (("constant", SequenceSpec.constant(1.0, 2.0), 100),
                      ("powerlaw a=1", SequenceSpec.power_law(1.0, 2.0), 100),
                      ("geometric r=2", SequenceSpec.geometric(2.0, 2.0), 50)):
    p = product_never_white(spec, 1.0, N)
    f = run_ensemble(EnsembleConfig(spec, 1.0, N, trials, base_seed=3)).final.never_white_freq
    z = (f - p) / math.sqrt(p * (1 - p) / trials)
    print(f"{name:14s} N={N:3d} product={p:.5f} simulated={f:.5f} z={z:+.2f}")

# %% [markdown]
# Infinite horizon: zero when sum 1/tau_n diverges; otherwise a positive
# number, for Geometric r=2 the q-Pochhammer value (1/2; 1/2)_inf.

# %%
geo = SequenceSpec.geometric(2.0, 2.0)
print("geometric:", product_never_white(geo, 1.0, math.inf, 1e-12))
print("exp sqrt: ", product_never_white(SequenceSpec.exp_sqrt(2.0), 1.0, math.inf, 1e-9))
print("constant: ", product_never_white(SequenceSpec.constant(1.0, 2.0), 1.0, math.inf))
rep = run_ensemble(EnsembleConfig(geo, 1.0, 200, 10_000))
print("geometric monopoly proxy at N=200:", rep.monopoly_freq)
