# %% [markdown]
# # Reinforcement sequences
#
# A `SequenceSpec` fixes the added masses sigma_n and the initial mass tau_0.
# The step ratios s_n = sigma_n / tau_n and r_n = tau_{n-1} / tau_n drive
# the urn, and the square tail delta_n measures how much randomness is left.

# %%
from __future__ import annotations

import math

from tdurn.sequence import Condition, SequenceSpec, delta_tail, evaluate_all, log_tau, step_ratios, tau

specs = {
    "constant c=1": SequenceSpec.constant(1.0, 2.0),
    "logpower a=2": SequenceSpec.log_power(2.0, 2.0),
    "powerlaw a=1": SequenceSpec.power_law(1.0, 2.0),
    "geometric r=2": SequenceSpec.geometric(2.0, 2.0),
    "exp sqrt": SequenceSpec.exp_sqrt(2.0),
    "decaypower a=1/2": SequenceSpec.decay_power(0.5, 2.0),
}

# %% [markdown]
# Small-n values, and what happens far out.  Geometric tau_2000 overflows a
# double, so `tau` saturates and flags it while `log_tau` stays exact.

# %%
for name, spec in specs.items():
    s, r = step_ratios(spec, 3)
    print(f"{name:18s} tau_3={tau(spec, 3):10.4f}  s_3={s:.4f}  r_3={r:.4f}")

geo = specs["geometric r=2"]
print("tau_2000 (value, saturated):", tau(geo, 2000, with_flag=True))
print("log tau_2000 / log 2 =", log_tau(geo, 2000) / math.log(2))
print("step ratios at 2000:", step_ratios(geo, 2000))

# %% [markdown]
# ## Square tails
#
# delta_0 for sigma = 1, tau_0 = 2 is pi^2/6 - 5/4.  Fast growth makes the
# square sum diverge, and `delta_tail` returns infinity.

# %%
for name, spec in specs.items():
    print(f"{name:18s} delta_0 = {delta_tail(spec, 0):.10g}")
print("pi^2/6 - 5/4       =", math.pi ** 2 / 6 - 1.25)

# %% [markdown]
# ## Conditions
#
# Verdicts for built-in families come from closed-form asymptotics; the
# evidence block is numeric probing only.

# %%
header = "".join(f"{c.value[:12]:>14s}" for c in Condition)
print(f"{'':18s}{header}")
for name, spec in specs.items():
    v = evaluate_all(spec, probe_max=512)
    print(f"{name:18s}" + "".join(f"{v[c].value.value:>14s}" for c in Condition))
