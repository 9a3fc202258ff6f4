# %% [markdown]
# # Regime map
#
# The classifier turns condition verdicts into statements about P(M) (draws
# eventually constant) and P(D) (limit at 0 or 1).  Finite-horizon proxies
# from an ensemble should point the same way.

# %%
from __future__ import annotations

from tdurn.ensemble import EnsembleConfig, run_ensemble
from tdurn.sequence import SequenceSpec
from tdurn.theory import classify

specs = {
    "constant": SequenceSpec.constant(1.0, 2.0),
    "logpower a=2": SequenceSpec.log_power(2.0, 2.0),
    "powerlaw a=1": SequenceSpec.power_law(1.0, 2.0),
    "geometric r=2": SequenceSpec.geometric(2.0, 2.0),
    "exp sqrt": SequenceSpec.exp_sqrt(2.0),
    "decaypower a=1/2": SequenceSpec.decay_power(0.5, 2.0),
}

# %%
print(f"{'':18s}{'P(M)':>15s}{'P(D)':>15s}  {'mono@N':>7s} {'dom@N':>7s}  rules")
for name, spec in specs.items():
    v = classify(spec)
    rep = run_ensemble(EnsembleConfig(spec, 1.0, 2000, 2000, base_seed=1))
    rules = ", ".join(r for r, _ in v.fired)
    print(f"{name:18s}{v.p_monopoly.value:>15s}{v.p_domination.value:>15s}  "
          f"{rep.monopoly_freq:7.3f} {rep.domination_freq:7.3f}  {rules}")

# %% [markdown]
# The proxies have no calibrated error at finite N.  The checkpoint rows show
# which way they move as the horizon grows.

# %%
rep = run_ensemble(EnsembleConfig(specs["logpower a=2"], 1.0, 8000, 2000, base_seed=2, checkpoints=(1000, 2000, 4000)))
for c in rep.checkpoints:
    d = c.to_dict()
    print(f"N={c.horizon:5d} monopoly={c.monopoly_freq:.3f} {d['monopoly_ci']} domination={c.domination_freq:.3f}")
