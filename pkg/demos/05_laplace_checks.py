# %% [markdown]
# # The lemma constant and Laplace-transform inequalities
#
# h(x) = (x - 1 + e^{-x}) / x^2 decreases from 1/2, so c = 1/2 is the
# smallest constant with 1 - p + p e^{-x} <= exp(-p x + c p x^2).

# %%
from __future__ import annotations

from tdurn.sequence import SequenceSpec, delta_tail
from tdurn.theory import LEMMA_C, check_laplace_recursion, find_lemma_c, proposition_delta_bound

r = find_lemma_c()
print(f"c_min={r.c_min}  violations={r.violations}/{r.points}  margin={r.margin:.3g}")
print("c = 0.45 violations:", find_lemma_c(safety=-0.05).violations)

# %% [markdown]
# With f_n(l) = E exp(-l theta_n), one step of the process gives
# f_n(l) <= f_{n-1}(l - c s_n^2 l^2).  Both sides are simulated on separate
# streams; a pass means LHS <= RHS + 4 combined standard errors.

# %%
spec = SequenceSpec.constant(1.0, 2.0)
for n, lam in ((1, 1.0), (20, 2.0), (100, 1 / (2 * LEMMA_C * delta_tail(spec, 100)))):
    c = check_laplace_recursion(spec, 1.0, n, lam, 20_000, seed=1)
    print(f"n={n:3d} lam={lam:7.3f} lhs={c.lhs:.5f} rhs={c.rhs:.5f} exact={c.exact} passed={c.passed}")

# %%
rep = proposition_delta_bound(spec, 1.0, 10, 20_000, seed=2, ns=(20, 100, 1000))
print(f"delta_10={rep.delta_m:.5f} lam_10={rep.lam_m:.3f} bound={rep.bound:.5f}")
for row in rep.rows:
    print(f"  n={row['n']:5d} f_n={row['f_n']:.5f} passed={row['passed']}")
