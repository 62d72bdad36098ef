"""
Exact reduced-process tables
============================

The reduced process Z(m, n) counts the generation-m individuals with
descendants alive at generation n.  Its pmf has the closed form

    P(Z(m, n) = j) = (1 - q_{n-m})^j / j! * f_m^{(j)}(q_{n-m}),

and joining it with a small terminal population {0 < Z(n) <= C} only
needs truncated convolutions on top of the same derivative jets.  All
three quantities below are exact up to the requested truncation error.
"""

import numpy as np

from gwreduced import (
    bounded_survival_prob,
    conditional_reduced_pmf,
    joint_reduced_bounded,
    make_builtin,
    mrca_distance_cdf,
    reduced_pmf,
)

law = make_builtin("ternary_uniform")
n, m, C = 200, 100, 12

# Unconditional reduced pmf at the halfway generation.  Tables store
# pmf[j-1] = P(count = j) for j = 1..J_max; prob(j) is the accessor.
table = reduced_pmf(law, m, n, J_max=6)
print(f"P(Z({m},{n}) = j), j = 1..6:")
print(np.array2string(table.pmf, precision=8))
print(f"mass accounted (against survival): {table.mass_accounted:.8f}")

# Joint with a bounded positive terminal size: P(Z(m,n)=j, 0<Z(n)<=C).
joint = joint_reduced_bounded(law, m, n, C, J_max=6)
print(f"\nP(Z({m},{n}) = j, 0 < Z({n}) <= {C}), j = 1..6:")
print(np.array2string(joint.pmf, precision=8))

# The joint rows sum over j to the bare event probability, which is a
# useful internal consistency check.
H = bounded_survival_prob(law, n, C)
full = joint_reduced_bounded(law, m, n, C)
print(f"\nsum_j joint = {full.pmf.sum():.12f}")
print(f"P(0 < Z({n}) <= {C}) = {H:.12f}")

# Conditioning on the event normalizes the row.
cond = conditional_reduced_pmf(law, m, n, C, J_max=6)
print(f"\nP(Z({m},{n}) = j | 0 < Z({n}) <= {C}):")
print(np.array2string(cond.pmf, precision=6))

# Distance to the most recent common ancestor of the survivors: the
# cdf of n - (last generation where the reduced process is still 1).
dist = np.arange(0, n + 1, 25)
cdf = mrca_distance_cdf(law, n, C, dist)
print(f"\nP(mrca distance <= u | 0 < Z({n}) <= {C}):")
for u, p in zip(dist, cdf):
    print(f"  u={u:<4d} {p:.6f}")
