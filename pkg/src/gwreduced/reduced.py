"""Exact finite-horizon laws of the reduced process.

The reduced process counts, at an intermediate generation m, the
individuals that still have living descendants at the terminal
generation n.  Its unconditional pmf has the closed form

    P(count at m = j) = (1 - q_{n-m})^j / j! * f_m^(j)(q_{n-m}),

with q_r the extinction probability at horizon r, so each table row
comes from one derivative jet.  Joint laws with a smallness event
{0 < Z(n) <= C} use the subtree decomposition: given j reduced lines at
m, the terminal population is a sum of j iid copies of Z(n-m)
conditioned positive, so the joint pmf is the unconditional pmf times
a C-truncated convolution mass.  The most recent common ancestor of
the survivors sits at distance <= u from the terminal time exactly
when the reduced count at n-u is 1, which turns the ancestor-distance
cdf into a family of single-line probabilities.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningImpossibleError
from .offspring import OffspringLaw, pgf_derivatives
from .series import (
    PARTITION_CAP,
    TruncatedSeries,
    compose_step,
    derivative_jet,
    extinction_prob,
    pmf_Zn,
)

EPSILON_DEFAULT = 1e-9


@dataclass(frozen=True)
class ReducedLawTable:
    """Tabulated pmf of the reduced count at generation m out of n.

    ``pmf[j-1]`` is the probability of j reduced lines, j = 1..J_max.
    ``kind`` records which law the rows are: "unconditional" for
    P(count=j), "joint" for P(count=j, 0<Z(n)<=C), "conditional" for
    P(count=j | 0<Z(n)<=C).  ``mass_accounted`` is the row sum; J_max
    is chosen so the remainder against the relevant total is below
    ``epsilon`` unless the derivative-order cap bites first.
    """

    law: str
    n: int
    m: int
    bound: int | None
    epsilon: float
    pmf: np.ndarray
    mass_accounted: float
    kind: str

    @property
    def j_max(self) -> int:
        return len(self.pmf)

    def prob(self, j: int) -> float:
        """Probability of exactly j reduced lines."""
        if j < 1:
            raise ValueError("reduced counts start at 1")
        if j > len(self.pmf):
            return 0.0
        return float(self.pmf[j - 1])

    def to_json_dict(self) -> dict:
        return {
            "law": self.law,
            "n": self.n,
            "m": self.m,
            "C": self.bound,
            "epsilon": self.epsilon,
            "pmf": [float(p) for p in self.pmf],
            "mass_accounted": self.mass_accounted,
        }


def write_table_json(table: ReducedLawTable, path) -> None:
    with open(path, "w") as fh:
        json.dump(table.to_json_dict(), fh, indent=2)
        fh.write("\n")


def write_table_csv(table: ReducedLawTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "p"])
        for j, p in enumerate(table.pmf, start=1):
            writer.writerow([j, repr(float(p))])


def conditioned_positive_pmf(law: OffspringLaw, r: int, K: int) -> TruncatedSeries:
    """pmf of the generation-r population conditioned on being positive."""
    if r < 1:
        raise ValueError("horizon must be at least 1")
    series = pmf_Zn(law, r, K)
    survival = 1.0 - series.coeffs[0]
    coeffs = series.coeffs / survival
    coeffs[0] = 0.0
    tail = 1.0 - float(coeffs.sum())
    return TruncatedSeries(coeffs=coeffs, K=K, tail=max(tail, 0.0))


def bounded_survival_prob(law: OffspringLaw, n: int, C: int) -> float:
    """P(0 < Z(n) <= C), the probability of the small-survival event."""
    if C <= 0:
        return 0.0
    if n == 0:
        return 1.0 if C >= 1 else 0.0
    series = pmf_Zn(law, n, C)
    return float(series.coeffs[1:].sum())


def _reduced_row_probs(law, m, q, J):
    """Unconditional reduced pmf p_1..p_J at intermediate generation m."""
    if m == 0:
        out = np.zeros(J)
        out[0] = 1.0 - q
        return out
    jet = derivative_jet(law, m, q, J)
    out = np.empty(J)
    factor = 1.0
    for j in range(1, J + 1):
        factor *= (1.0 - q) / j
        out[j - 1] = factor * jet.values[j]
    return out


def _order_schedule(J_max: int | None):
    if J_max is not None:
        if not 1 <= J_max <= PARTITION_CAP:
            raise ValueError(f"J_max must lie in [1, {PARTITION_CAP}]")
        return (J_max,)
    return (8, 14, PARTITION_CAP)


def _trim(probs: np.ndarray, total: float, epsilon: float, adaptive: bool):
    """Cut the table at the first order whose remainder is below epsilon."""
    if not adaptive:
        return probs
    partial = np.cumsum(probs)
    small = np.nonzero(total - partial < epsilon)[0]
    if len(small):
        return probs[: small[0] + 1]
    return probs


def reduced_pmf(
    law: OffspringLaw,
    m: int,
    n: int,
    J_max: int | None = None,
    epsilon: float = EPSILON_DEFAULT,
) -> ReducedLawTable:
    """Unconditional pmf of the reduced count at generation m out of n.

    At m = n the reduced count equals the terminal population, so the
    table is the positive part of the population pmf.  The remainder
    criterion is absolute: the rows approach the survival probability
    P(Z(n) > 0) to within epsilon when the order cap permits.
    """
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    adaptive = J_max is None
    survival = 1.0 - extinction_prob(law, n)
    if m == n:
        J = PARTITION_CAP if adaptive else J_max
        series = pmf_Zn(law, n, max(J, 1))
        probs = series.coeffs[1 : J + 1].copy()
    else:
        q = extinction_prob(law, n - m)
        for J in _order_schedule(J_max):
            probs = _reduced_row_probs(law, m, q, J)
            if survival - probs.sum() < epsilon:
                break
    probs = _trim(probs, survival, epsilon, adaptive)
    return ReducedLawTable(
        law=law.label,
        n=n,
        m=m,
        bound=None,
        epsilon=epsilon,
        pmf=probs,
        mass_accounted=float(probs.sum()),
        kind="unconditional",
    )


def _bounded_sum_masses(s1: np.ndarray, J: int) -> np.ndarray:
    """P(S_j <= C) for j = 1..J, S_j a j-fold sum of iid positive sizes.

    ``s1`` is the single-copy pmf on 0..C with zero mass at 0; the
    convolutions stay truncated at C since mass above the bound never
    returns below it.
    """
    C = len(s1) - 1
    masses = np.empty(J)
    s = s1.copy()
    masses[0] = s.sum()
    for j in range(2, J + 1):
        s = np.convolve(s, s1)[: C + 1]
        masses[j - 1] = s.sum()
    return masses


def joint_reduced_bounded(
    law: OffspringLaw,
    m: int,
    n: int,
    C: int,
    J_max: int | None = None,
    epsilon: float = EPSILON_DEFAULT,
) -> ReducedLawTable:
    """pmf rows P(reduced count at m = j, 0 < Z(n) <= C).

    Row j is the unconditional reduced probability times the chance
    that j independent surviving subtrees keep the terminal total at
    or below C.  The remainder criterion is relative to the event
    probability, so the conditional table derived from this one sums
    to 1 within epsilon.
    """
    if not 0 <= m < n:
        raise ValueError("need 0 <= m < n")
    if C < 1:
        raise ValueError("bound must be at least 1")
    r = n - m
    q = extinction_prob(law, r)
    s1 = conditioned_positive_pmf(law, r, C).coeffs
    event_prob = bounded_survival_prob(law, n, C)
    adaptive = J_max is None
    for J in _order_schedule(J_max):
        rows = _reduced_row_probs(law, m, q, J)
        rows = rows * _bounded_sum_masses(s1, J)
        if event_prob - rows.sum() < epsilon * event_prob:
            break
    rows = _trim(rows, event_prob, epsilon * event_prob, adaptive)
    return ReducedLawTable(
        law=law.label,
        n=n,
        m=m,
        bound=C,
        epsilon=epsilon,
        pmf=rows,
        mass_accounted=float(rows.sum()),
        kind="joint",
    )


def conditional_reduced_pmf(
    law: OffspringLaw,
    m: int,
    n: int,
    C: int,
    J_max: int | None = None,
    epsilon: float = EPSILON_DEFAULT,
) -> ReducedLawTable:
    """pmf rows P(reduced count at m = j | 0 < Z(n) <= C)."""
    event_prob = bounded_survival_prob(law, n, C)
    if event_prob <= 0.0:
        raise ConditioningImpossibleError(
            f"conditioning event 0 < Z({n}) <= {C} has probability zero"
        )
    joint = joint_reduced_bounded(law, m, n, C, J_max=J_max, epsilon=epsilon)
    return ReducedLawTable(
        law=joint.law,
        n=n,
        m=m,
        bound=C,
        epsilon=epsilon,
        pmf=joint.pmf / event_prob,
        mass_accounted=float(joint.pmf.sum() / event_prob),
        kind="conditional",
    )


def _population_history(law: OffspringLaw, n: int, K: int):
    """Coefficient vectors of f_0 .. f_n, each truncated at K."""
    coeffs = np.zeros(K + 1)
    coeffs[1] = 1.0
    history = [coeffs]
    for _ in range(n):
        coeffs = compose_step(law, coeffs)
        history.append(coeffs)
    return history


def _single_line_prob(law: OffspringLaw, m: int, q: float) -> float:
    """(1-q) f_m'(q): probability the reduced count at m is exactly 1."""
    value, deriv = q, 1.0
    for _ in range(m):
        step = pgf_derivatives(law, value, 1)
        deriv *= step[1]
        value = step[0]
    return (1.0 - q) * deriv


def mrca_distance_cdf(law: OffspringLaw, n: int, C: int, distances) -> np.ndarray:
    """cdf of the distance from the terminal time back to the most
    recent common ancestor of the survivors, given 0 < Z(n) <= C.

    The ancestor lies within distance u exactly when the reduced count
    at generation n-u is 1; distance 0 means the terminal population
    itself is a single individual.
    """
    if C < 1:
        raise ValueError("bound must be at least 1")
    grid = np.atleast_1d(np.asarray(distances, dtype=int))
    if grid.size and (grid.min() < 0 or grid.max() > n):
        raise ValueError("distances must lie in [0, n]")
    history = _population_history(law, n, C)
    event_prob = float(history[n][1 : C + 1].sum())
    if event_prob <= 0.0:
        raise ConditioningImpossibleError(
            f"conditioning event 0 < Z({n}) <= {C} has probability zero"
        )
    out = np.empty(len(grid))
    for i, u in enumerate(grid):
        u = int(u)
        if u == 0:
            out[i] = history[n][1] / event_prob
            continue
        coeffs_u = history[u]
        survival_u = 1.0 - coeffs_u[0]
        single_subtree_mass = float(coeffs_u[1 : C + 1].sum()) / survival_u
        joint = _single_line_prob(law, n - u, coeffs_u[0]) * single_subtree_mass
        out[i] = joint / event_prob
    return out
