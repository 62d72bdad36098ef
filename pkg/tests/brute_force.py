"""Exhaustive rational-arithmetic oracle for shallow branching trees.

For a finite-support offspring law given as exact fractions, this
enumerates the joint distribution of the full reduced-count profile
(R_0, R_1, ..., R_n), where R_n is the terminal population and R_m for
m < n counts generation-m individuals with living descendants at n.
Aggregation keeps the state space tiny: two subtrees with the same
profile are interchangeable, so the recursion works on profile
distributions rather than on individual trees.

Everything here is independent of the package under test and uses only
Fraction arithmetic; values are exact.
"""

from fractions import Fraction
from functools import lru_cache

TERNARY = (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def _combine(d1, d2):
    """Distribution of the elementwise sum of two independent profiles."""
    out = {}
    for v1, p1 in d1.items():
        for v2, p2 in d2.items():
            v = tuple(a + b for a, b in zip(v1, v2))
            out[v] = out.get(v, Fraction(0)) + p1 * p2
    return out


def _deepen(dist, pmf):
    """Profiles of depth h+1 from profiles of depth h."""
    width = len(next(iter(dist)))
    zero = (0,) * width
    powers = [{zero: Fraction(1)}]
    for _ in range(1, len(pmf)):
        powers.append(_combine(powers[-1], dist))
    out = {}
    for k, fk in enumerate(pmf):
        if fk == 0:
            continue
        for v, p in powers[k].items():
            root = 1 if v[-1] > 0 else 0
            nv = (root,) + v
            out[nv] = out.get(nv, Fraction(0)) + fk * p
    return out


@lru_cache(maxsize=None)
def profiles(pmf, depth):
    """Exact distribution over (R_0, ..., R_depth) vectors."""
    dist = {(1,): Fraction(1)}
    for _ in range(depth):
        dist = _deepen(dist, pmf)
    return dist


def population_pmf(pmf, n, k):
    return sum(p for v, p in profiles(pmf, n).items() if v[n] == k) or Fraction(0)


def extinction(pmf, n):
    return population_pmf(pmf, n, 0)


def reduced_pmf(pmf, m, n, j):
    """P(R_m = j), unconditional."""
    return sum(p for v, p in profiles(pmf, n).items() if v[m] == j) or Fraction(0)


def event_prob(pmf, n, C):
    """P(0 < R_n <= C)."""
    return sum(p for v, p in profiles(pmf, n).items() if 0 < v[n] <= C) or Fraction(0)


def joint_bounded(pmf, m, n, j, C):
    """P(R_m = j, 0 < R_n <= C)."""
    return sum(
        p for v, p in profiles(pmf, n).items() if v[m] == j and 0 < v[n] <= C
    ) or Fraction(0)


def mrca_cdf(pmf, n, C, u):
    """P(R_{n-u} = 1 | 0 < R_n <= C): ancestor within distance u."""
    return joint_bounded(pmf, n - u, n, 1, C) / event_prob(pmf, n, C)
