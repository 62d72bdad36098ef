"""Truncated power-series iteration of critical Galton-Watson pgfs.

The pgf of generation n is f_n = f(f_{n-1}).  Three computations share
that recursion: the extinction sequence q_n = f_n(0), the pmf of Z(n)
as the coefficients of f_n truncated at a chosen degree, and derivative
jets (f_n(q), f_n'(q), ..., f_n^(J)(q)) propagated with the partition
form of the chain rule for higher derivatives.

Every composition step writes the inner series as g = g_0 + ghat with
ghat(0) = 0 and evaluates f(g) = sum_j f^(j)(g_0)/j! ghat^j, which is
exact at every degree <= K.  For the linear-fractional and Poisson
families that sum is collapsed into an O(K^2) coefficient recurrence
(reciprocal and exponential of a series); finite-support laws use the
finite sum directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import JetOverflowError, SeriesBudgetError
from .offspring import Family, OffspringLaw, pgf_derivatives, pgf_value

CLAMP_TOL = 1e-14
PARTITION_CAP = 20
# composition work is ~ n*K^2 multiply-adds; cap keeps a typo from
# turning into an hour of convolutions
DEFAULT_COST_CAP = 1e11


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients c_0..c_K of f_n, i.e. P(Z(n)=k) for k <= K.

    ``tail`` is the probability mass beyond degree K, so the
    coefficients and the tail always account for total mass one.
    """

    coeffs: np.ndarray
    K: int
    tail: float


@dataclass(frozen=True)
class DerivativeJet:
    """Derivatives (f_n(q), f_n'(q), ..., f_n^(J)(q)) at a fixed point."""

    q: float
    values: np.ndarray
    n: int

    @property
    def order(self) -> int:
        return len(self.values) - 1


def iter_extinction_probs(law: OffspringLaw, n: int):
    """Yield q_0 = 0, q_1, ..., q_n."""
    if n < 0:
        raise ValueError("generation must be nonnegative")
    q = 0.0
    yield q
    for _ in range(n):
        q = pgf_value(law, q)
        yield q


def extinction_prob(law: OffspringLaw, n: int) -> float:
    """P(Z(n) = 0), computed by iterating the pgf at 0."""
    for q in iter_extinction_probs(law, n):
        pass
    return q


def default_truncation(law: OffspringLaw, bound: int) -> int:
    """Truncation degree sized to a conditioning bound on the population."""
    return max(int(math.ceil(4.0 * law.half_variance * bound)), 64)


def _clamp(coeffs: np.ndarray) -> np.ndarray:
    # tiny negative rounding must not feed into later convolutions
    low = coeffs.min()
    if low < 0.0:
        if low < -CLAMP_TOL:
            raise FloatingPointError(f"series coefficient {low} below -{CLAMP_TOL}")
        coeffs = np.where(coeffs < 0.0, 0.0, coeffs)
    return coeffs


def _step_reciprocal(g: np.ndarray) -> np.ndarray:
    # f(s) = 1/(2-s): solve (2 - g) h = 1 coefficient by coefficient
    K = len(g) - 1
    h = np.empty_like(g)
    base = 1.0 / (2.0 - g[0])
    h[0] = base
    grev = g[::-1]
    for k in range(1, K + 1):
        h[k] = base * np.dot(grev[K - k : K], h[:k])
    return h


def _step_exponential(g: np.ndarray) -> np.ndarray:
    # f(s) = e^(s-1): h' = g' h gives k h_k = sum i g_i h_{k-i}
    K = len(g) - 1
    h = np.empty_like(g)
    h[0] = math.exp(g[0] - 1.0)
    wrev = (g * np.arange(K + 1))[::-1]
    for k in range(1, K + 1):
        h[k] = np.dot(wrev[K - k : K], h[:k]) / k
    return h


def _step_finite(law: OffspringLaw, g: np.ndarray) -> np.ndarray:
    # finite support: the centered sum has max_support + 1 terms
    K = len(g) - 1
    d = law.max_support
    derivs = pgf_derivatives(law, g[0], d)
    ghat = g.copy()
    ghat[0] = 0.0
    h = np.zeros(K + 1)
    h[0] = derivs[d] / math.factorial(d)
    for j in range(d - 1, -1, -1):
        h = np.convolve(h, ghat)[: K + 1]
        h[0] += derivs[j] / math.factorial(j)
    return h


def _step_centered_generic(law: OffspringLaw, g: np.ndarray) -> np.ndarray:
    # reference implementation of the centered composition step; cost
    # O(K^3), kept for cross-checking the family recurrences
    K = len(g) - 1
    derivs = pgf_derivatives(law, g[0], K)
    ghat = g.copy()
    ghat[0] = 0.0
    h = np.zeros(K + 1)
    h[0] = derivs[K] / math.factorial(K)
    for j in range(K - 1, -1, -1):
        h = np.convolve(h, ghat)[: K + 1]
        h[0] += derivs[j] / math.factorial(j)
    return h


def compose_step(law: OffspringLaw, g: np.ndarray) -> np.ndarray:
    """One composition f(g(s)) truncated at the degree of ``g``."""
    if law.family is Family.LINEAR_FRACTIONAL:
        h = _step_reciprocal(g)
    elif law.family is Family.POISSON:
        h = _step_exponential(g)
    else:
        h = _step_finite(law, g)
    return _clamp(h)


def pmf_Zn(
    law: OffspringLaw,
    n: int,
    K: int,
    cost_cap: float = DEFAULT_COST_CAP,
) -> TruncatedSeries:
    """Exact pmf of the generation size Z(n) up to degree K."""
    if n < 0:
        raise ValueError("generation must be nonnegative")
    if K < 1:
        raise ValueError("truncation degree must be at least 1")
    if n * float(K) ** 2 > cost_cap:
        raise SeriesBudgetError(
            f"composition cost n*K^2 = {n * float(K)**2:.3g} exceeds cap {cost_cap:.3g}"
        )
    coeffs = np.zeros(K + 1)
    coeffs[1] = 1.0
    for _ in range(n):
        coeffs = compose_step(law, coeffs)
    tail = 1.0 - float(coeffs.sum())
    return TruncatedSeries(coeffs=coeffs, K=K, tail=max(tail, 0.0))


def enumerate_partitions(k: int) -> tuple:
    """All (i_1, ..., i_k) with 1*i_1 + 2*i_2 + ... + k*i_k = k."""
    if k < 1:
        raise ValueError("order must be at least 1")
    if k > PARTITION_CAP:
        raise JetOverflowError(
            f"derivative order {k} above the partition enumeration cap {PARTITION_CAP}"
        )
    return _partitions(k)


@lru_cache(maxsize=None)
def _partitions(k: int) -> tuple:
    sols = []
    vec = [0] * k

    def descend(r: int, rem: int) -> None:
        if r == 1:
            vec[0] = rem
            sols.append(tuple(vec))
            vec[0] = 0
            return
        for i in range(rem // r, -1, -1):
            vec[r - 1] = i
            descend(r - 1, rem - r * i)
        vec[r - 1] = 0

    descend(k, k)
    return tuple(sols)


@lru_cache(maxsize=None)
def _chain_terms(k: int) -> tuple:
    """Precompiled chain-rule terms: (coefficient, outer order, factors).

    The coefficient k!/(prod i_r! (r!)^i_r) counts set partitions of a
    k-set into blocks of the given sizes, hence is an exact integer.
    """
    terms = []
    for part in _partitions(k):
        coef = math.factorial(k)
        for r, i in enumerate(part, start=1):
            if i:
                coef //= math.factorial(i) * math.factorial(r) ** i
        outer_order = sum(part)
        factors = tuple((r, i) for r, i in enumerate(part, start=1) if i)
        terms.append((float(coef), outer_order, factors))
    return tuple(terms)


def _jet_step(law: OffspringLaw, values: np.ndarray, J: int) -> np.ndarray:
    outer = pgf_derivatives(law, float(values[0]), J)
    new = np.empty(J + 1)
    new[0] = outer[0]
    for k in range(1, J + 1):
        acc = 0.0
        for coef, outer_order, factors in _chain_terms(k):
            term = coef * outer[outer_order]
            for r, i in factors:
                term *= values[r] ** i
            acc += term
        new[k] = acc
    return new


def _identity_jet(q: float, J: int) -> np.ndarray:
    values = np.zeros(J + 1)
    values[0] = q
    values[1] = 1.0
    return values


def iter_derivative_jets(law: OffspringLaw, n: int, q: float, J: int):
    """Yield the jet of f_m at q for m = 0, 1, ..., n."""
    if not 0.0 <= q < 1.0:
        raise ValueError(f"jet evaluation point {q} outside [0, 1)")
    if J < 1:
        raise ValueError("jet order must be at least 1")
    if J > PARTITION_CAP:
        raise JetOverflowError(
            f"jet order {J} above the partition enumeration cap {PARTITION_CAP}"
        )
    if n < 0:
        raise ValueError("generation must be nonnegative")
    values = _identity_jet(q, J)
    yield DerivativeJet(q=q, values=values.copy(), n=0)
    for m in range(1, n + 1):
        values = _jet_step(law, values, J)
        if not np.all(np.isfinite(values)):
            raise JetOverflowError(
                f"jet of order {J} overflowed at generation {m} (point {q})"
            )
        yield DerivativeJet(q=q, values=values.copy(), n=m)


def derivative_jet(law: OffspringLaw, n: int, q: float, J: int) -> DerivativeJet:
    """Derivatives of the n-th pgf iterate at a point of [0, 1)."""
    for jet in iter_derivative_jets(law, n, q, J):
        pass
    return jet
