"""Critical offspring distributions and exact evaluation of their pgf.

A law here is always critical (mean one child) with finite positive
variance.  Three built-in families have closed-form pgf derivatives of
every order; custom laws must have finite support so that derivatives
stay exactly computable by polynomial differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateVarianceError, NonCriticalError

MEAN_TOL = 1e-9
MASS_TOL = 1e-12


class Family(str, Enum):
    LINEAR_FRACTIONAL = "linear_fractional"
    POISSON = "poisson"
    TERNARY_UNIFORM = "ternary_uniform"
    CUSTOM_FINITE = "custom"


@dataclass(frozen=True)
class OffspringLaw:
    """Immutable critical offspring distribution.

    ``half_variance`` is half the offspring variance; survival and
    conditioning scales downstream are all expressed through it.
    ``support_pmf`` stores the exact pmf for finite-support laws and is
    None for the two infinite-support built-ins.  ``aperiodic`` records
    whether f_0 > 0 and gcd{k >= 1 : f_k > 0} == 1; local-limit based
    comparisons are only meaningful when it holds.
    """

    family: Family
    half_variance: float
    aperiodic: bool
    support_pmf: np.ndarray | None = None

    @property
    def max_support(self) -> int | None:
        """Largest possible offspring count, None when unbounded."""
        if self.support_pmf is None:
            return None
        return len(self.support_pmf) - 1

    @property
    def label(self) -> str:
        if self.family is Family.CUSTOM_FINITE:
            probs = ",".join(repr(float(p)) for p in self.support_pmf)
            return f"custom:{probs}"
        return self.family.value

    def pmf_prefix(self, kmax: int) -> np.ndarray:
        """Exact probabilities f_0 .. f_kmax."""
        if self.support_pmf is not None:
            out = np.zeros(kmax + 1)
            upto = min(kmax, len(self.support_pmf) - 1)
            out[: upto + 1] = self.support_pmf[: upto + 1]
            return out
        k = np.arange(kmax + 1)
        if self.family is Family.LINEAR_FRACTIONAL:
            return 0.5 ** (k + 1.0)
        # Poisson(1)
        return np.exp(-1.0) / np.array([math.factorial(int(i)) for i in k], dtype=float)


def _aperiodic(pmf: np.ndarray) -> bool:
    if pmf[0] <= 0.0:
        return False
    support = [k for k in range(1, len(pmf)) if pmf[k] > 0.0]
    return math.gcd(*support) == 1 if support else False


def make_custom(pmf) -> OffspringLaw:
    """Validate a finite-support pmf and build a critical law from it.

    The sequence may carry rounding drift up to 1e-12 in total mass and
    is renormalized; a mean off 1 by more than 1e-9 is rejected.
    """
    arr = np.asarray(pmf, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise ValueError("pmf must be a 1-d sequence with at least two entries")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("pmf entries must be finite and nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"pmf mass {total} differs from 1 by more than {MASS_TOL}")
    arr = arr / total
    k = np.arange(len(arr), dtype=float)
    mean = float(np.dot(k, arr))
    if abs(mean - 1.0) > MEAN_TOL:
        raise NonCriticalError(f"offspring mean {mean} is not 1 within {MEAN_TOL}")
    variance = float(np.dot(k * k, arr)) - mean * mean
    if variance <= MASS_TOL:
        raise DegenerateVarianceError("offspring variance is zero")
    # trim trailing zero probabilities so max_support is tight
    last = int(np.max(np.nonzero(arr)[0]))
    arr = arr[: last + 1]
    return OffspringLaw(
        family=Family.CUSTOM_FINITE,
        half_variance=variance / 2.0,
        aperiodic=_aperiodic(arr),
        support_pmf=arr,
    )


def make_builtin(family: Family | str, params=()) -> OffspringLaw:
    """Construct one of the parameterless built-in critical laws."""
    fam = Family(family)
    if fam is Family.CUSTOM_FINITE:
        return make_custom(params)
    if len(tuple(params)) != 0:
        raise ValueError(f"{fam.value} takes no parameters")
    if fam is Family.LINEAR_FRACTIONAL:
        # f(s) = 1/(2-s), geometric pmf 2^-(k+1), variance 2
        return OffspringLaw(fam, half_variance=1.0, aperiodic=True)
    if fam is Family.POISSON:
        return OffspringLaw(fam, half_variance=0.5, aperiodic=True)
    # ternary uniform on {0, 1, 2}
    return OffspringLaw(
        fam,
        half_variance=0.25,
        aperiodic=True,
        support_pmf=np.array([0.25, 0.5, 0.25]),
    )


def law_from_name(name: str) -> OffspringLaw:
    """Parse a law given as a config/CLI string.

    Accepts the built-in names plus ``custom:p0,p1,...``.
    """
    name = name.strip()
    if name.startswith("custom:"):
        probs = [float(tok) for tok in name[len("custom:"):].split(",") if tok.strip()]
        return make_custom(probs)
    try:
        return make_builtin(name)
    except ValueError:
        raise ValueError(f"unknown offspring law {name!r}") from None


def pgf_value(law: OffspringLaw, s: float) -> float:
    """The pgf at a point of [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"pgf argument {s} outside [0, 1]")
    if law.family is Family.LINEAR_FRACTIONAL:
        return 1.0 / (2.0 - s)
    if law.family is Family.POISSON:
        return math.exp(s - 1.0)
    return float(npoly.polyval(s, law.support_pmf))


def pgf_derivatives(law: OffspringLaw, q: float, J: int) -> np.ndarray:
    """Exact derivatives (f(q), f'(q), ..., f^(J)(q)) of the offspring pgf.

    Uses the family closed form: j!/(2-q)^(j+1) for the linear-fractional
    law, e^(q-1) at every order for Poisson(1), and direct polynomial
    differentiation for finite-support laws.
    """
    if not 0.0 <= q < 1.0:
        raise ValueError(f"derivative evaluation point {q} outside [0, 1)")
    if J < 0:
        raise ValueError("derivative order must be nonnegative")
    out = np.empty(J + 1)
    if law.family is Family.LINEAR_FRACTIONAL:
        base = 1.0 / (2.0 - q)
        out[0] = base
        for j in range(1, J + 1):
            out[j] = out[j - 1] * j * base
        return out
    if law.family is Family.POISSON:
        out[:] = math.exp(q - 1.0)
        return out
    coeffs = law.support_pmf
    for j in range(J + 1):
        out[j] = npoly.polyval(q, coeffs) if len(coeffs) else 0.0
        coeffs = npoly.polyder(coeffs) if len(coeffs) > 1 else np.zeros(0)
    return out


def sample_offspring(law: OffspringLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` iid offspring counts."""
    if law.family is Family.LINEAR_FRACTIONAL:
        return rng.geometric(0.5, size) - 1
    if law.family is Family.POISSON:
        return rng.poisson(1.0, size)
    cut = np.cumsum(law.support_pmf)
    draws = np.searchsorted(cut, rng.random(size), side="right")
    return np.minimum(draws, len(cut) - 1)
