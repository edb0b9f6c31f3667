"""Cyclic-shift signal primitives and numerically stable log-domain operators.

Signals are plain 1-D float64 numpy arrays; shifts are integers interpreted
modulo the signal length. All likelihood arithmetic elsewhere in the package is
done in log domain, so the two workhorses here are ``log_sum_exp`` and the
entropic smooth-max ``soft_max_eps`` together with its maximizing simplex
weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class DegenerateLikelihoodError(ValueError):
    """Every candidate has zero likelihood; posterior weights are undefined."""


class DegenerateComponentError(ValueError):
    """A mixture component carries no responsibility mass."""


class NumericalDivergenceError(RuntimeError):
    """An iterate became non-finite.

    Attributes
    ----------
    iteration : int
        Inner-iteration index at which the non-finite value appeared.
    """

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


def as_signal(values, name: str = "signal") -> np.ndarray:
    """Validate and return a signal as a float64 array.

    A signal is a 1-D real vector of length >= 2 with all entries finite.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError(f"{name} must have length >= 2, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def canonical_shift(l: int, n: int) -> int:
    """Reduce a shift to its canonical representative in {0, ..., n-1}."""
    return int(l) % int(n)


def circular_shift(x, l: int) -> np.ndarray:
    """Cyclically shift a signal: output[j] = x[(j - l) mod N].

    Any integer ``l`` is accepted and reduced modulo the length; negative
    shifts realize the inverse operator. The input is never mutated.
    """
    arr = np.asarray(x, dtype=np.float64)
    return np.roll(arr, int(l))


@dataclass(frozen=True)
class NoiseModel:
    """Two-component zero-mean Gaussian mixture: (alpha, sigma1_sq, sigma2_sq).

    ``alpha`` is the mixing ratio of component 1; variances are strictly
    positive. The boundary values alpha in {0, 1} are legal and denote a
    single active component.
    """

    alpha: float
    sigma1_sq: float
    sigma2_sq: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        for name in ("sigma1_sq", "sigma2_sq"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")


def validate_simplex(weights, atol: float = 1e-12, name: str = "weights") -> np.ndarray:
    """Check that a vector lies on the probability simplex.

    Entries must be in [0, 1] (up to ``atol`` slack on the bounds) and sum to
    1 within ``atol``. Returns the validated array.
    """
    arr = np.asarray(weights, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if np.any(arr < -atol) or np.any(arr > 1.0 + atol):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    s = float(arr.sum())
    if abs(s - 1.0) > atol:
        raise ValueError(f"{name} must sum to 1 (got {s!r})")
    return arr


def log_sum_exp(v) -> float:
    """Return log(sum(exp(v))) via max subtraction.

    Entries may be -inf (zero likelihood) but not all of them; that case
    raises :class:`DegenerateLikelihoodError`. Exact for single-entry input.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("log_sum_exp of an empty vector")
    m = float(arr.max())
    if m == -np.inf:
        raise DegenerateLikelihoodError("all log-likelihood entries are -inf")
    if arr.size == 1:
        return m
    return m + math.log(float(np.exp(arr - m).sum()))


class SoftMaxResult(NamedTuple):
    value: float
    weights: np.ndarray


def soft_max_eps(x, eps: float) -> SoftMaxResult:
    """Entropic smooth maximum eps*log(sum(exp(x/eps))) with its dual weights.

    Returns both the smooth-max value and the maximizing simplex vector
    w* proportional to exp(x/eps), which satisfies
    ``value == <w*, x> - eps * sum(w* log w*)``. As eps -> 0 the value
    approaches max(x) from above.
    """
    if not (eps > 0.0):
        raise ValueError(f"eps must be > 0, got {eps}")
    arr = np.asarray(x, dtype=np.float64)
    scaled = arr / eps
    lse = log_sum_exp(scaled)
    weights = np.exp(scaled - lse)
    return SoftMaxResult(eps * lse, weights)


def entropy_dual_value(x, weights, eps: float) -> float:
    """Evaluate <w, x> - eps * sum(w log w) with the 0*log(0) = 0 convention."""
    arr = np.asarray(x, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    nz = w > 0.0
    ent = float(np.sum(w[nz] * np.log(w[nz])))
    return float(np.dot(w, arr)) - eps * ent
