"""Posterior weights: soft shift assignments and noise-component responsibilities.

This is the materialized (full-tensor) implementation used by tests and small
instances; the solver streams the same quantities through fused kernels (see
``kernels``) because the responsibility tensor has M*N^2 entries. Everything is
computed in log domain: shift rows via log-sum-exp normalization, per-sample
responsibilities via the logistic of the log-odds so extreme residuals cannot
produce 0/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import DegenerateLikelihoodError, NoiseModel, as_signal, validate_simplex
from .datagen import ObservationSet


@dataclass
class ShiftWeights:
    """Row-stochastic M x N matrix; row i is the shift posterior of observation i."""

    w: np.ndarray

    def validate(self, atol: float = 1e-12) -> None:
        for i in range(self.w.shape[0]):
            validate_simplex(self.w[i], atol=atol, name=f"w[{i}]")


@dataclass
class NoiseResponsibilities:
    """First-component responsibilities q1[i][j][l]; the second is 1 - q1."""

    q1: np.ndarray

    def validate(self) -> None:
        if np.any(self.q1 < 0.0) or np.any(self.q1 > 1.0):
            raise ValueError("responsibilities must lie in [0, 1]")


def shift_table(u: np.ndarray) -> np.ndarray:
    """All cyclic shifts of a signal: row l is R_l u, i.e. table[l, j] = u[(j-l) mod N]."""
    n = u.shape[0]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return u[idx]


def residual_tensor(data: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Residuals r[i, l, j] = f[i, j] - (R_l u)[j] for every shift candidate."""
    return data[:, None, :] - shift_table(u)[None, :, :]


def mixture_log_constants(theta: NoiseModel):
    """Log-domain constants (b1, b2, inv1, inv2) of the two Gaussian components.

    b_k = log(alpha_k) - 0.5*log(2*pi*sigma_k^2) and inv_k = 1/(2*sigma_k^2),
    so the per-sample mixture log-density is logaddexp(b1 - r^2*inv1,
    b2 - r^2*inv2). b_k is -inf for a switched-off component.
    """
    a = theta.alpha
    b1 = (math.log(a) if a > 0.0 else -math.inf) - 0.5 * math.log(2.0 * math.pi * theta.sigma1_sq)
    b2 = (math.log1p(-a) if a < 1.0 else -math.inf) - 0.5 * math.log(2.0 * math.pi * theta.sigma2_sq)
    inv1 = 0.5 / theta.sigma1_sq
    inv2 = 0.5 / theta.sigma2_sq
    return b1, b2, inv1, inv2


def shift_log_likelihoods(f: ObservationSet, u, theta: NoiseModel) -> np.ndarray:
    """Log-likelihood of each (observation, shift) pair under the mixture.

    Entry [i, l] is sum_j of the log mixture density of the residual
    f[i, j] - (R_l u)[j]; each inner two-component sum is evaluated with
    logaddexp so tiny variances cannot underflow.
    """
    u = as_signal(u, "u")
    if f.n != u.size:
        raise ValueError(f"signal length {u.size} does not match observations ({f.n})")
    b1, b2, inv1, inv2 = mixture_log_constants(theta)
    r2 = residual_tensor(f.data, u) ** 2
    return np.logaddexp(b1 - r2 * inv1, b2 - r2 * inv2).sum(axis=2)


def update_shift_weights(loglik: np.ndarray) -> ShiftWeights:
    """Row-wise soft-max normalization of shift log-likelihoods."""
    loglik = np.asarray(loglik, dtype=np.float64)
    row_max = loglik.max(axis=1)
    if np.any(row_max == -np.inf):
        bad = int(np.argmax(row_max == -np.inf))
        raise DegenerateLikelihoodError(f"observation {bad}: all shifts have zero likelihood")
    shifted = loglik - row_max[:, None]
    expd = np.exp(shifted)
    w = expd / expd.sum(axis=1)[:, None]
    return ShiftWeights(w=w)


def noise_log_odds_constants(theta: NoiseModel):
    """(c0, c1) such that q1 = expit(c0 + c1 * r^2); c0 is +-inf at alpha in {0, 1}."""
    a = theta.alpha
    if a <= 0.0:
        c0 = -math.inf
    elif a >= 1.0:
        c0 = math.inf
    else:
        c0 = math.log(a / (1.0 - a)) + 0.5 * math.log(theta.sigma2_sq / theta.sigma1_sq)
    c1 = 0.5 / theta.sigma2_sq - 0.5 / theta.sigma1_sq
    return c0, c1


def update_noise_responsibilities(f: ObservationSet, u, theta: NoiseModel) -> NoiseResponsibilities:
    """First-component responsibility of every (observation, sample, shift) triple.

    q1 = (alpha/sigma1) exp(-r^2/(2 sigma1^2)) over the two-component total,
    evaluated as the logistic of the log-odds. Index order is [i, j, l].
    """
    u = as_signal(u, "u")
    if f.n != u.size:
        raise ValueError(f"signal length {u.size} does not match observations ({f.n})")
    if theta.alpha <= 0.0:
        return NoiseResponsibilities(q1=np.zeros((f.m, f.n, f.n)))
    if theta.alpha >= 1.0:
        return NoiseResponsibilities(q1=np.ones((f.m, f.n, f.n)))
    c0, c1 = noise_log_odds_constants(theta)
    r2 = residual_tensor(f.data, u) ** 2
    q1 = expit(c0 + c1 * r2)
    return NoiseResponsibilities(q1=q1.transpose(0, 2, 1))
