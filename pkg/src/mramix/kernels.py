"""Fused streaming passes used by the solver at large M.

The responsibility tensor has M*N^2 entries (~1e8 doubles at N=101, M=1e4), so
the solver never materializes it: each outer iteration makes two passes over
the observations that compute posteriors and accumulate every M-step sum on
the fly. Two interchangeable backends implement the passes:

* sequential numba kernels (default): fixed (i outer, l middle, j inner)
  summation order with Kahan-compensated accumulators; shift weights below
  1e-18 are skipped, which perturbs the sums below double precision;
* a batched numpy implementation (``MRAMIX_NO_NUMBA=1`` or numba missing),
  exact per-batch with math.fsum merging.

Both agree with the materialized estep/mstep path to ~1e-14 relative; tests
pin that. The single-Gaussian path has closed correlation structure and is
computed with FFTs instead (see ``single_posterior_pass``).
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import expit

from .core import NoiseModel
from .estep import mixture_log_constants, noise_log_odds_constants, shift_table

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(fn):
            return fn

        return wrap


WEIGHT_PRUNE = 1e-18
_BATCH = 256


def numba_enabled() -> bool:
    return _HAVE_NUMBA and os.environ.get("MRAMIX_NO_NUMBA", "") != "1"


@njit(cache=True)
def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == -np.inf:
        return a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def _expit(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True)
def _posterior_pass_nb(data, u, b1, b2, inv1, inv2, c0, c1, s1sq, s2sq, w_out, s1_out, s2_out):
    m, n = data.shape
    loglik = np.empty(n)
    r2row = np.empty((n, n))
    s1c = np.zeros(n)
    s2c = np.zeros(n)
    lse_sum = 0.0
    lse_comp = 0.0
    for i in range(m):
        for l in range(n):
            acc = 0.0
            acc_c = 0.0
            for j in range(n):
                jm = j - l
                if jm < 0:
                    jm += n
                r = data[i, j] - u[jm]
                t = r * r
                r2row[l, j] = t
                v = _logaddexp(b1 - t * inv1, b2 - t * inv2)
                y = v - acc_c
                s = acc + y
                acc_c = (s - acc) - y
                acc = s
            loglik[l] = acc
        mx = loglik[0]
        for l in range(1, n):
            if loglik[l] > mx:
                mx = loglik[l]
        ssum = 0.0
        for l in range(n):
            ssum += math.exp(loglik[l] - mx)
        lse = mx + math.log(ssum)
        y = lse - lse_comp
        s = lse_sum + y
        lse_comp = (s - lse_sum) - y
        lse_sum = s
        for l in range(n):
            wil = math.exp(loglik[l] - lse)
            w_out[i, l] = wil
            if wil < WEIGHT_PRUNE:
                continue
            for j in range(n):
                q = _expit(c0 + c1 * r2row[l, j])
                bracket = s1sq + q * (s2sq - s1sq)
                o = j - l
                if o < 0:
                    o += n
                v1 = wil * bracket * data[i, j]
                y = v1 - s1c[o]
                s = s1_out[o] + y
                s1c[o] = (s - s1_out[o]) - y
                s1_out[o] = s
                v2 = wil * bracket
                y = v2 - s2c[o]
                s = s2_out[o] + y
                s2c[o] = (s - s2_out[o]) - y
                s2_out[o] = s
    return lse_sum


@njit(cache=True)
def _moments_pass_nb(data, u_old, u_new, c0, c1, w):
    m, n = data.shape
    mass1 = 0.0
    mass2 = 0.0
    num1 = 0.0
    num2 = 0.0
    c_m1 = 0.0
    c_m2 = 0.0
    c_n1 = 0.0
    c_n2 = 0.0
    for i in range(m):
        for l in range(n):
            wil = w[i, l]
            if wil < WEIGHT_PRUNE:
                continue
            for j in range(n):
                jm = j - l
                if jm < 0:
                    jm += n
                r_old = data[i, j] - u_old[jm]
                q = _expit(c0 + c1 * r_old * r_old)
                r_new = data[i, j] - u_new[jm]
                t = r_new * r_new
                v = wil * q
                y = v - c_m1
                s = mass1 + y
                c_m1 = (s - mass1) - y
                mass1 = s
                v = wil * (1.0 - q)
                y = v - c_m2
                s = mass2 + y
                c_m2 = (s - mass2) - y
                mass2 = s
                v = wil * t * q
                y = v - c_n1
                s = num1 + y
                c_n1 = (s - num1) - y
                num1 = s
                v = wil * t * (1.0 - q)
                y = v - c_n2
                s = num2 + y
                c_n2 = (s - num2) - y
                num2 = s
    return mass1, mass2, num1, num2


def _posterior_pass_np(data, u, b1, b2, inv1, inv2, c0, c1, s1sq, s2sq):
    m, n = data.shape
    table = shift_table(u)
    gather = (np.arange(n)[None, :] + np.arange(n)[:, None]) % n
    w = np.empty((m, n))
    s1 = np.zeros(n)
    s2 = np.zeros(n)
    lse_parts = []
    s1_parts = []
    s2_parts = []
    for start in range(0, m, _BATCH):
        rows = slice(start, min(start + _BATCH, m))
        r2 = (data[rows, None, :] - table[None, :, :]) ** 2
        loglik = np.logaddexp(b1 - r2 * inv1, b2 - r2 * inv2).sum(axis=2)
        row_max = loglik.max(axis=1)
        lse = row_max + np.log(np.exp(loglik - row_max[:, None]).sum(axis=1))
        wb = np.exp(loglik - lse[:, None])
        w[rows] = wb
        lse_parts.append(float(lse.sum()))
        q1 = expit(c0 + c1 * r2)
        bracket = s1sq + q1 * (s2sq - s1sq)
        wbr = wb[:, :, None] * bracket
        t2 = wbr.sum(axis=0)
        t1 = (wbr * data[rows][:, None, :]).sum(axis=0)
        s1_parts.append(np.take_along_axis(t1, gather, axis=1).sum(axis=0))
        s2_parts.append(np.take_along_axis(t2, gather, axis=1).sum(axis=0))
    for part in s1_parts:
        s1 += part
    for part in s2_parts:
        s2 += part
    return w, math.fsum(lse_parts), s1, s2


def _moments_pass_np(data, u_old, u_new, c0, c1, w):
    m, n = data.shape
    table_old = shift_table(u_old)
    table_new = shift_table(u_new)
    parts = ([], [], [], [])
    for start in range(0, m, _BATCH):
        rows = slice(start, min(start + _BATCH, m))
        r2_old = (data[rows, None, :] - table_old[None, :, :]) ** 2
        q1 = expit(c0 + c1 * r2_old)
        r2_new = (data[rows, None, :] - table_new[None, :, :]) ** 2
        wb = w[rows][:, :, None]
        parts[0].append(float(np.sum(wb * q1)))
        parts[1].append(float(np.sum(wb * (1.0 - q1))))
        parts[2].append(float(np.sum(wb * r2_new * q1)))
        parts[3].append(float(np.sum(wb * r2_new * (1.0 - q1))))
    return tuple(math.fsum(p) for p in parts)


def mixture_posterior_pass(data: np.ndarray, u: np.ndarray, theta: NoiseModel):
    """Shift posteriors at (u, theta) plus fused downstream sums.

    Returns ``(w, loglik_lse_sum, s1, s2)``: the M x N posterior matrix, the
    summed per-observation log-marginals (for the energy trace), and the
    consensus-update sums S1/S2 evaluated with the responsibilities at the
    same (u, theta).
    """
    b1, b2, inv1, inv2 = mixture_log_constants(theta)
    c0, c1 = noise_log_odds_constants(theta)
    if numba_enabled():
        m, n = data.shape
        w = np.empty((m, n))
        s1 = np.zeros(n)
        s2 = np.zeros(n)
        lse_sum = _posterior_pass_nb(
            data, u, b1, b2, inv1, inv2, c0, c1, theta.sigma1_sq, theta.sigma2_sq, w, s1, s2
        )
        return w, float(lse_sum), s1, s2
    return _posterior_pass_np(data, u, b1, b2, inv1, inv2, c0, c1, theta.sigma1_sq, theta.sigma2_sq)


def mixture_moments_pass(data: np.ndarray, u_old: np.ndarray, u_new: np.ndarray, theta_old: NoiseModel, w: np.ndarray):
    """Streaming M-step moments: responsibility masses and weighted residual sums.

    Responsibilities are re-derived at (u_old, theta_old); the squared
    residuals use u_new, matching the update ordering of the outer loop.
    Returns ``(mass1, mass2, num1, num2)``.
    """
    c0, c1 = noise_log_odds_constants(theta_old)
    if numba_enabled():
        out = _moments_pass_nb(data, u_old, u_new, c0, c1, w)
        return tuple(float(v) for v in out)
    return _moments_pass_np(data, u_old, u_new, c0, c1, w)


def circular_correlations(data_rfft: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    """c[i, l] = sum_j data[i, j] * x[(j - l) mod n] for all rows and shifts."""
    xf = np.fft.rfft(x, n)
    return np.fft.irfft(np.conj(xf)[None, :] * data_rfft, n, axis=1)


def single_posterior_pass(data: np.ndarray, data_rfft: np.ndarray, fnorm2: np.ndarray, u: np.ndarray, sigma_sq: float):
    """Single-Gaussian analogue of :func:`mixture_posterior_pass`, via FFT.

    The per-shift log-likelihood reduces to a cross-correlation, so the whole
    pass is O(M N log N). Returns ``(w, loglik_lse_sum, s1, s2)`` with the
    same meaning as the mixture pass (responsibilities identically 1).
    """
    m, n = data.shape
    corr = circular_correlations(data_rfft, u, n)
    sq = fnorm2[:, None] - 2.0 * corr + float(u @ u)
    loglik = -0.5 * n * math.log(2.0 * math.pi * sigma_sq) - sq / (2.0 * sigma_sq)
    row_max = loglik.max(axis=1)
    lse = row_max + np.log(np.exp(loglik - row_max[:, None]).sum(axis=1))
    w = np.exp(loglik - lse[:, None])
    # S1[j] = sigma^2 * sum_{i,l} w[i,l] f[i,(j+l)%n]; same correlation form.
    wf = np.fft.rfft(w, n, axis=1)
    s1 = sigma_sq * np.fft.irfft(np.conj(wf) * data_rfft, n, axis=1).sum(axis=0)
    s2 = np.full(n, sigma_sq * float(w.sum()))
    return w, float(lse.sum()), s1, s2


def single_residual_sum(data_rfft: np.ndarray, fnorm2: np.ndarray, w: np.ndarray, u_new: np.ndarray, n: int) -> float:
    """sum_{i,l} w[i,l] * ||f_i - R_l u_new||^2 via the correlation identity."""
    corr = circular_correlations(data_rfft, u_new, n)
    return float(fnorm2.sum()) - 2.0 * float(np.sum(w * corr)) + float(w.sum()) * float(u_new @ u_new)
