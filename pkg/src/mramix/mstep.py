"""M-step machinery: noise-parameter updates and the ADMM signal update.

The signal subproblem splits into an exact 1-D total-variation proximal step
(taut-string algorithm, wrapped for the circular topology by root-finding on
the wrap-edge dual), a per-component closed-form update of the consensus
variable, and a dual ascent step. All (i, l, j) reductions run in a fixed
order (i outer, l middle, j inner) so results are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DegenerateComponentError, NoiseModel, NumericalDivergenceError, as_signal
from .datagen import ObservationSet
from .estep import NoiseResponsibilities, ShiftWeights, residual_tensor

try:
    from numba import njit as _njit

    def _jit(fn):
        return _njit(cache=True)(fn)

except ImportError:  # pragma: no cover - numba is a declared dependency
    def _jit(fn):
        return fn

SIGMA_FLOOR = 1e-12


def update_alpha(w: ShiftWeights, q: NoiseResponsibilities) -> float:
    """Mixing-ratio update: weighted mean responsibility mass, in [0, 1]."""
    per_il = q.q1.sum(axis=1)  # q1 is [i, j, l]; collapse samples
    m, n = w.w.shape
    val = float(np.sum(w.w * per_il)) / (m * n)
    return min(max(val, 0.0), 1.0)


def update_sigma(
    f: ObservationSet,
    u,
    w: ShiftWeights,
    q: NoiseResponsibilities,
    mode: str = "em-standard",
    frozen: Optional[tuple[float, float]] = None,
) -> tuple[float, float]:
    """Variance updates for both components.

    numerator_k = sum_{i,l} w[i,l] sum_j r^2 * q_k with r the residual at the
    current signal. ``em-standard`` divides by each component's responsibility
    mass (the exact minimizer of the joint objective); ``total-count`` divides
    both numerators by the total sample count M*N. A floor of 1e-12 keeps the
    variances positive.

    A component with zero responsibility mass has a 0/0 update; it is held at
    the corresponding ``frozen`` value when one is supplied, and raises
    :class:`DegenerateComponentError` otherwise.
    """
    if mode not in ("em-standard", "total-count"):
        raise ValueError(f"unknown sigma mode {mode!r}")
    u = as_signal(u, "u")
    r2 = residual_tensor(f.data, u) ** 2  # (i, l, j)
    q1 = q.q1.transpose(0, 2, 1)
    wr = w.w[:, :, None]
    num = (float(np.sum(wr * r2 * q1)), float(np.sum(wr * r2 * (1.0 - q1))))
    if mode == "total-count":
        den = (float(f.m * f.n), float(f.m * f.n))
    else:
        den = (float(np.sum(wr * q1)), float(np.sum(wr * (1.0 - q1))))
    out = []
    for k in range(2):
        if den[k] == 0.0:
            if frozen is None:
                raise DegenerateComponentError(f"component {k + 1} has zero responsibility mass")
            out.append(max(frozen[k], SIGMA_FLOOR))
        else:
            out.append(max(num[k] / den[k], SIGMA_FLOOR))
    return out[0], out[1]


def total_variation(u, topology: str = "circular") -> float:
    """Sum of absolute adjacent differences, including the wrap-around pair."""
    arr = np.asarray(u, dtype=np.float64)
    tv = float(np.abs(np.diff(arr)).sum())
    if topology == "circular":
        tv += abs(float(arr[0]) - float(arr[-1]))
    elif topology != "linear":
        raise ValueError(f"unknown topology {topology!r}")
    return tv


def _taut_string(y, lam, x):
    """Exact prox of weight*TV on a chain: min 0.5||x-y||^2 + lam*sum|x_{t+1}-x_t|.

    Left-to-right taut-string walk through the tube of half-width lam around
    the running sums, pinned at both ends. mn/mx are the segment values if the
    string next touches the lower/upper tube face; the height variables track
    the accumulated deviation of those candidate segments from the tube
    center.
    """
    n = y.shape[0]
    i = 0
    mn_height = 0.0
    mx_height = 0.0
    mn = y[0] - lam
    mx = y[0] + lam
    last_break = -1
    mn_break = 0
    mx_break = 0
    while i < n:
        while i < n - 1:
            mn_height += mn - y[i]
            if lam < mn_height:
                # lower string left the tube: freeze a segment at value mn
                i = mn_break + 1
                for t in range(last_break + 1, mn_break + 1):
                    x[t] = mn
                last_break = mn_break
                mn = y[i]
                mx = mn + 2.0 * lam
                mx_height = lam
                mn_height = -lam
                mn_break = i
                mx_break = i
                i += 1
                continue
            mx_height += mx - y[i]
            if -lam > mx_height:
                i = mx_break + 1
                for t in range(last_break + 1, mx_break + 1):
                    x[t] = mx
                last_break = mx_break
                mx = y[i]
                mn = mx - 2.0 * lam
                # new anchor on the upper face: mn heads to the lower face
                # (deviation -lam), mx hugs the upper face (deviation +lam)
                mn_height = -lam
                mx_height = lam
                mn_break = i
                mx_break = i
                i += 1
                continue
            if mx_height > lam:
                # clip the upper candidate against the tube ceiling
                mx += (lam - mx_height) / (i - last_break)
                mx_height = lam
                mx_break = i
            if mn_height <= -lam:
                mn += (-lam - mn_height) / (i - last_break)
                mn_height = -lam
                mn_break = i
            i += 1
        # last sample: the tube pinches to the pinned endpoint (half-width 0)
        mn_height += mn - y[i]
        if mn_height > 0.0:
            i = mn_break + 1
            for t in range(last_break + 1, mn_break + 1):
                x[t] = mn
            last_break = mn_break
            mn = y[i]
            mx = mn + 2.0 * lam
            mn_height = -lam
            mx_height = -lam
            mn_break = i
            mx_break = i
            continue
        mx_height += mx - y[i]
        if mx_height < 0.0:
            i = mx_break + 1
            for t in range(last_break + 1, mx_break + 1):
                x[t] = mx
            last_break = mx_break
            mx = y[i]
            mn = mx - 2.0 * lam
            mn_height = lam
            mx_height = lam
            mn_break = i
            mx_break = i
            continue
        if mn_height <= 0.0:
            mn += (-mn_height) / (i - last_break)
        i += 1
    for t in range(last_break + 1, n):
        x[t] = mn
    return x


_taut_string_jit = _jit(_taut_string)


def _tv_prox_linear(v: np.ndarray, weight: float) -> np.ndarray:
    out = np.empty_like(v)
    _taut_string_jit(v, weight, out)
    return out


def _tv_prox_circular(v: np.ndarray, weight: float) -> np.ndarray:
    # Wrap-edge dual z in [-weight, weight]: tilting the endpoints by -+z and
    # solving the chain prox gives u(z); the circular solution is u(z*) where
    # h(z) = u_0(z) - u_{N-1}(z) crosses zero (h is non-increasing), or at the
    # nearest interval endpoint when h does not change sign.
    def chain(z: float) -> np.ndarray:
        tilted = v.copy()
        tilted[0] -= z
        tilted[-1] += z
        return _tv_prox_linear(tilted, weight)

    lo, hi = -weight, weight
    u_lo = chain(lo)
    if u_lo[0] - u_lo[-1] <= 0.0:
        return u_lo
    u_hi = chain(hi)
    if u_hi[0] - u_hi[-1] >= 0.0:
        return u_hi
    u = u_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        u = chain(mid)
        h = u[0] - u[-1]
        if h > 0.0:
            lo = mid
        elif h < 0.0:
            hi = mid
        else:
            return u
    return u


def tv_prox_1d(v, weight: float, topology: str = "circular") -> np.ndarray:
    """Exact minimizer of 0.5*||u - v||^2 + weight * TV(u).

    ``topology`` selects whether the difference sum wraps around. weight=0
    returns a copy of the input.
    """
    arr = np.ascontiguousarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("tv_prox_1d expects a non-empty 1-D vector")
    if not (weight >= 0.0 and math.isfinite(weight)):
        raise ValueError(f"weight must be finite and >= 0, got {weight}")
    if topology not in ("circular", "linear"):
        raise ValueError(f"unknown topology {topology!r}")
    if weight == 0.0 or arr.size == 1:
        return arr.copy()
    if topology == "linear":
        return _tv_prox_linear(arr, weight)
    return _tv_prox_circular(arr, weight)


def data_term_sums(
    f: ObservationSet, w: ShiftWeights, q: NoiseResponsibilities, theta: NoiseModel
) -> tuple[np.ndarray, np.ndarray]:
    """Variance-bracket sums (S1, S2) of the consensus update, materialized mode.

    S1[j] = sum_{i,l} w[i,l] * B[i,j',l] * f[i,j'] and S2[j] likewise without
    the data factor, where j' = (j + l) mod N is the un-shifted sample index
    and B = q1*sigma2^2 + (1-q1)*sigma1^2. These do not change during the
    inner ADMM loop.
    """
    n = f.n
    q1 = q.q1.transpose(0, 2, 1)  # (i, l, j)
    bracket = theta.sigma1_sq + q1 * (theta.sigma2_sq - theta.sigma1_sq)
    wb = w.w[:, :, None] * bracket
    t2 = wb.sum(axis=0)  # (l, j)
    t1 = (wb * f.data[:, None, :]).sum(axis=0)
    gather = (np.arange(n)[None, :] + np.arange(n)[:, None]) % n  # [l, j] -> (j+l)%n
    s1 = np.take_along_axis(t1, gather, axis=1).sum(axis=0)
    s2 = np.take_along_axis(t2, gather, axis=1).sum(axis=0)
    return s1, s2


def consensus_update(s1, s2, theta: NoiseModel, u, p, r: float) -> np.ndarray:
    """Closed-form minimizer of the quadratic consensus subproblem."""
    sig_prod = theta.sigma1_sq * theta.sigma2_sq
    return (s1 + sig_prod * (r * u + p)) / (s2 + r * sig_prod)


def solve_d_subproblem(
    f: ObservationSet,
    w: ShiftWeights,
    q: NoiseResponsibilities,
    theta: NoiseModel,
    u,
    p,
    r: float,
) -> np.ndarray:
    """Per-component closed form for the consensus variable d.

    The denominator is strictly positive since r and both variances are, and
    the returned vector is the stationary point of the quadratic subproblem.
    """
    if not r > 0.0:
        raise ValueError(f"penalty r must be > 0, got {r}")
    u = as_signal(u, "u")
    p = as_signal(p, "p")
    s1, s2 = data_term_sums(f, w, q, theta)
    return consensus_update(s1, s2, theta, u, p, r)


def signal_objective(
    f: ObservationSet,
    w: ShiftWeights,
    q: NoiseResponsibilities,
    theta: NoiseModel,
    u,
    gamma: float,
) -> float:
    """Weighted quadratic data term plus gamma * circular TV, for descent checks."""
    u = as_signal(u, "u")
    r2 = residual_tensor(f.data, u) ** 2
    q1 = q.q1.transpose(0, 2, 1)
    rho = q1 / (2.0 * theta.sigma1_sq) + (1.0 - q1) / (2.0 * theta.sigma2_sq)
    data = float(np.sum(w.w[:, :, None] * r2 * rho))
    return data + gamma * total_variation(u, "circular")


@dataclass(frozen=True)
class AdmmParams:
    """Inner-loop knobs: penalty r, dual step tau in (0, 2r), TV weight gamma."""

    r: float = 1.0
    tau: Optional[float] = None
    gamma: float = 0.0
    max_inner: int = 500
    inner_tol: float = 1e-6
    dual_update: str = "post"

    def __post_init__(self):
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise ValueError(f"r must be positive and finite, got {self.r}")
        if self.tau is None:
            object.__setattr__(self, "tau", self.r)
        if not (0.0 < self.tau < 2.0 * self.r):
            raise ValueError(f"tau must lie in (0, 2r), got tau={self.tau}, r={self.r}")
        if not (self.gamma >= 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")
        if self.max_inner < 1:
            raise ValueError("max_inner must be >= 1")
        if not self.inner_tol > 0.0:
            raise ValueError("inner_tol must be > 0")
        if self.dual_update not in ("post", "pre"):
            raise ValueError(f"dual_update must be 'post' or 'pre', got {self.dual_update!r}")


@dataclass
class AdmmState:
    """Signal iterate u, consensus variable d, and scaled dual p."""

    u: np.ndarray
    d: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.u = as_signal(self.u, "u")
        self.d = as_signal(self.d, "d")
        self.p = np.asarray(self.p, dtype=np.float64)
        if not (self.u.shape == self.d.shape == self.p.shape):
            raise ValueError("u, d, p must share one length")
        if not np.all(np.isfinite(self.p)):
            raise ValueError("p must be finite")


def admm_inner_loop(
    s1: np.ndarray,
    s2: np.ndarray,
    theta: NoiseModel,
    state0: AdmmState,
    params: AdmmParams,
) -> tuple[AdmmState, int]:
    """Alternate TV prox / consensus closed form / dual ascent until the
    relative change of u and the scaled primal residual both drop below
    inner_tol, or max_inner is reached.

    The data term is a diagonal quadratic in the signal (curvature
    s2/(sigma1^2 sigma2^2), minimizer s1/s2), so the subproblem objective is
    evaluated in O(N) per sweep and the best-scoring iterate is what gets
    returned: a truncated inner loop can then never hand back a worse signal
    than its warm start. Returns that state and the iteration count."""
    r, tau, gamma = params.r, params.tau, params.gamma
    u, d, p = state0.u.copy(), state0.d.copy(), state0.p.copy()
    prox_weight = gamma / r
    sig_prod = theta.sigma1_sq * theta.sigma2_sq
    curvature = s2 / sig_prod
    center = s1 / s2

    def sub_objective(vec: np.ndarray) -> float:
        diff = vec - center
        val = 0.5 * float(curvature @ (diff * diff))
        if gamma > 0.0:
            val += gamma * total_variation(vec, "circular")
        return val

    best_obj = sub_objective(u)
    best = (u.copy(), d.copy(), p.copy())
    it = 0
    for it in range(1, params.max_inner + 1):
        u_prev, d_prev = u, d
        v = d - p / r
        u = tv_prox_1d(v, prox_weight, "circular") if prox_weight > 0.0 else v
        d = consensus_update(s1, s2, theta, u, p, r)
        if params.dual_update == "post":
            p = p + tau * (u - d)
        else:
            p = p + tau * (u_prev - d_prev)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(d)) and np.all(np.isfinite(p))):
            raise NumericalDivergenceError(f"non-finite ADMM iterate at inner step {it}", it)
        obj = sub_objective(u)
        if obj < best_obj:
            best_obj = obj
            best = (u.copy(), d.copy(), p.copy())
        u_norm = float(np.linalg.norm(u_prev))
        rel = float(np.linalg.norm(u - u_prev)) / max(u_norm, 1e-300)
        primal = float(np.linalg.norm(u - d)) / max(1.0, float(np.linalg.norm(u)))
        if rel < params.inner_tol and primal < params.inner_tol:
            break
    return AdmmState(u=best[0], d=best[1], p=best[2]), it


def admm_signal_update(
    f: ObservationSet,
    w: ShiftWeights,
    q: NoiseResponsibilities,
    theta: NoiseModel,
    state0: AdmmState,
    params: AdmmParams,
) -> tuple[AdmmState, int]:
    """Signal update for fixed weights: run the splitting scheme to tolerance."""
    s1, s2 = data_term_sums(f, w, q, theta)
    return admm_inner_loop(s1, s2, theta, state0, params)
