"""Shift-gauge-invariant recovery error.

Solutions of the alignment problem are defined only up to a cyclic shift, so
estimates are scored by the smallest relative l2 distance over all N
rotations. Candidate shifts are ranked by FFT cross-correlation and the
winners re-scored in direct arithmetic, with ties broken by the smallest
canonical shift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_signal, circular_shift


@dataclass(frozen=True)
class AlignmentResult:
    """Best cyclic alignment of an estimate against the truth."""

    shift: int
    aligned: np.ndarray
    error: float


def _direct_sq_errors(estimate: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """||R_l estimate - truth||^2 for every l, by explicit rolling."""
    n = estimate.size
    out = np.empty(n)
    for l in range(n):
        diff = np.roll(estimate, l) - truth
        out[l] = float(diff @ diff)
    return out


def _fft_sq_errors(estimate: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Same errors via the correlation identity; used to rank candidates."""
    n = estimate.size
    # <R_l e, t> = sum_j t_j e_{(j-l)%n} = irfft(conj(E) * T)[l]
    corr = np.fft.irfft(np.conj(np.fft.rfft(estimate, n)) * np.fft.rfft(truth, n), n)
    return float(estimate @ estimate) + float(truth @ truth) - 2.0 * corr


def best_cyclic_alignment(estimate, truth) -> AlignmentResult:
    """Minimize ||R_l estimate - truth|| over all cyclic shifts l.

    FFT scores shortlist the near-optimal shifts; each shortlisted candidate
    is re-evaluated exactly and the smallest l wins ties.
    """
    estimate = as_signal(estimate, "estimate")
    truth = as_signal(truth, "truth")
    if estimate.size != truth.size:
        raise ValueError("estimate and truth must have equal length")
    tnorm = float(np.linalg.norm(truth))
    if tnorm == 0.0:
        raise ValueError("truth must have nonzero norm")
    scores = _fft_sq_errors(estimate, truth)
    margin = 1e-8 * max(1.0, float(np.abs(scores).max()))
    shortlist = np.nonzero(scores <= scores.min() + margin)[0]
    best_l = -1
    best_sq = np.inf
    for l in shortlist:
        diff = np.roll(estimate, int(l)) - truth
        sq = float(diff @ diff)
        if sq < best_sq:
            best_sq = sq
            best_l = int(l)
    aligned = circular_shift(estimate, best_l)
    return AlignmentResult(shift=best_l, aligned=aligned, error=float(np.sqrt(max(best_sq, 0.0)) / tnorm))


def relative_error(estimate, truth) -> float:
    """Shift-minimized ||R_l estimate - truth|| / ||truth||."""
    return best_cyclic_alignment(estimate, truth).error
