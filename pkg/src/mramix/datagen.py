"""Seeded generation of ground-truth signals and shifted noisy observation sets.

The observation model: each row is a uniformly random cyclic shift of the true
signal plus per-sample noise drawn from a two-component zero-mean Gaussian
mixture. Randomness comes from counter-based Philox generators keyed as
(seed, stream) so that the shift, component, and noise streams are independent:
growing M extends each stream without disturbing its prefix, and every draw is
reproducible cross-platform from the 64-bit seed alone.

Stream ids: shifts=0, components=1, noise=2, signal=3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import NoiseModel, as_signal, circular_shift

STREAM_SHIFTS = 0
STREAM_COMPONENTS = 1
STREAM_NOISE = 2
STREAM_SIGNAL = 3

_FORMAT_TAG = "mramix observations v1"


def substream(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for (seed, stream), Philox counter-based."""
    key = np.array([np.uint64(int(seed) % (1 << 64)), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class GenSpec:
    """Observation-set recipe: count, mixture parameters, and seed."""

    m: int
    noise: NoiseModel
    seed: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")


@dataclass
class ObservationSet:
    """M x N matrix of noisy shifted copies plus generation metadata.

    ``true_shifts`` (length M, values in {0..N-1}) and ``true_components``
    (M x N, values in {1, 2}) are present for synthetic data and absent for
    data loaded from files that omit them.
    """

    data: np.ndarray
    seed: int
    true_shifts: Optional[np.ndarray] = None
    true_components: Optional[np.ndarray] = None
    noise: Optional[NoiseModel] = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError(f"data must be M x N, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("observation data must be finite")
        if self.true_shifts is not None:
            self.true_shifts = np.asarray(self.true_shifts, dtype=np.int64)
            if self.true_shifts.shape != (self.m,):
                raise ValueError("true_shifts must have length M")
            if np.any((self.true_shifts < 0) | (self.true_shifts >= self.n)):
                raise ValueError("true_shifts entries must lie in {0..N-1}")
        if self.true_components is not None:
            self.true_components = np.asarray(self.true_components, dtype=np.int8)
            if self.true_components.shape != self.data.shape:
                raise ValueError("true_components must match data shape")
            if not np.all((self.true_components == 1) | (self.true_components == 2)):
                raise ValueError("true_components entries must be 1 or 2")

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


def make_random_signal(n: int, seed: int) -> np.ndarray:
    """n i.i.d. standard-normal samples, deterministic per (n, seed)."""
    if n < 2:
        raise ValueError(f"signal length must be >= 2, got {n}")
    return substream(seed, STREAM_SIGNAL).standard_normal(n)


def make_piecewise_signal(n: int) -> np.ndarray:
    """Step signal: entries at 1-based positions 30..60 equal 1, others 0."""
    if n < 60:
        raise ValueError(f"piecewise signal needs length >= 60, got {n}")
    u = np.zeros(n)
    u[29:60] = 1.0
    return u


def noise_field(seed: int, m: int, n: int, noise: NoiseModel, components: np.ndarray) -> np.ndarray:
    """Re-derive the additive noise matrix from the seeded noise stream.

    Draws the M x N standard-normal field from stream (seed, noise) and scales
    each sample by the standard deviation of its recorded component, exactly
    reproducing the values used by :func:`generate_observations`.
    """
    z = substream(seed, STREAM_NOISE).standard_normal((m, n))
    sigma = np.where(components == 1, np.sqrt(noise.sigma1_sq), np.sqrt(noise.sigma2_sq))
    return z * sigma


def generate_observations(u, spec: GenSpec) -> ObservationSet:
    """Draw M observations: R_{l_i} u plus per-sample mixture noise.

    Per observation i: l_i uniform on {0..N-1}; per sample j: component 1
    with probability alpha, else component 2, then zero-mean Gaussian noise
    with that component's variance. Fully deterministic per (u, spec).
    """
    u = as_signal(u, "u")
    m, n = spec.m, u.size
    shifts = substream(spec.seed, STREAM_SHIFTS).integers(0, n, size=m)
    uniforms = substream(spec.seed, STREAM_COMPONENTS).random((m, n))
    components = np.where(uniforms < spec.noise.alpha, np.int8(1), np.int8(2))
    noise = noise_field(spec.seed, m, n, spec.noise, components)
    data = np.empty((m, n))
    for i in range(m):
        data[i] = circular_shift(u, int(shifts[i])) + noise[i]
    return ObservationSet(
        data=data,
        seed=spec.seed,
        true_shifts=shifts.astype(np.int64),
        true_components=components,
        noise=spec.noise,
    )


def save_observations(path, obs: ObservationSet) -> None:
    """Write an observation set as documented CSV.

    Line 1: ``# mramix observations v1``. Line 2: ``# key=value`` metadata
    (m, n, seed, optional alpha/sigma1_sq/sigma2_sq, shifts/components flags).
    Then one line per observation: N float samples (shortest round-trip repr),
    then the true shift if present, then N component labels if present.
    """
    has_shifts = obs.true_shifts is not None
    has_comps = obs.true_components is not None
    meta = [f"m={obs.m}", f"n={obs.n}", f"seed={obs.seed}"]
    if obs.noise is not None:
        meta += [
            f"alpha={obs.noise.alpha!r}",
            f"sigma1_sq={obs.noise.sigma1_sq!r}",
            f"sigma2_sq={obs.noise.sigma2_sq!r}",
        ]
    meta += [f"shifts={int(has_shifts)}", f"components={int(has_comps)}"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {_FORMAT_TAG}\n")
        fh.write("# " + " ".join(meta) + "\n")
        for i in range(obs.m):
            cells = [repr(float(v)) for v in obs.data[i]]
            if has_shifts:
                cells.append(str(int(obs.true_shifts[i])))
            if has_comps:
                cells.extend(str(int(c)) for c in obs.true_components[i])
            fh.write(",".join(cells) + "\n")


def load_observations(path) -> ObservationSet:
    """Inverse of :func:`save_observations`; round-trips bit-exactly."""
    with open(path, "r", encoding="utf-8") as fh:
        tag = fh.readline().strip()
        if tag != f"# {_FORMAT_TAG}":
            raise ValueError(f"not a {_FORMAT_TAG} file: {path}")
        meta_line = fh.readline().strip()
        if not meta_line.startswith("# "):
            raise ValueError("missing metadata line")
        meta = dict(item.split("=", 1) for item in meta_line[2:].split())
        m, n, seed = int(meta["m"]), int(meta["n"]), int(meta["seed"])
        noise = None
        if "alpha" in meta:
            noise = NoiseModel(
                alpha=float(meta["alpha"]),
                sigma1_sq=float(meta["sigma1_sq"]),
                sigma2_sq=float(meta["sigma2_sq"]),
            )
        has_shifts = meta.get("shifts") == "1"
        has_comps = meta.get("components") == "1"
        data = np.empty((m, n))
        shifts = np.empty(m, dtype=np.int64) if has_shifts else None
        comps = np.empty((m, n), dtype=np.int8) if has_comps else None
        for i in range(m):
            cells = fh.readline().strip().split(",")
            expected = n + int(has_shifts) + (n if has_comps else 0)
            if len(cells) != expected:
                raise ValueError(f"row {i}: expected {expected} cells, got {len(cells)}")
            data[i] = [float(c) for c in cells[:n]]
            pos = n
            if has_shifts:
                shifts[i] = int(cells[pos])
                pos += 1
            if has_comps:
                comps[i] = [int(c) for c in cells[pos:]]
    return ObservationSet(data=data, seed=seed, true_shifts=shifts, true_components=comps, noise=noise)
