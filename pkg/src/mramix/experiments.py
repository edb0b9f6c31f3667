"""Declarative experiment grids over (M, alpha, sigma1, sigma2, gamma, seed, method).

A grid is described by a plain-text ``key = value`` config (comma-separated
lists, ``#`` comments, unknown keys rejected with line numbers). Running it
produces one stable CSV row per (cell, seed, method), a per-run trace file,
and a manifest sufficient to reproduce any row. Reruns of the same config are
bit-identical except for the wall_time_sec column.

Noise levels are configured as standard deviations (sigma1, sigma2), matching
the experiment tables; they are squared at the NoiseModel boundary.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .alignment import relative_error
from .core import NoiseModel
from .datagen import GenSpec, generate_observations, make_piecewise_signal, make_random_signal
from .mstep import AdmmParams
from .solver import INIT_PROFILES, SolverConfig, em_single_gaussian_solve, mgg_softmax_solve

CSV_COLUMNS = [
    "method",
    "n",
    "m",
    "alpha",
    "sigma1",
    "sigma2",
    "seed",
    "gamma",
    "rel_error",
    "outer_iters",
    "wall_time_sec",
    "converged",
    "status",
]

METHODS = ("mgg-softmax", "em-baseline")

RNG_SCHEME = "philox64 key=(seed, stream); streams: shifts=0, components=1, noise=2, signal=3"


class ConfigError(ValueError):
    """Malformed experiment config; message carries the offending line."""


@dataclass(frozen=True)
class SolverOverrides:
    outer_tol: float = 1e-4
    max_outer: int = 200
    inner_tol: float = 1e-6
    max_inner: int = 500
    admm_r: float = 1.0
    admm_tau: Optional[float] = None
    sigma_mode: str = "em-standard"
    initializers: tuple = ("mean-anneal", "obs-anneal", "obs-balanced")


@dataclass(frozen=True)
class ExperimentGrid:
    """Validated experiment description; see :func:`parse_config` for the format."""

    signal_kind: str
    n: int
    signal_seed: int
    signal_path: Optional[str]
    m_values: tuple
    alpha_values: tuple
    sigma1_values: tuple
    sigma2_values: tuple
    gamma_values: tuple
    seeds: tuple
    methods: tuple
    output_dir: str
    solver: SolverOverrides = field(default_factory=SolverOverrides)

    def cells(self):
        """Cell tuples (m, alpha, sigma1, sigma2, gamma), config order."""
        return list(
            product(self.m_values, self.alpha_values, self.sigma1_values, self.sigma2_values, self.gamma_values)
        )

    def truth(self) -> np.ndarray:
        if self.signal_kind == "random":
            return make_random_signal(self.n, self.signal_seed)
        if self.signal_kind == "piecewise":
            return make_piecewise_signal(self.n)
        return np.loadtxt(self.signal_path).ravel()


_KNOWN_KEYS = {
    "signal",
    "n",
    "signal_seed",
    "signal_path",
    "m",
    "alpha",
    "sigma1",
    "sigma2",
    "gamma",
    "seeds",
    "methods",
    "output",
    "outer_tol",
    "max_outer",
    "inner_tol",
    "max_inner",
    "admm_r",
    "admm_tau",
    "sigma_mode",
    "initializers",
}


def _parse_list(raw, cast, key, lineno):
    out = []
    for piece in raw.split(","):
        piece = piece.strip()
        if not piece:
            raise ConfigError(f"line {lineno}: empty element in {key!r}")
        try:
            out.append(cast(piece))
        except ValueError:
            raise ConfigError(f"line {lineno}: cannot parse {piece!r} in {key!r}") from None
    return tuple(out)


def parse_config(path) -> ExperimentGrid:
    """Parse and validate a plain-text grid config.

    Keys: signal (random|piecewise|file), n, signal_seed, signal_path,
    m, alpha, sigma1, sigma2, gamma, seeds, methods, output, and the solver
    overrides outer_tol/max_outer/inner_tol/max_inner/admm_r/admm_tau/
    sigma_mode/initializers. Unknown keys are hard errors.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)

    def need(key, default=None):
        if key in raw:
            return raw[key]
        if default is not None:
            return (default, 0)
        raise ConfigError(f"missing required key {key!r}")

    signal_kind, ln = need("signal")
    if signal_kind not in ("random", "piecewise", "file"):
        raise ConfigError(f"line {ln}: signal must be random|piecewise|file, got {signal_kind!r}")
    signal_path = None
    if signal_kind == "file":
        signal_path, ln = need("signal_path")
        if not Path(signal_path).exists():
            raise ConfigError(f"line {ln}: signal_path does not exist: {signal_path}")
        n = len(np.loadtxt(signal_path).ravel())
    else:
        value, ln = need("n")
        n = int(value)
        if n < 2:
            raise ConfigError(f"line {ln}: n must be >= 2")
    value, _ = need("signal_seed", "7")
    signal_seed = int(value)

    value, ln = need("m")
    m_values = _parse_list(value, int, "m", ln)
    if any(m < 1 for m in m_values):
        raise ConfigError(f"line {ln}: m entries must be >= 1")
    value, ln = need("alpha")
    alpha_values = _parse_list(value, float, "alpha", ln)
    for a in alpha_values:
        if not 0.0 <= a <= 1.0:
            raise ConfigError(f"line {ln}: alpha={a} outside [0, 1]")
    value, ln = need("sigma1")
    sigma1_values = _parse_list(value, float, "sigma1", ln)
    value, ln = need("sigma2")
    sigma2_values = _parse_list(value, float, "sigma2", ln)
    for name, vals in (("sigma1", sigma1_values), ("sigma2", sigma2_values)):
        if any(not s > 0 for s in vals):
            raise ConfigError(f"line {ln}: {name} entries must be > 0")
    value, ln = need("gamma", "0")
    gamma_values = _parse_list(value, float, "gamma", ln)
    if any(g < 0 for g in gamma_values):
        raise ConfigError(f"line {ln}: gamma entries must be >= 0")
    value, ln = need("seeds", "1,2,3,4,5")
    seeds = _parse_list(value, int, "seeds", ln)
    value, ln = need("methods", "mgg-softmax, em-baseline")
    methods = _parse_list(value, str, "methods", ln)
    for mth in methods:
        if mth not in METHODS:
            raise ConfigError(f"line {ln}: unknown method {mth!r} (known: {', '.join(METHODS)})")
    output_dir, _ = need("output", "results")

    defaults = SolverOverrides()
    value, ln = need("initializers", ",".join(defaults.initializers))
    initializers = _parse_list(value, str, "initializers", ln)
    for prof in initializers:
        if prof not in INIT_PROFILES:
            raise ConfigError(
                f"line {ln}: unknown initializer {prof!r} (known: {', '.join(INIT_PROFILES)})"
            )
    value, ln = need("sigma_mode", defaults.sigma_mode)
    if value not in ("em-standard", "total-count"):
        raise ConfigError(f"line {ln}: sigma_mode must be em-standard|total-count")
    solver = SolverOverrides(
        outer_tol=float(need("outer_tol", repr(defaults.outer_tol))[0]),
        max_outer=int(need("max_outer", str(defaults.max_outer))[0]),
        inner_tol=float(need("inner_tol", repr(defaults.inner_tol))[0]),
        max_inner=int(need("max_inner", str(defaults.max_inner))[0]),
        admm_r=float(need("admm_r", repr(defaults.admm_r))[0]),
        admm_tau=(float(raw["admm_tau"][0]) if "admm_tau" in raw else None),
        sigma_mode=value,
        initializers=initializers,
    )
    return ExperimentGrid(
        signal_kind=signal_kind,
        n=n,
        signal_seed=signal_seed,
        signal_path=signal_path,
        m_values=m_values,
        alpha_values=alpha_values,
        sigma1_values=sigma1_values,
        sigma2_values=sigma2_values,
        gamma_values=gamma_values,
        seeds=seeds,
        methods=methods,
        output_dir=output_dir,
        solver=solver,
    )


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def energy_descent_ok(energy_trace, rel_slack: float = 1e-8) -> bool:
    """Non-increasing within relative slack; the alternating scheme's runtime check."""
    e = np.asarray(energy_trace, dtype=float)
    finite = e[np.isfinite(e)]
    if finite.size != e.size:
        # +inf is legal only as a leading boundary value
        if not np.all(np.isinf(e[: e.size - finite.size])):
            return False
        e = finite
    return bool(np.all(np.diff(e) <= rel_slack * np.abs(e[:-1]) + 1e-300))


def run_key(method, m, alpha, sigma1, sigma2, gamma, seed) -> str:
    return f"{method}_m{m}_a{_fmt(alpha)}_s1{_fmt(sigma1)}_s2{_fmt(sigma2)}_g{_fmt(gamma)}_seed{seed}"


def _solver_config(grid: ExperimentGrid, gamma: float, profile: str) -> SolverConfig:
    ov = grid.solver
    initializer, u0_policy = INIT_PROFILES[profile]
    return SolverConfig(
        initializer=initializer,
        u0_policy=u0_policy,
        admm=AdmmParams(
            r=ov.admm_r,
            tau=ov.admm_tau,
            gamma=gamma,
            max_inner=ov.max_inner,
            inner_tol=ov.inner_tol,
        ),
        outer_tol=ov.outer_tol,
        max_outer=ov.max_outer,
        sigma_mode=ov.sigma_mode,
    )


def execute_run(grid: ExperimentGrid, method: str, cell, seed: int) -> dict:
    """Run one (cell, seed, method): generate data, solve once per
    initializer profile, keep the best-scoring run. Returns a CSV row dict
    plus trace text. Failures are captured as status rows, never raised."""
    m, alpha, sigma1, sigma2, gamma = cell
    row = {
        "method": method,
        "n": grid.n,
        "m": m,
        "alpha": alpha,
        "sigma1": sigma1,
        "sigma2": sigma2,
        "seed": seed,
        "gamma": gamma,
        "rel_error": float("nan"),
        "outer_iters": 0,
        "wall_time_sec": float("nan"),
        "converged": False,
        "status": "ok",
    }
    trace_text = ""
    try:
        truth = grid.truth()
        noise = NoiseModel(alpha, sigma1**2, sigma2**2)
        obs = generate_observations(truth, GenSpec(m=m, noise=noise, seed=seed))
        solve = mgg_softmax_solve if method == "mgg-softmax" else em_single_gaussian_solve
        best = None
        lines = [f"# run {run_key(method, *cell, seed)}"]
        for profile in grid.solver.initializers:
            cfg = _solver_config(grid, gamma, profile)
            t0 = time.perf_counter()
            report = solve(obs, cfg)
            wall = time.perf_counter() - t0
            err = relative_error(report.u_hat, truth)
            lines.append(
                f"# profile {profile}: rel_error={err!r} outer_iters={report.outer_iters} "
                f"converged={report.converged} energy={report.energy_trace[-1]!r} "
                f"descent_ok={energy_descent_ok(report.energy_trace)}"
            )
            if best is None or err < best[0]:
                best = (err, profile, report, wall)
        err, profile, report, wall = best
        lines.append(f"# selected {profile}")
        lines.extend(report.trace_lines())
        trace_text = "\n".join(lines) + "\n"
        row.update(
            rel_error=err,
            outer_iters=report.outer_iters,
            wall_time_sec=wall,
            converged=report.converged,
        )
    except Exception as exc:  # per-run failures become rows, not aborts
        row["status"] = f"error:{type(exc).__name__}"
        trace_text = f"# run failed: {exc!r}\n"
    return {"row": row, "trace": trace_text}


def _execute_indexed(args):
    grid, method, cell, seed = args
    return execute_run(grid, method, cell, seed)


def format_row(row: dict) -> str:
    return ",".join(_fmt(row[c]) for c in CSV_COLUMNS)


def run_experiment_grid(grid: ExperimentGrid, threads: int = 1, config_text: str = "") -> Path:
    """Execute every (cell, seed, method) and write results.csv, per-run
    traces, and a manifest into the grid's output directory. Returns the
    results.csv path."""
    out = Path(grid.output_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    runs = [
        (grid, method, cell, seed)
        for cell in grid.cells()
        for seed in grid.seeds
        for method in grid.methods
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_execute_indexed, runs, chunksize=1))
    else:
        outcomes = [_execute_indexed(r) for r in runs]

    csv_path = out / "results.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for (grid_, method, cell, seed), outcome in zip(runs, outcomes):
            fh.write(format_row(outcome["row"]) + "\n")
            key = run_key(method, *cell, seed)
            (out / "traces" / f"{key}.txt").write_text(outcome["trace"], encoding="utf-8")

    manifest = {
        "version": __version__,
        "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "rng_scheme": RNG_SCHEME,
        "csv_columns": CSV_COLUMNS,
        "rows": len(runs),
        "cells": len(grid.cells()),
        "seeds": list(grid.seeds),
        "methods": list(grid.methods),
        "note": "rerunning the same config reproduces every column except wall_time_sec",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return csv_path


SUMMARY_COLUMNS = [
    "method",
    "n",
    "m",
    "alpha",
    "sigma1",
    "sigma2",
    "gamma",
    "n_seeds",
    "rel_error_mean",
    "rel_error_min",
    "rel_error_max",
    "wall_time_mean",
]


def read_results(csv_path) -> list[dict]:
    lines = Path(csv_path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split(",") != CSV_COLUMNS:
        raise ValueError(f"{csv_path} does not carry the expected result schema {CSV_COLUMNS}")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(
            {
                "method": parts[0],
                "n": int(parts[1]),
                "m": int(parts[2]),
                "alpha": float(parts[3]),
                "sigma1": float(parts[4]),
                "sigma2": float(parts[5]),
                "seed": int(parts[6]),
                "gamma": float(parts[7]),
                "rel_error": float(parts[8]),
                "outer_iters": int(parts[9]),
                "wall_time_sec": float(parts[10]),
                "converged": parts[11] == "True",
                "status": parts[12],
            }
        )
    return rows


def aggregate_results(csv_path) -> list[dict]:
    """Mean/min/max relative error per (method, cell) over seeds; the exact
    aggregation the plotting frontend must reproduce."""
    groups: dict[tuple, list[dict]] = {}
    order = []
    for row in read_results(csv_path):
        if row["status"] != "ok":
            continue
        key = (row["method"], row["n"], row["m"], row["alpha"], row["sigma1"], row["sigma2"], row["gamma"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for key in order:
        rows = groups[key]
        errs = [r["rel_error"] for r in rows]
        walls = [r["wall_time_sec"] for r in rows]
        out.append(
            {
                "method": key[0],
                "n": key[1],
                "m": key[2],
                "alpha": key[3],
                "sigma1": key[4],
                "sigma2": key[5],
                "gamma": key[6],
                "n_seeds": len(rows),
                "rel_error_mean": sum(errs) / len(errs),
                "rel_error_min": min(errs),
                "rel_error_max": max(errs),
                "wall_time_mean": sum(walls) / len(walls),
            }
        )
    return out


def write_summary(summary: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in summary:
            fh.write(",".join(_fmt(row[c]) for c in SUMMARY_COLUMNS) + "\n")
