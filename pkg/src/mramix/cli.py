"""Command-line entry points: generate / solve / grid / report.

Exit code 0 means every requested run completed (converged or not); nonzero
signals an infrastructure failure such as a malformed config or an unwritable
output directory.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .core import NoiseModel
from .datagen import GenSpec, generate_observations, save_observations
from .experiments import (
    ConfigError,
    aggregate_results,
    execute_run,
    format_row,
    parse_config,
    run_experiment_grid,
    write_summary,
    CSV_COLUMNS,
    SUMMARY_COLUMNS,
)


def _add_common(parser):
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--output", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="restrict to one seed")


def cmd_generate(args) -> int:
    grid = parse_config(args.config)
    if args.output:
        grid = replace(grid, output_dir=args.output)
    seeds = [args.seed] if args.seed is not None else list(grid.seeds)
    out = Path(grid.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    truth = grid.truth()
    for cell in grid.cells():
        m, alpha, sigma1, sigma2, _ = cell
        noise = NoiseModel(alpha, sigma1**2, sigma2**2)
        for seed in seeds:
            obs = generate_observations(truth, GenSpec(m=m, noise=noise, seed=seed))
            name = f"obs_m{m}_a{alpha!r}_s1{sigma1!r}_s2{sigma2!r}_seed{seed}.csv"
            save_observations(out / name, obs)
            print(f"wrote {out / name}")
    return 0


def cmd_solve(args) -> int:
    grid = parse_config(args.config)
    if args.output:
        grid = replace(grid, output_dir=args.output)
    cells = grid.cells()
    if len(cells) != 1 or len(grid.methods) != 1:
        print(
            f"solve needs a single-cell, single-method config; this one has "
            f"{len(cells)} cells x {len(grid.methods)} methods (use `grid`)",
            file=sys.stderr,
        )
        return 2
    seed = args.seed if args.seed is not None else grid.seeds[0]
    outcome = execute_run(grid, grid.methods[0], cells[0], seed)
    out = Path(grid.output_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    from .experiments import run_key

    key = run_key(grid.methods[0], *cells[0], seed)
    (out / "traces" / f"{key}.txt").write_text(outcome["trace"], encoding="utf-8")
    print(",".join(CSV_COLUMNS))
    print(format_row(outcome["row"]))
    return 0 if outcome["row"]["status"] == "ok" else 1


def cmd_grid(args) -> int:
    grid = parse_config(args.config)
    if args.output:
        grid = replace(grid, output_dir=args.output)
    if args.seed is not None:
        grid = replace(grid, seeds=(args.seed,))
    config_text = Path(args.config).read_text(encoding="utf-8")
    csv_path = run_experiment_grid(grid, threads=args.threads, config_text=config_text)
    print(f"results: {csv_path}")
    return 0


def cmd_report(args) -> int:
    summary = aggregate_results(args.results)
    header = SUMMARY_COLUMNS
    widths = [max(len(h), 12) for h in header]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in summary:
        cells = []
        for name, w in zip(header, widths):
            value = row[name]
            text = f"{value:.6g}" if isinstance(value, float) else str(value)
            cells.append(text.ljust(w))
        print("  ".join(cells))
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        write_summary(summary, out / "summary.csv")
        print(f"summary: {out / 'summary.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mramix",
        description="Signal recovery from shifted observations under mixed Gaussian noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit observation-set files for a grid config")
    _add_common(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("solve", help="run a single (cell, seed, method)")
    _add_common(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("grid", help="run the full experiment grid")
    _add_common(p)
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(fn=cmd_grid)

    p = sub.add_parser("report", help="aggregate a results CSV into per-cell summaries")
    p.add_argument("results", help="path to results.csv")
    p.add_argument("--output", default=None, help="directory for summary.csv")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
