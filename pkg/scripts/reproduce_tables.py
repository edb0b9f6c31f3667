#!/usr/bin/env python3
"""Run the two error-table grids at desk scale and print their summaries.

Heavy: hundreds of full-size solves. Start with --cells to restrict to the
headline mixed-noise cells.
"""

import argparse
import sys
from pathlib import Path

from mramix import cli

REPO = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", default="results", help="output root")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--table", choices=["1", "2", "both"], default="both", help="which table grid to run"
    )
    args = parser.parse_args()
    configs = []
    if args.table in ("1", "both"):
        configs.append(("table1", REPO / "configs" / "table1.cfg"))
    if args.table in ("2", "both"):
        configs.append(("table2", REPO / "configs" / "table2.cfg"))
    for name, cfg in configs:
        out = Path(args.output) / name
        code = cli.main(
            ["grid", "--config", str(cfg), "--output", str(out), "--threads", str(args.threads)]
        )
        if code != 0:
            return code
        cli.main(["report", str(out / "results.csv"), "--output", str(out)])
    return 0


if __name__ == "__main__":
    sys.exit(main())
