#!/usr/bin/env python3
"""Run the observation-count / mixing-ratio / narrow-deviation sweeps and
render their figures with the TypeScript frontend (if built)."""

import argparse
import subprocess
import sys
from pathlib import Path

from mramix import cli

REPO = Path(__file__).resolve().parents[1]
SWEEPS = ["fig1_m_sweep", "fig3_alpha_sweep", "fig5_sigma2_sweep"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", default="results", help="output root")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--sweep", choices=SWEEPS + ["all"], default="all")
    args = parser.parse_args()
    names = SWEEPS if args.sweep == "all" else [args.sweep]
    renderer = REPO / "frontend" / "dist" / "main.js"
    for name in names:
        out = Path(args.output) / name
        code = cli.main(
            [
                "grid",
                "--config",
                str(REPO / "configs" / f"{name}.cfg"),
                "--output",
                str(out),
                "--threads",
                str(args.threads),
            ]
        )
        if code != 0:
            return code
        cli.main(["report", str(out / "results.csv"), "--output", str(out)])
        if renderer.exists():
            subprocess.run(
                ["node", str(renderer), str(out / "results.csv"), str(out / "figures")],
                check=True,
            )
        else:
            print(f"frontend not built; skipping figures for {name} (see frontend/README)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
