/** Figure rendering: results CSV in, SVG files plus row listings out. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { aggregateCells, aggregateSweep, detectSweepAxes, SweepSeries } from "./aggregate.js";
import { readResultsCsv, ResultRow, RESULT_COLUMNS } from "./csv.js";
import { renderBars, renderChart } from "./svg.js";

export interface RenderOutcome {
  files: string[];
  sweeps: SweepSeries[];
  warning?: string;
}

const AXIS_LABEL: Record<string, string> = {
  m: "observation count M",
  alpha: "mixing ratio alpha",
  sigma2: "narrow-component deviation sigma2",
};

function rowListing(rows: ResultRow[]): string {
  return [RESULT_COLUMNS.join(","), ...rows.map((r) => r.raw)].join("\n") + "\n";
}

export function renderSweepFigures(csvPath: string, outDir: string): RenderOutcome {
  const rows = readResultsCsv(csvPath);
  const usable = rows.filter((r) => r.status === "ok");
  if (usable.length === 0) {
    return { files: [], sweeps: [], warning: "no usable rows in selection; nothing rendered" };
  }
  mkdirSync(outDir, { recursive: true });
  const files: string[] = [];
  const axes = detectSweepAxes(rows);
  const sweeps: SweepSeries[] = [];

  for (const axis of axes) {
    const sweep = aggregateSweep(rows, axis);
    sweeps.push(sweep);
    const errPath = join(outDir, `fig_error_vs_${axis}.svg`);
    writeFileSync(
      errPath,
      renderChart({
        title: `relative recovery error vs ${AXIS_LABEL[axis]}`,
        xLabel: AXIS_LABEL[axis],
        yLabel: "relative error (log scale)",
        logX: axis === "m",
        logY: true,
        curves: sweep.series.map((s) => ({
          label: s.method,
          xs: s.points.map((p) => p.x),
          ys: s.points.map((p) => p.relErrorMean),
          yLow: s.points.map((p) => p.relErrorMin),
          yHigh: s.points.map((p) => p.relErrorMax),
        })),
      }),
    );
    files.push(errPath);
    const timePath = join(outDir, `fig_time_vs_${axis}.svg`);
    writeFileSync(
      timePath,
      renderChart({
        title: `wall time vs ${AXIS_LABEL[axis]}`,
        xLabel: AXIS_LABEL[axis],
        yLabel: "wall time per solve (s)",
        logX: axis === "m",
        logY: false,
        curves: sweep.series.map((s) => ({
          label: s.method,
          xs: s.points.map((p) => p.x),
          ys: s.points.map((p) => p.wallTimeMean),
        })),
      }),
    );
    files.push(timePath);
    const listPath = join(outDir, `rows_${axis}.txt`);
    const used = sweep.series.flatMap((s) => s.points.flatMap((p) => p.rows));
    writeFileSync(listPath, rowListing(used));
    files.push(listPath);
  }

  if (axes.length === 0) {
    // table-like data: per-cell seed-mean bar summary instead of sweep curves
    const cells = aggregateCells(rows);
    const barPath = join(outDir, "fig_cell_summary.svg");
    writeFileSync(
      barPath,
      renderBars(
        "seed-mean relative error per cell",
        "relative error (log scale)",
        cells.map((c) => ({ label: c.label, group: c.method, value: c.relErrorMean })),
      ),
    );
    files.push(barPath);
    const listPath = join(outDir, "rows_cells.txt");
    writeFileSync(listPath, rowListing(cells.flatMap((c) => c.rows)));
    files.push(listPath);
  }
  return { files, sweeps };
}
