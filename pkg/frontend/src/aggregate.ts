/** Seed aggregation and sweep-axis detection over result rows.
 *
 * The means computed here are the plotted values and must match the
 * experiment runner's `report` aggregation exactly (plain arithmetic mean
 * over the seeds present, failed rows excluded).
 */

import { ResultRow } from "./csv.js";

export type SweepAxis = "m" | "alpha" | "sigma2";

export interface SeriesPoint {
  x: number;
  relErrorMean: number;
  relErrorMin: number;
  relErrorMax: number;
  wallTimeMean: number;
  nSeeds: number;
  rows: ResultRow[];
}

export interface MethodSeries {
  method: string;
  points: SeriesPoint[];
}

export interface SweepSeries {
  axis: SweepAxis;
  series: MethodSeries[];
}

const CELL_KEYS: (keyof ResultRow)[] = ["n", "m", "alpha", "sigma1", "sigma2", "gamma"];

function okRows(rows: ResultRow[]): ResultRow[] {
  return rows.filter((r) => r.status === "ok");
}

function distinct(rows: ResultRow[], key: keyof ResultRow): number[] {
  return [...new Set(rows.map((r) => r[key] as number))].sort((a, b) => a - b);
}

/** Axes that vary while every other cell coordinate stays fixed. */
export function detectSweepAxes(rows: ResultRow[]): SweepAxis[] {
  const usable = okRows(rows);
  const out: SweepAxis[] = [];
  for (const axis of ["m", "alpha", "sigma2"] as SweepAxis[]) {
    if (distinct(usable, axis).length < 2) continue;
    const others = CELL_KEYS.filter((k) => k !== axis);
    if (others.every((k) => distinct(usable, k).length <= 1)) {
      out.push(axis);
    }
  }
  return out;
}

function mean(values: number[]): number {
  let total = 0;
  for (const v of values) total += v;
  return total / values.length;
}

export function aggregateSweep(rows: ResultRow[], axis: SweepAxis): SweepSeries {
  const usable = okRows(rows);
  const methods = [...new Set(usable.map((r) => r.method))].sort();
  const xs = distinct(usable, axis);
  const series: MethodSeries[] = methods.map((method) => ({
    method,
    points: xs
      .map((x) => {
        const cell = usable.filter((r) => r.method === method && (r[axis] as number) === x);
        if (cell.length === 0) return null;
        return {
          x,
          relErrorMean: mean(cell.map((r) => r.rel_error)),
          relErrorMin: Math.min(...cell.map((r) => r.rel_error)),
          relErrorMax: Math.max(...cell.map((r) => r.rel_error)),
          wallTimeMean: mean(cell.map((r) => r.wall_time_sec)),
          nSeeds: cell.length,
          rows: cell,
        };
      })
      .filter((p): p is SeriesPoint => p !== null),
  }));
  return { axis, series };
}

export interface CellSummary {
  method: string;
  label: string;
  relErrorMean: number;
  nSeeds: number;
  rows: ResultRow[];
}

/** Per-cell seed means for table-like data (several varying coordinates). */
export function aggregateCells(rows: ResultRow[]): CellSummary[] {
  const usable = okRows(rows);
  const groups = new Map<string, ResultRow[]>();
  for (const r of usable) {
    const key = CELL_KEYS.map((k) => `${k}=${r[k]}`).join(" ") + ` method=${r.method}`;
    const bucket = groups.get(key);
    if (bucket) bucket.push(r);
    else groups.set(key, [r]);
  }
  return [...groups.entries()]
    .map(([key, cell]) => ({
      method: cell[0].method,
      label: key.replace(/ method=.*$/, ""),
      relErrorMean: mean(cell.map((r) => r.rel_error)),
      nSeeds: cell.length,
      rows: cell,
    }))
    .sort((a, b) => (a.label === b.label ? a.method.localeCompare(b.method) : a.label.localeCompare(b.label)));
}
