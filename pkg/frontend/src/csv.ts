/** Strict reader for the solver results CSV emitted by the experiment runner. */

import { readFileSync } from "node:fs";

export const RESULT_COLUMNS = [
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
] as const;

export interface ResultRow {
  method: string;
  n: number;
  m: number;
  alpha: number;
  sigma1: number;
  sigma2: number;
  seed: number;
  gamma: number;
  rel_error: number;
  outer_iters: number;
  wall_time_sec: number;
  converged: boolean;
  status: string;
  /** original CSV line, for the companion row listings */
  raw: string;
}

export class SchemaError extends Error {}

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty results file");
  }
  const header = lines[0].split(",");
  const expected = RESULT_COLUMNS as readonly string[];
  const missing = expected.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`missing columns: ${missing.join(", ")}`);
  }
  if (header.length !== expected.length || expected.some((c, i) => header[i] !== c)) {
    throw new SchemaError(`unexpected column order: ${header.join(",")}`);
  }
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== expected.length) {
      throw new SchemaError(`row ${i}: expected ${expected.length} cells, got ${parts.length}`);
    }
    const num = (idx: number): number => {
      const v = Number(parts[idx]);
      if (parts[idx] !== "nan" && Number.isNaN(v)) {
        throw new SchemaError(`row ${i}: cannot parse number ${parts[idx]} in ${expected[idx]}`);
      }
      return v;
    };
    rows.push({
      method: parts[0],
      n: num(1),
      m: num(2),
      alpha: num(3),
      sigma1: num(4),
      sigma2: num(5),
      seed: num(6),
      gamma: num(7),
      rel_error: num(8),
      outer_iters: num(9),
      wall_time_sec: num(10),
      converged: parts[11] === "True",
      status: parts[12],
      raw: lines[i],
    });
  }
  return rows;
}

export function readResultsCsv(path: string): ResultRow[] {
  return parseResultsCsv(readFileSync(path, "utf-8"));
}
