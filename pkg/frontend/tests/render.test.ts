import { mkdtempSync, readdirSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

const HERE = fileURLToPath(new URL(".", import.meta.url));

import { aggregateSweep, detectSweepAxes } from "../src/aggregate.js";
import { parseResultsCsv, readResultsCsv, RESULT_COLUMNS } from "../src/csv.js";
import { renderSweepFigures } from "../src/render.js";

const HEADER = RESULT_COLUMNS.join(",");

const SWEEP_ROWS = [
  "mgg-softmax,41,10,0.2,10.0,0.1,1,0.0,0.5,5,1.0,True,ok",
  "mgg-softmax,41,10,0.2,10.0,0.1,2,0.0,0.3,5,1.5,True,ok",
  "mgg-softmax,41,100,0.2,10.0,0.1,1,0.0,0.2,5,2.0,True,ok",
  "mgg-softmax,41,100,0.2,10.0,0.1,2,0.0,0.4,5,2.5,True,ok",
  "em-baseline,41,10,0.2,10.0,0.1,1,0.0,0.6,5,0.2,True,ok",
  "em-baseline,41,100,0.2,10.0,0.1,1,0.0,0.55,5,0.3,True,ok",
];

function writeCsv(rows: string[]): string {
  const dir = mkdtempSync(join(tmpdir(), "mramix-fig-"));
  const path = join(dir, "results.csv");
  writeFileSync(path, [HEADER, ...rows].join("\n") + "\n");
  return path;
}

describe("renderSweepFigures", () => {
  it("emits exactly two image files for a single m-sweep", () => {
    const csvPath = writeCsv(SWEEP_ROWS);
    const outDir = mkdtempSync(join(tmpdir(), "mramix-out-"));
    const outcome = renderSweepFigures(csvPath, outDir);
    const svgs = readdirSync(outDir).filter((f) => f.endsWith(".svg"));
    expect(svgs.sort()).toEqual(["fig_error_vs_m.svg", "fig_time_vs_m.svg"]);
    // companion listing carries the exact rows used
    const listing = readFileSync(join(outDir, "rows_m.txt"), "utf-8");
    for (const row of SWEEP_ROWS) {
      expect(listing).toContain(row);
    }
    expect(outcome.sweeps).toHaveLength(1);
  });

  it("draws both methods with their documented style keys", () => {
    const csvPath = writeCsv(SWEEP_ROWS);
    const outDir = mkdtempSync(join(tmpdir(), "mramix-out-"));
    renderSweepFigures(csvPath, outDir);
    const svg = readFileSync(join(outDir, "fig_error_vs_m.svg"), "utf-8");
    expect(svg).toContain("mgg-softmax");
    expect(svg).toContain("em-baseline");
    expect(svg).toContain("#1f77b4"); // mgg-softmax key
    expect(svg).toContain("#d62728"); // em-baseline key
  });

  it("plots exactly the hand-computed seed means", () => {
    const csvPath = writeCsv(SWEEP_ROWS);
    const outDir = mkdtempSync(join(tmpdir(), "mramix-out-"));
    const outcome = renderSweepFigures(csvPath, outDir);
    const mgg = outcome.sweeps[0].series.find((s) => s.method === "mgg-softmax")!;
    expect(Math.abs(mgg.points[0].relErrorMean - 0.4)).toBeLessThan(1e-12);
    expect(Math.abs(mgg.points[1].relErrorMean - 0.3)).toBeLessThan(1e-12);
  });

  it("re-rendering an unchanged CSV reproduces identical data files", () => {
    const csvPath = writeCsv(SWEEP_ROWS);
    const a = mkdtempSync(join(tmpdir(), "mramix-a-"));
    const b = mkdtempSync(join(tmpdir(), "mramix-b-"));
    renderSweepFigures(csvPath, a);
    renderSweepFigures(csvPath, b);
    for (const name of readdirSync(a)) {
      expect(readFileSync(join(a, name), "utf-8")).toBe(readFileSync(join(b, name), "utf-8"));
    }
  });

  it("is a no-op with a warning when nothing is usable", () => {
    const csvPath = writeCsv(["mgg-softmax,41,10,0.2,10.0,0.1,1,0.0,nan,0,nan,False,error:X"]);
    const outDir = mkdtempSync(join(tmpdir(), "mramix-out-"));
    const outcome = renderSweepFigures(csvPath, outDir);
    expect(outcome.files).toHaveLength(0);
    expect(outcome.warning).toMatch(/nothing rendered/);
  });

  it("falls back to a per-cell bar summary for table-like data", () => {
    const csvPath = writeCsv([
      "mgg-softmax,41,10,0.2,10.0,0.1,1,0.0,0.5,5,1.0,True,ok",
      "mgg-softmax,41,10,0.4,10.0,0.5,1,0.0,0.7,5,1.0,True,ok",
      "em-baseline,41,10,0.2,10.0,0.1,1,0.0,0.8,5,1.0,True,ok",
      "em-baseline,41,10,0.4,10.0,0.5,1,0.0,0.9,5,1.0,True,ok",
    ]);
    const outDir = mkdtempSync(join(tmpdir(), "mramix-out-"));
    renderSweepFigures(csvPath, outDir);
    const files = readdirSync(outDir).sort();
    expect(files).toEqual(["fig_cell_summary.svg", "rows_cells.txt"]);
  });
});

describe("observation-count sweep fixture from a real solver run", () => {
  const FIXTURE = join(HERE, "..", "fixtures", "fig1_sweep.csv");

  it("orders the methods correctly at the largest M", () => {
    const rows = readResultsCsv(FIXTURE);
    expect(detectSweepAxes(rows)).toEqual(["m"]);
    const sweep = aggregateSweep(rows, "m");
    const mgg = sweep.series.find((s) => s.method === "mgg-softmax")!;
    const em = sweep.series.find((s) => s.method === "em-baseline")!;
    const mggAt = (x: number) => mgg.points.find((p) => p.x === x)!;
    const emAt = (x: number) => em.points.find((p) => p.x === x)!;
    expect(mggAt(10000).relErrorMean).toBeLessThan(emAt(10000).relErrorMean);
  });

  it("plots means equal to the runner's report aggregation", () => {
    // frozen from `mramix report` on the same fixture (values are
    // reproduced bit-for-bit by the seeded pipeline)
    const expected = JSON.parse(
      readFileSync(join(HERE, "..", "fixtures", "fig1_report_means.json"), "utf-8"),
    ) as Record<string, Record<string, number>>;
    const rows = readResultsCsv(FIXTURE);
    const sweep = aggregateSweep(rows, "m");
    for (const series of sweep.series) {
      for (const point of series.points) {
        const want = expected[series.method][String(point.x)];
        expect(Math.abs(point.relErrorMean - want)).toBeLessThanOrEqual(1e-12);
      }
    }
  });

  it("renders the fixture end to end", () => {
    const outDir = mkdtempSync(join(tmpdir(), "mramix-fig1-"));
    const outcome = renderSweepFigures(FIXTURE, outDir);
    const svgs = outcome.files.filter((f) => f.endsWith(".svg"));
    expect(svgs).toHaveLength(2);
  });
});
