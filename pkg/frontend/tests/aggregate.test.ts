import { describe, expect, it } from "vitest";

import { aggregateCells, aggregateSweep, detectSweepAxes } from "../src/aggregate.js";
import { parseResultsCsv, RESULT_COLUMNS } from "../src/csv.js";

const HEADER = RESULT_COLUMNS.join(",");

function csv(rows: string[]): string {
  return [HEADER, ...rows].join("\n") + "\n";
}

// hand-aggregation oracle fixture: six data rows, single m-sweep
const SIX_ROWS = [
  "mgg-softmax,41,10,0.2,10.0,0.1,1,0.0,0.5,5,1.0,True,ok",
  "mgg-softmax,41,10,0.2,10.0,0.1,2,0.0,0.3,5,1.5,True,ok",
  "mgg-softmax,41,100,0.2,10.0,0.1,1,0.0,0.2,5,2.0,True,ok",
  "mgg-softmax,41,100,0.2,10.0,0.1,2,0.0,0.4,5,2.5,True,ok",
  "em-baseline,41,10,0.2,10.0,0.1,1,0.0,0.6,5,0.2,True,ok",
  "em-baseline,41,100,0.2,10.0,0.1,1,0.0,0.55,5,0.3,True,ok",
];

describe("detectSweepAxes", () => {
  it("finds the single varying axis", () => {
    expect(detectSweepAxes(parseResultsCsv(csv(SIX_ROWS)))).toEqual(["m"]);
  });

  it("reports nothing when several cell coordinates vary", () => {
    const rows = parseResultsCsv(
      csv([
        "mgg-softmax,41,10,0.2,10.0,0.1,1,0.0,0.5,5,1.0,True,ok",
        "mgg-softmax,41,100,0.4,10.0,0.1,1,0.0,0.2,5,2.0,True,ok",
      ]),
    );
    expect(detectSweepAxes(rows)).toEqual([]);
  });

  it("reports nothing for a single cell", () => {
    const rows = parseResultsCsv(csv(SIX_ROWS.slice(0, 2)));
    expect(detectSweepAxes(rows)).toEqual([]);
  });
});

describe("aggregateSweep", () => {
  it("matches hand-computed seed means exactly", () => {
    const sweep = aggregateSweep(parseResultsCsv(csv(SIX_ROWS)), "m");
    const mgg = sweep.series.find((s) => s.method === "mgg-softmax")!;
    const em = sweep.series.find((s) => s.method === "em-baseline")!;
    expect(mgg.points.map((p) => p.x)).toEqual([10, 100]);
    expect(mgg.points[0].relErrorMean).toBeCloseTo(0.4, 14);
    expect(mgg.points[1].relErrorMean).toBeCloseTo(0.3, 14);
    expect(mgg.points[0].relErrorMin).toBe(0.3);
    expect(mgg.points[0].relErrorMax).toBe(0.5);
    expect(mgg.points[0].wallTimeMean).toBeCloseTo(1.25, 14);
    expect(em.points[0].relErrorMean).toBe(0.6);
    expect(em.points[1].relErrorMean).toBe(0.55);
    expect(mgg.points[0].nSeeds).toBe(2);
  });

  it("excludes failed rows from the aggregation", () => {
    const withFailure = [...SIX_ROWS, "mgg-softmax,41,10,0.2,10.0,0.1,3,0.0,nan,0,nan,False,error:X"];
    const sweep = aggregateSweep(parseResultsCsv(csv(withFailure)), "m");
    const mgg = sweep.series.find((s) => s.method === "mgg-softmax")!;
    expect(mgg.points[0].nSeeds).toBe(2);
    expect(mgg.points[0].relErrorMean).toBeCloseTo(0.4, 14);
  });
});

describe("aggregateCells", () => {
  it("groups by full cell coordinates and method", () => {
    const rows = parseResultsCsv(
      csv([
        "mgg-softmax,41,10,0.2,10.0,0.1,1,0.0,0.5,5,1.0,True,ok",
        "mgg-softmax,41,10,0.2,10.0,0.1,2,0.0,0.1,5,1.0,True,ok",
        "mgg-softmax,41,10,0.4,10.0,0.1,1,0.0,0.7,5,1.0,True,ok",
      ]),
    );
    const cells = aggregateCells(rows);
    expect(cells).toHaveLength(2);
    expect(cells[0].relErrorMean).toBeCloseTo(0.3, 14);
    expect(cells[1].relErrorMean).toBe(0.7);
  });
});
