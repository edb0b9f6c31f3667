import { describe, expect, it } from "vitest";

import { parseResultsCsv, RESULT_COLUMNS, SchemaError } from "../src/csv.js";

const HEADER = RESULT_COLUMNS.join(",");

const ROW = "mgg-softmax,41,10000,0.2,10.0,0.01,1,0.0,0.08,25,12.5,True,ok";

describe("parseResultsCsv", () => {
  it("parses well-formed rows with typed fields", () => {
    const rows = parseResultsCsv(`${HEADER}\n${ROW}\n`);
    expect(rows).toHaveLength(1);
    const r = rows[0];
    expect(r.method).toBe("mgg-softmax");
    expect(r.n).toBe(41);
    expect(r.m).toBe(10000);
    expect(r.alpha).toBeCloseTo(0.2, 12);
    expect(r.rel_error).toBeCloseTo(0.08, 12);
    expect(r.converged).toBe(true);
    expect(r.status).toBe("ok");
    expect(r.raw).toBe(ROW);
  });

  it("names missing columns", () => {
    const bad = "method,n,m\nmgg-softmax,41,100\n";
    expect(() => parseResultsCsv(bad)).toThrowError(SchemaError);
    expect(() => parseResultsCsv(bad)).toThrowError(/missing columns: .*alpha/);
  });

  it("rejects reordered headers", () => {
    const reordered = [...RESULT_COLUMNS].reverse().join(",");
    expect(() => parseResultsCsv(`${reordered}\n`)).toThrowError(/column order/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseResultsCsv(`${HEADER}\nmgg-softmax,41\n`)).toThrowError(/expected 13 cells/);
  });

  it("accepts nan error fields on failed rows", () => {
    const failed = "em-baseline,41,100,0.2,10.0,0.01,1,0.0,nan,0,nan,False,error:RuntimeError";
    const rows = parseResultsCsv(`${HEADER}\n${failed}\n`);
    expect(Number.isNaN(rows[0].rel_error)).toBe(true);
    expect(rows[0].status).toBe("error:RuntimeError");
  });
});
