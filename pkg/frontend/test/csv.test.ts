import { describe, expect, it } from "vitest";

import { CsvError, column, parseCsv, uniqueSorted } from "../src/csv.js";

const GOOD = `# units: rates in g, times in 1/g
x,p,W
-1,0,0.25
0,0,0.318
1,0,0.25
`;

describe("parseCsv", () => {
  it("skips comment lines and validates the header", () => {
    const t = parseCsv(GOOD, ["x", "p", "W"]);
    expect(t.rows).toHaveLength(3);
    expect(column(t, "W")[1]).toBeCloseTo(0.318);
  });

  it("rejects a mutated header", () => {
    const bad = GOOD.replace("x,p,W", "x,momentum,W");
    expect(() => parseCsv(bad, ["x", "p", "W"])).toThrow(CsvError);
    expect(() => parseCsv(bad, ["x", "p", "W"])).toThrow(/header mismatch/);
  });

  it("rejects reordered columns", () => {
    const bad = GOOD.replace("x,p,W", "p,x,W");
    expect(() => parseCsv(bad, ["x", "p", "W"])).toThrow(CsvError);
  });

  it("rejects empty data", () => {
    expect(() => parseCsv("x,p,W\n", ["x", "p", "W"])).toThrow(/no data rows/);
    expect(() => parseCsv("", ["x", "p", "W"])).toThrow(/no header/);
  });

  it("rejects ragged or non-numeric rows", () => {
    expect(() => parseCsv("x,p,W\n1,2\n", ["x", "p", "W"])).toThrow(/cells/);
    expect(() => parseCsv("x,p,W\n1,2,zzz\n", ["x", "p", "W"])).toThrow(
      /non-numeric/,
    );
  });
});

describe("uniqueSorted", () => {
  it("deduplicates and sorts numerically", () => {
    expect(uniqueSorted([10, 2, 10, 2, 1])).toEqual([1, 2, 10]);
  });
});
