import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { CsvError } from "../src/csv.js";
import { diverging } from "../src/color.js";
import {
  fitLine,
  renderAdiabaticLoglog,
  renderFig3Surface,
  renderFig4Wigner,
  renderText,
} from "../src/render.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf-8");
}

/** Wigner CSV of the vacuum state: W = exp(-(x^2+p^2))/pi, all positive. */
function vacuumWignerCsv(): string {
  const axis: number[] = [];
  for (let v = -3; v <= 3.0001; v += 0.25) axis.push(Number(v.toFixed(2)));
  const lines = ["x,p,W"];
  for (const x of axis) {
    for (const p of axis) {
      lines.push(`${x},${p},${(Math.exp(-(x * x + p * p)) / Math.PI).toPrecision(12)}`);
    }
  }
  return lines.join("\n") + "\n";
}

describe("golden fixtures", () => {
  it("renders all three kinds without error", () => {
    for (const [kind, file] of [
      ["fig3-surface", "fig3.csv"],
      ["fig4-wigner", "fig4_wigner.csv"],
      ["adiabatic-loglog", "adiabatic.csv"],
    ] as const) {
      const svg = renderText(kind, fixture(file));
      expect(svg.startsWith('<?xml version="1.0"')).toBe(true);
      expect(svg).toContain("</svg>");
    }
  });

  it("is deterministic", () => {
    const text = fixture("adiabatic.csv");
    expect(renderAdiabaticLoglog(text)).toEqual(renderAdiabaticLoglog(text));
  });

  it("rejects header-mutated CSVs for every kind", () => {
    expect(() =>
      renderFig3Surface(fixture("fig3.csv").replace("fidelity", "Fidelity")),
    ).toThrow(CsvError);
    expect(() =>
      renderFig4Wigner(fixture("fig4_wigner.csv").replace("x,p,W", "x,y,W")),
    ).toThrow(CsvError);
    expect(() =>
      renderAdiabaticLoglog(fixture("adiabatic.csv").replace("p_diabatic", "leak")),
    ).toThrow(CsvError);
  });
});

describe("fig4 Wigner rendering", () => {
  it("vacuum input yields no below-zero color band", () => {
    const svg = renderFig4Wigner(vacuumWignerCsv());
    // the diverging scale paints negative values toward deep blue; a pure
    // Gaussian must only use the white-to-red half
    const blues = svg.match(/#[0-9a-f]{2}[0-9a-f]{2}[0-9a-f]{2}/g)!.filter((c) => {
      const r = parseInt(c.slice(1, 3), 16);
      const b = parseInt(c.slice(5, 7), 16);
      return b > r + 40; // strongly blue cell
    });
    // only the colorbar's negative half may be blue; count cells via rects
    const cellBlues = countBlueCells(svg, 25 * 25);
    expect(cellBlues).toBe(0);
    expect(blues.length).toBeGreaterThan(0); // colorbar still shows the scale
  });

  it("vacuum-stripped fixture shows a visible negative region", () => {
    const svg = renderFig4Wigner(fixture("fig4_wigner.csv"));
    expect(countBlueCells(svg, 81 * 81)).toBeGreaterThan(10);
  });

  it("color scale is symmetric about zero", () => {
    expect(diverging(0, 1)).toBe("#ffffff");
    const neg = diverging(-0.5, 1);
    const pos = diverging(0.5, 1);
    expect(neg).not.toEqual(pos);
  });
});

/** Count heatmap cell rects (the first `cells` rects after the canvas) that
 * are strongly blue. */
function countBlueCells(svg: string, cells: number): number {
  const rects = svg.match(/<rect [^>]*fill="(#[0-9a-f]{6})"/g)!;
  // rect 0 is the canvas background; cells follow immediately
  let count = 0;
  for (const r of rects.slice(1, 1 + cells)) {
    const c = /fill="(#[0-9a-f]{6})"/.exec(r)![1];
    const red = parseInt(c.slice(1, 3), 16);
    const blue = parseInt(c.slice(5, 7), 16);
    if (blue > red + 40) count++;
  }
  return count;
}

describe("adiabatic log-log rendering", () => {
  it("annotates a fitted slope near -4", () => {
    const svg = renderAdiabaticLoglog(fixture("adiabatic.csv"));
    const m = /slope ≈ (-?\d+\.\d+)/.exec(svg);
    expect(m).not.toBeNull();
    expect(Number(m![1])).toBeLessThan(-3.5);
    expect(Number(m![1])).toBeGreaterThan(-4.5);
  });

  it("fitLine recovers an exact line", () => {
    const { slope, intercept } = fitLine([1, 2, 3], [5, 7, 9]);
    expect(slope).toBeCloseTo(2);
    expect(intercept).toBeCloseTo(3);
  });
});

describe("fig3 surface rendering", () => {
  it("labels axes with the unit convention", () => {
    const svg = renderFig3Surface(fixture("fig3.csv"));
    expect(svg).toContain("units of g");
    expect(svg).toContain("fidelity");
  });

  it("rejects an incomplete grid", () => {
    const lines = fixture("fig3.csv").trimEnd().split("\n");
    const truncated = lines.slice(0, -1).join("\n") + "\n";
    expect(() => renderFig3Surface(truncated)).toThrow(/grid/);
  });
});
