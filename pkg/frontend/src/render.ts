/**
 * Figure renderers: each consumes one CSV contract from the simulator CLI
 * and emits a deterministic standalone SVG.
 *
 * Kinds
 * -----
 * fig3-surface     fidelity heatmap over the (alpha, kappa) sweep grid
 * fig4-wigner      Wigner quasiprobability heatmap, diverging scale
 *                  symmetric about zero so negativity is visible
 * adiabatic-loglog log-log leakage-vs-duration line with the fitted
 *                  power-law slope annotated
 */

import { CsvError, Table, column, parseCsv, uniqueSorted } from "./csv.js";
import { diverging, sequential } from "./color.js";
import { SvgDoc } from "./svg.js";

export const KINDS = ["fig3-surface", "fig4-wigner", "adiabatic-loglog"] as const;
export type Kind = (typeof KINDS)[number];

export interface PlotJob {
  kind: Kind;
  inputCsv: string;
  outputSvg: string;
}

export const HEADERS: Record<Kind, string[]> = {
  "fig3-surface": [
    "alpha",
    "kappa",
    "T_opt",
    "fidelity",
    "p_success",
    "p_vacuum",
    "p_sink",
  ],
  "fig4-wigner": ["x", "p", "W"],
  "adiabatic-loglog": [
    "n",
    "T",
    "nu0",
    "p_diabatic",
    "phi_pred",
    "phi_num",
    "kappa_b_residual",
    "kappa_e_residual",
    "slope",
  ],
};

const MARGIN = { left: 70, right: 120, top: 40, bottom: 55 };
const PLOT_W = 480;
const PLOT_H = 400;
const WIDTH = MARGIN.left + PLOT_W + MARGIN.right;
const HEIGHT = MARGIN.top + PLOT_H + MARGIN.bottom;

function frame(doc: SvgDoc, title: string, xLabel: string, yLabel: string): void {
  doc.text(MARGIN.left + PLOT_W / 2, MARGIN.top - 16, title, {
    size: 15,
    anchor: "middle",
  });
  doc.text(MARGIN.left + PLOT_W / 2, MARGIN.top + PLOT_H + 40, xLabel, {
    size: 13,
    anchor: "middle",
  });
  doc.text(MARGIN.left - 50, MARGIN.top + PLOT_H / 2, yLabel, {
    size: 13,
    anchor: "middle",
    rotate: -90,
  });
  const x0 = MARGIN.left;
  const y0 = MARGIN.top;
  doc.line(x0, y0 + PLOT_H, x0 + PLOT_W, y0 + PLOT_H, "#000000");
  doc.line(x0, y0, x0, y0 + PLOT_H, "#000000");
}

function heatmapCells(
  doc: SvgDoc,
  xs: number[],
  ys: number[],
  valueAt: (xi: number, yi: number) => number,
  color: (v: number) => string,
): void {
  const cw = PLOT_W / xs.length;
  const ch = PLOT_H / ys.length;
  for (let yi = 0; yi < ys.length; yi++) {
    for (let xi = 0; xi < xs.length; xi++) {
      // y axis grows upward: last row of the grid sits at the top
      const px = MARGIN.left + xi * cw;
      const py = MARGIN.top + (ys.length - 1 - yi) * ch;
      doc.rect(px, py, cw + 0.5, ch + 0.5, color(valueAt(xi, yi)));
    }
  }
}

function colorbar(
  doc: SvgDoc,
  lo: number,
  hi: number,
  color: (v: number) => string,
  label: string,
): void {
  const x = MARGIN.left + PLOT_W + 25;
  const w = 18;
  const steps = 64;
  for (let i = 0; i < steps; i++) {
    const v = lo + ((hi - lo) * (i + 0.5)) / steps;
    const y = MARGIN.top + PLOT_H - ((i + 1) / steps) * PLOT_H;
    doc.rect(x, y, w, PLOT_H / steps + 0.5, color(v));
  }
  doc.text(x + w + 6, MARGIN.top + PLOT_H, lo.toPrecision(3), { size: 11 });
  doc.text(x + w + 6, MARGIN.top + 10, hi.toPrecision(3), { size: 11 });
  doc.text(x + w / 2, MARGIN.top - 8, label, { size: 12, anchor: "middle" });
}

function axisTicks(
  doc: SvgDoc,
  values: number[],
  axis: "x" | "y",
  toPixel: (v: number) => number,
): void {
  for (const v of values) {
    const p = toPixel(v);
    const label = Number(v.toPrecision(4)).toString();
    if (axis === "x") {
      doc.line(p, MARGIN.top + PLOT_H, p, MARGIN.top + PLOT_H + 5, "#000000");
      doc.text(p, MARGIN.top + PLOT_H + 18, label, { size: 11, anchor: "middle" });
    } else {
      doc.line(MARGIN.left - 5, p, MARGIN.left, p, "#000000");
      doc.text(MARGIN.left - 8, p + 4, label, { size: 11, anchor: "end" });
    }
  }
}

function gridLookup(
  table: Table,
  xName: string,
  yName: string,
  vName: string,
): { xs: number[]; ys: number[]; at: (xi: number, yi: number) => number } {
  const xCol = column(table, xName);
  const yCol = column(table, yName);
  const vCol = column(table, vName);
  const xs = uniqueSorted(xCol);
  const ys = uniqueSorted(yCol);
  const map = new Map<string, number>();
  for (let i = 0; i < vCol.length; i++) {
    map.set(`${xCol[i]}|${yCol[i]}`, vCol[i]);
  }
  if (map.size !== xs.length * ys.length) {
    throw new CsvError(
      `expected a full ${xs.length}x${ys.length} grid, found ${map.size} points`,
    );
  }
  return {
    xs,
    ys,
    at: (xi, yi) => map.get(`${xs[xi]}|${ys[yi]}`) as number,
  };
}

export function renderFig3Surface(text: string): string {
  const table = parseCsv(text, HEADERS["fig3-surface"]);
  const grid = gridLookup(table, "alpha", "kappa", "fidelity");
  let lo = Infinity;
  let hi = -Infinity;
  for (let yi = 0; yi < grid.ys.length; yi++) {
    for (let xi = 0; xi < grid.xs.length; xi++) {
      const v = grid.at(xi, yi);
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  const span = hi - lo || 1;
  const doc = new SvgDoc(WIDTH, HEIGHT);
  heatmapCells(doc, grid.xs, grid.ys, grid.at, (v) =>
    sequential((v - lo) / span),
  );
  frame(
    doc,
    "Replacement fidelity at optimal T",
    "coherent amplitude α",
    "cavity loss κ (units of g)",
  );
  const cw = PLOT_W / grid.xs.length;
  const ch = PLOT_H / grid.ys.length;
  axisTicks(doc, grid.xs, "x", (v) => {
    return MARGIN.left + (grid.xs.indexOf(v) + 0.5) * cw;
  });
  axisTicks(doc, grid.ys, "y", (v) => {
    return MARGIN.top + (grid.ys.length - 1 - grid.ys.indexOf(v) + 0.5) * ch;
  });
  colorbar(doc, lo, hi, (v) => sequential((v - lo) / span), "fidelity");
  return doc.render();
}

export function renderFig4Wigner(text: string): string {
  const table = parseCsv(text, HEADERS["fig4-wigner"]);
  const grid = gridLookup(table, "x", "p", "W");
  let limit = 0;
  for (let yi = 0; yi < grid.ys.length; yi++) {
    for (let xi = 0; xi < grid.xs.length; xi++) {
      limit = Math.max(limit, Math.abs(grid.at(xi, yi)));
    }
  }
  if (limit === 0) limit = 1;
  const doc = new SvgDoc(WIDTH, HEIGHT);
  heatmapCells(doc, grid.xs, grid.ys, grid.at, (v) => diverging(v, limit));
  frame(
    doc,
    "Wigner function of the replaced-photon state",
    "x quadrature",
    "p quadrature",
  );
  const xTicks = [grid.xs[0], 0, grid.xs[grid.xs.length - 1]].filter(
    (v, i, a) => a.indexOf(v) === i,
  );
  const cw = PLOT_W / grid.xs.length;
  const ch = PLOT_H / grid.ys.length;
  const nearest = (axis: number[], v: number) =>
    axis.reduce((b, c) => (Math.abs(c - v) < Math.abs(b - v) ? c : b));
  axisTicks(doc, xTicks.map((v) => nearest(grid.xs, v)), "x", (v) => {
    return MARGIN.left + (grid.xs.indexOf(v) + 0.5) * cw;
  });
  axisTicks(doc, xTicks.map((v) => nearest(grid.ys, v)), "y", (v) => {
    return MARGIN.top + (grid.ys.length - 1 - grid.ys.indexOf(v) + 0.5) * ch;
  });
  colorbar(doc, -limit, limit, (v) => diverging(v, limit), "W");
  return doc.render();
}

/** Least-squares slope/intercept of y against x. */
export function fitLine(x: number[], y: number[]): { slope: number; intercept: number } {
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  const slope = num / den;
  return { slope, intercept: my - slope * mx };
}

export function renderAdiabaticLoglog(text: string): string {
  const table = parseCsv(text, HEADERS["adiabatic-loglog"]);
  const nCol = column(table, "n");
  const tCol = column(table, "T");
  const pCol = column(table, "p_diabatic");
  const doc = new SvgDoc(WIDTH, HEIGHT);
  frame(
    doc,
    "Diabatic leakage vs sweep duration",
    "log10 T (units of 1/g)",
    "log10 leakage probability",
  );
  const logT = tCol.map(Math.log10);
  const logP = pCol.map((p) => Math.log10(Math.max(p, 1e-300)));
  const xLo = Math.min(...logT);
  const xHi = Math.max(...logT);
  const yLo = Math.min(...logP);
  const yHi = Math.max(...logP);
  const px = (v: number) =>
    MARGIN.left + ((v - xLo) / (xHi - xLo || 1)) * PLOT_W;
  const py = (v: number) =>
    MARGIN.top + PLOT_H - ((v - yLo) / (yHi - yLo || 1)) * PLOT_H;
  axisTicks(doc, uniqueSorted(logT), "x", px);
  axisTicks(doc, [yLo, (yLo + yHi) / 2, yHi], "y", py);

  const slopeCol = column(table, "slope");
  const series = uniqueSorted(nCol);
  const palette = ["#1f77b4", "#d62728", "#2ca02c"];
  series.forEach((n, si) => {
    const idx = nCol
      .map((v, i) => (v === n ? i : -1))
      .filter((i) => i >= 0)
      .sort((a, b) => tCol[a] - tCol[b]);
    const pts = idx.map((i): [number, number] => [px(logT[i]), py(logP[i])]);
    const color = palette[si % palette.length];
    doc.polyline(pts, color);
    for (const [cx, cy] of pts) doc.circle(cx, cy, 3, color);
    // the producer fits the slope over the asymptotic window and repeats it
    // per row; annotate that value rather than refitting the whole range
    doc.text(
      MARGIN.left + PLOT_W - 8,
      MARGIN.top + 18 + 16 * si,
      `n=${n}: slope ≈ ${slopeCol[idx[0]].toFixed(2)}`,
      { size: 12, anchor: "end" },
    );
  });
  return doc.render();
}

export function renderText(kind: Kind, text: string): string {
  switch (kind) {
    case "fig3-surface":
      return renderFig3Surface(text);
    case "fig4-wigner":
      return renderFig4Wigner(text);
    case "adiabatic-loglog":
      return renderAdiabaticLoglog(text);
  }
}
