/** Figure assembly: overlays CSV curves onto a fixed 1200x800 canvas. */

import { existsSync, readFileSync, writeFileSync } from "node:fs";

import { column, parseCsv, requireColumns, type Table } from "./csv.js";
import { encodePng } from "./png.js";
import { Raster, textHeight, textWidth, type Rgb } from "./raster.js";

export const MODES = ["refinement", "regime-comparison", "diagnostics"] as const;
export type OverlayMode = (typeof MODES)[number];

export interface FigureInput {
  path: string;
  label: string;
}

export interface FigureSpec {
  mode: OverlayMode;
  inputs: FigureInput[];
  out: string;
  force?: boolean;
  /** Optional explicit axis windows; data-driven when omitted. */
  xRange?: [number, number];
  yRange?: [number, number];
}

export class FigureError extends Error {}

export const WIDTH = 1200;
export const HEIGHT = 800;

/** Fixed color cycle, applied to inputs in order. */
export const COLOR_CYCLE: Rgb[] = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [148, 103, 189],
  [255, 127, 14],
  [140, 86, 75],
  [23, 190, 207],
  [127, 127, 127],
];

const MARGIN = { left: 90, right: 30, top: 40, bottom: 70 } as const;
const PLOT_X = MARGIN.left;
const PLOT_Y = MARGIN.top;
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const BLACK: Rgb = [0, 0, 0];
const GRID: Rgb = [225, 225, 225];
const N_TICKS = 6;

const SOLUTION_COLUMNS = ["x", "u"];
const DIAGNOSTICS_COLUMNS = [
  "n",
  "t",
  "mass",
  "l1",
  "l2",
  "linf",
  "bv",
  "energy",
  "entropy_residual_max",
];

export function validateSpec(spec: FigureSpec): void {
  if (!MODES.includes(spec.mode)) {
    throw new FigureError(`unknown mode '${spec.mode}', expected one of ${MODES.join(", ")}`);
  }
  if (spec.inputs.length === 0) {
    throw new FigureError("figure needs at least one input CSV");
  }
  const seen = new Set<string>();
  for (const input of spec.inputs) {
    if (seen.has(input.label)) {
      throw new FigureError(`duplicate label '${input.label}'`);
    }
    seen.add(input.label);
  }
  if (!spec.out) {
    throw new FigureError("output path must not be empty");
  }
}

/** Label/color pairing in input order; the legend is drawn from this. */
export function legendEntries(spec: FigureSpec): { label: string; color: Rgb }[] {
  return spec.inputs.map((input, i) => ({
    label: input.label,
    color: COLOR_CYCLE[i % COLOR_CYCLE.length] as Rgb,
  }));
}

interface Curve {
  xs: Float64Array;
  ys: Float64Array;
  label: string;
  color: Rgb;
}

function loadTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (error) {
    throw new FigureError(`cannot read '${path}': ${(error as Error).message}`);
  }
  return parseCsv(text, path);
}

function loadCurves(spec: FigureSpec): Curve[] {
  const solution = spec.mode !== "diagnostics";
  const required = solution ? SOLUTION_COLUMNS : DIAGNOSTICS_COLUMNS;
  return spec.inputs.map((input, i) => {
    const table = loadTable(input.path);
    requireColumns(table, required, input.path);
    return {
      xs: column(table, solution ? "x" : "t"),
      ys: column(table, solution ? "u" : "energy"),
      label: input.label,
      color: COLOR_CYCLE[i % COLOR_CYCLE.length] as Rgb,
    };
  });
}

function dataRange(
  curves: Curve[],
  pick: (c: Curve) => Float64Array,
  explicit?: [number, number],
): [number, number] {
  if (explicit) {
    if (!(explicit[1] > explicit[0])) {
      throw new FigureError(`axis range [${explicit[0]}, ${explicit[1]}] is not increasing`);
    }
    return explicit;
  }
  let lo = Infinity;
  let hi = -Infinity;
  for (const curve of curves) {
    for (const v of pick(curve)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === Infinity) {
    throw new FigureError("no data points");
  }
  if (hi === lo) {
    return [lo - 0.5, hi + 0.5];
  }
  const pad = 0.04 * (hi - lo);
  return [lo - pad, hi + pad];
}

function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  let text =
    magnitude >= 1e4 || magnitude < 1e-3 ? value.toExponential(2) : value.toPrecision(4);
  if (text.includes(".") && !text.includes("e")) {
    text = text.replace(/0+$/, "").replace(/\.$/, "");
  }
  return text;
}

function drawAxes(
  raster: Raster,
  xRange: [number, number],
  yRange: [number, number],
  xLabel: string,
  yLabel: string,
): void {
  for (let t = 0; t < N_TICKS; t++) {
    const frac = t / (N_TICKS - 1);
    const px = Math.round(PLOT_X + frac * PLOT_W);
    const py = Math.round(PLOT_Y + PLOT_H - frac * PLOT_H);
    raster.line(px, PLOT_Y, px, PLOT_Y + PLOT_H, GRID);
    raster.line(PLOT_X, py, PLOT_X + PLOT_W, py, GRID);

    const xv = xRange[0] + frac * (xRange[1] - xRange[0]);
    const yv = yRange[0] + frac * (yRange[1] - yRange[0]);
    raster.line(px, PLOT_Y + PLOT_H, px, PLOT_Y + PLOT_H + 6, BLACK);
    raster.line(PLOT_X - 6, py, PLOT_X, py, BLACK);
    const xText = formatTick(xv);
    raster.text(px - textWidth(xText) / 2, PLOT_Y + PLOT_H + 12, xText, BLACK);
    const yText = formatTick(yv);
    raster.text(PLOT_X - 10 - textWidth(yText), py - textHeight() / 2, yText, BLACK);
  }
  // frame on top of the grid
  raster.line(PLOT_X, PLOT_Y, PLOT_X + PLOT_W, PLOT_Y, BLACK);
  raster.line(PLOT_X, PLOT_Y + PLOT_H, PLOT_X + PLOT_W, PLOT_Y + PLOT_H, BLACK);
  raster.line(PLOT_X, PLOT_Y, PLOT_X, PLOT_Y + PLOT_H, BLACK);
  raster.line(PLOT_X + PLOT_W, PLOT_Y, PLOT_X + PLOT_W, PLOT_Y + PLOT_H, BLACK);

  raster.text(
    PLOT_X + PLOT_W / 2 - textWidth(xLabel) / 2,
    HEIGHT - MARGIN.bottom + 40,
    xLabel,
    BLACK,
  );
  raster.text(12, PLOT_Y + PLOT_H / 2 - textHeight() / 2, yLabel, BLACK);
}

function drawLegend(raster: Raster, curves: Curve[]): void {
  const pitch = 24;
  const swatch = 26;
  const padding = 10;
  const widest = Math.max(...curves.map((c) => textWidth(c.label)));
  const boxW = padding * 2 + swatch + 8 + widest;
  const boxH = padding * 2 + pitch * curves.length - 8;
  const boxX = PLOT_X + PLOT_W - boxW - 12;
  const boxY = PLOT_Y + 12;
  raster.fillRect(boxX, boxY, boxW, boxH, [255, 255, 255]);
  raster.line(boxX, boxY, boxX + boxW, boxY, BLACK);
  raster.line(boxX, boxY + boxH, boxX + boxW, boxY + boxH, BLACK);
  raster.line(boxX, boxY, boxX, boxY + boxH, BLACK);
  raster.line(boxX + boxW, boxY, boxX + boxW, boxY + boxH, BLACK);
  curves.forEach((curve, i) => {
    const cy = boxY + padding + i * pitch + textHeight() / 2;
    raster.line(boxX + padding, cy, boxX + padding + swatch, cy, curve.color, 3);
    raster.text(boxX + padding + swatch + 8, boxY + padding + i * pitch, curve.label, BLACK);
  });
}

function drawCurve(raster: Raster, curve: Curve, xr: [number, number], yr: [number, number]): void {
  const n = curve.xs.length;
  const sx = PLOT_W / (xr[1] - xr[0]);
  const sy = PLOT_H / (yr[1] - yr[0]);
  const xs: number[] = new Array(n);
  const ys: number[] = new Array(n);
  for (let i = 0; i < n; i++) {
    xs[i] = PLOT_X + ((curve.xs[i] as number) - xr[0]) * sx;
    ys[i] = PLOT_Y + PLOT_H - ((curve.ys[i] as number) - yr[0]) * sy;
  }
  if (n === 1) {
    raster.fillRect(Math.round(xs[0] as number) - 2, Math.round(ys[0] as number) - 2, 5, 5, curve.color);
    return;
  }
  raster.polyline(xs, ys, curve.color, 2);
}

/** Rasterize and encode without touching the filesystem output path. */
export function renderToBuffer(spec: FigureSpec): Buffer {
  validateSpec(spec);
  const curves = loadCurves(spec);
  const xr = dataRange(curves, (c) => c.xs, spec.xRange);
  const yr = dataRange(curves, (c) => c.ys, spec.yRange);
  const raster = new Raster(WIDTH, HEIGHT);
  const diagnostics = spec.mode === "diagnostics";
  drawAxes(raster, xr, yr, diagnostics ? "t" : "x", diagnostics ? "energy" : "u");
  for (const curve of curves) {
    drawCurve(raster, curve, xr, yr);
  }
  drawLegend(raster, curves);
  return encodePng(raster);
}

/** Full render: refuses to clobber an existing file unless `force` is set. */
export function render(spec: FigureSpec): void {
  validateSpec(spec);
  if (!spec.force && existsSync(spec.out)) {
    throw new FigureError(`output '${spec.out}' already exists (use --force to overwrite)`);
  }
  writeFileSync(spec.out, renderToBuffer(spec));
}
