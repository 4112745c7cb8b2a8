import { readFileSync, writeFileSync } from "node:fs";

import { parseRun, Run } from "./csv.js";
import { SchemaMismatch } from "./errors.js";
import {
  document,
  fmtTick,
  line,
  linearScale,
  niceTicks,
  polyline,
  text,
} from "./svg.js";

export type Layout = "single" | "grid2x2";

export interface FigureSpec {
  input: string;
  layout: Layout;
  out: string;
  xLabel?: string;
  yLabel?: string;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

interface Panel {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

function extent(series: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const v of s) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function axes(
  p: Panel,
  tLo: number,
  tHi: number,
  yLo: number,
  yHi: number,
  xLabel: string,
  yLabel: string,
): { body: string[]; sx: (v: number) => number; sy: (v: number) => number } {
  const sx = linearScale(tLo, tHi, p.x0, p.x0 + p.w);
  const sy = linearScale(yLo, yHi, p.y0 + p.h, p.y0);
  const body: string[] = [];
  body.push(line(p.x0, p.y0 + p.h, p.x0 + p.w, p.y0 + p.h));
  body.push(line(p.x0, p.y0, p.x0, p.y0 + p.h));
  for (const v of niceTicks(tLo, tHi, 6)) {
    const x = sx(v);
    body.push(line(x, p.y0 + p.h, x, p.y0 + p.h + 4));
    body.push(text(x, p.y0 + p.h + 16, fmtTick(v), 'text-anchor="middle"'));
  }
  for (const v of niceTicks(yLo, yHi, 5)) {
    const y = sy(v);
    body.push(line(p.x0 - 4, y, p.x0, y));
    body.push(
      text(p.x0 - 7, y + 3.5, fmtTick(v), 'text-anchor="end"'),
    );
  }
  body.push(
    text(p.x0 + p.w / 2, p.y0 + p.h + 32, xLabel, 'text-anchor="middle"'),
  );
  body.push(
    text(
      p.x0 - 42,
      p.y0 + p.h / 2,
      yLabel,
      `text-anchor="middle" transform="rotate(-90 ${p.x0 - 42} ${p.y0 + p.h / 2})"`,
    ),
  );
  return { body, sx, sy };
}

function renderSingle(run: Run, spec: FigureSpec): string {
  const width = 800;
  const height = 500;
  const p: Panel = { x0: 70, y0: 30, w: width - 100, h: height - 100 };
  const [yLo, yHi] = extent(run.states);
  const tLo = run.t[0];
  const tHi = run.t[run.t.length - 1];
  const { body, sx, sy } = axes(
    p,
    tLo,
    tHi,
    yLo,
    yHi,
    spec.xLabel ?? "t",
    spec.yLabel ?? "x_i(t)",
  );
  run.states.forEach((s, i) => {
    body.push(polyline(run.t, s, sx, sy, PALETTE[i % PALETTE.length]));
  });
  // legend in the top-right corner of the axes
  run.states.forEach((_, i) => {
    const lx = p.x0 + p.w - 70;
    const ly = p.y0 + 14 + 16 * i;
    body.push(line(lx, ly - 4, lx + 22, ly - 4, PALETTE[i % PALETTE.length]));
    body.push(text(lx + 28, ly, `x${i + 1}`));
  });
  return document(width, height, body);
}

function renderGrid(run: Run, spec: FigureSpec): string {
  if (run.n > 4) {
    throw new SchemaMismatch(
      `grid2x2 layout supports at most 4 variables, got ${run.n}`,
    );
  }
  const width = 900;
  const height = 600;
  const cellW = width / 2;
  const cellH = height / 2;
  const tLo = run.t[0];
  const tHi = run.t[run.t.length - 1];
  const body: string[] = [];
  run.states.forEach((s, i) => {
    const col = i % 2;
    const row = Math.floor(i / 2);
    const p: Panel = {
      x0: col * cellW + 70,
      y0: row * cellH + 30,
      w: cellW - 100,
      h: cellH - 90,
    };
    const [yLo, yHi] = extent([s]);
    const { body: ax, sx, sy } = axes(
      p,
      tLo,
      tHi,
      yLo,
      yHi,
      spec.xLabel ?? "t",
      spec.yLabel ?? `x${i + 1}(t)`,
    );
    body.push(...ax);
    body.push(polyline(run.t, s, sx, sy, PALETTE[i % PALETTE.length]));
  });
  return document(width, height, body);
}

/** Render a trajectory CSV into an SVG figure.  Throws SchemaMismatch or
 * EmptyInput before writing anything when the input is invalid. */
export function render(spec: FigureSpec): void {
  const textIn = readFileSync(spec.input, "utf8");
  const run = parseRun(textIn);
  const out =
    spec.layout === "grid2x2" ? renderGrid(run, spec) : renderSingle(run, spec);
  writeFileSync(spec.out, out);
}
