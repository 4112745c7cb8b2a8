import Papa from "papaparse";

import { EmptyInput, SchemaMismatch } from "./errors.js";

/** A parsed trajectory: times, one series per state variable, and the
 * per-step sign-variation annotation. */
export interface Run {
  n: number;
  t: number[];
  states: number[][]; // states[i] is the series for x_{i+1}
  sMinus: number[];
}

/** Parse CSV text with header t,x1,...,xn,s_minus into a Run.
 *
 * Throws SchemaMismatch when the header or any cell violates the contract,
 * EmptyInput when the header is valid but no data rows follow.
 */
export function parseRun(text: string): Run {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaMismatch(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new SchemaMismatch("no header row");
  }
  const header = rows[0];
  const n = header.length - 2;
  if (n < 1 || header[0] !== "t" || header[header.length - 1] !== "s_minus") {
    throw new SchemaMismatch(
      `header must be t,x1,...,xn,s_minus; got [${header.join(",")}]`,
    );
  }
  for (let i = 1; i <= n; i++) {
    if (header[i] !== `x${i}`) {
      throw new SchemaMismatch(`column ${i} named ${header[i]}, expected x${i}`);
    }
  }
  const body = rows.slice(1);
  if (body.length === 0) {
    throw new EmptyInput("header only, no data rows");
  }
  const t: number[] = [];
  const states: number[][] = Array.from({ length: n }, () => []);
  const sMinus: number[] = [];
  body.forEach((row, k) => {
    if (row.length !== n + 2) {
      throw new SchemaMismatch(
        `row ${k + 1} has ${row.length} fields, expected ${n + 2}`,
      );
    }
    const vals = row.map(Number);
    if (vals.some((v) => !Number.isFinite(v))) {
      throw new SchemaMismatch(`row ${k + 1} has a non-numeric field`);
    }
    t.push(vals[0]);
    for (let i = 0; i < n; i++) {
      states[i].push(vals[i + 1]);
    }
    sMinus.push(vals[n + 1]);
  });
  return { n, t, states, sMinus };
}
