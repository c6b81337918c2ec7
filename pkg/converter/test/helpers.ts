// Shared test plumbing: fixture paths and the canonical JSON encoding that
// fixtures/make_fixtures.py mirrors on the Python side.

import * as fs from "fs";
import * as path from "path";
import { NdArray, PyObject, PyValue } from "../src/unpickle";
import { csrRow, toCsr, toDense } from "../src/ndarray";

export const FIXTURES = path.resolve(__dirname, "..", "fixtures");

export function fixture(...parts: string[]): string {
  return path.join(FIXTURES, ...parts);
}

export function readJson(...parts: string[]): any {
  return JSON.parse(fs.readFileSync(fixture(...parts), "utf8"));
}

export function readFixture(...parts: string[]): Buffer {
  return fs.readFileSync(fixture(...parts));
}

/** Mirror of canon() in make_fixtures.py. */
export function canon(v: PyValue): unknown {
  if (v === null || typeof v === "boolean" || typeof v === "string") return v;
  if (typeof v === "number") {
    if (Number.isNaN(v)) return { f: "nan" };
    if (v === Infinity) return { f: "inf" };
    if (v === -Infinity) return { f: "-inf" };
    if (Object.is(v, -0)) return { f: "-0.0" };
    return v;
  }
  if (v instanceof Uint8Array) return { b: Array.from(v) };
  if (Array.isArray(v)) return { l: v.map(canon) };
  if (v instanceof Map) {
    return { d: [...v.entries()].map(([k, x]) => [canon(k), canon(x)]) };
  }
  if (v instanceof NdArray) {
    const dense = toDense(v);
    return { a: { shape: dense.shape, values: dense.values } };
  }
  if (v instanceof PyObject && v.cls.name === "csr_matrix") {
    const m = toCsr(v);
    const rows: Array<Array<[number, number]>> = [];
    for (let i = 0; i < m.rows; i++) rows.push(csrRow(m, i));
    return { csr: { shape: [m.rows, m.cols], rows } };
  }
  throw new Error(`no canonical form for ${Object.prototype.toString.call(v)}`);
}
