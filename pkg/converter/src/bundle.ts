// Bundle directory IO. A bundle is four plain-text files:
//
//   meta.json      {"name", "num_nodes", "num_edges", "num_features",
//                   "num_classes"}, two-space indented, trailing newline
//   edges.txt      one "u v" per line, u < v, sorted ascending by (u, v)
//   features.txt   line i = node i's nonzeros as "idx:value" pairs, indices
//                  strictly ascending, shortest round-trip decimals; an
//                  empty line is an all-zero row
//   labels.txt     line i = node i's class id
//
// The writer must stay byte-compatible with the training library that
// consumes these bundles; tests pin that by diffing against bundles the
// library itself wrote.

import * as fs from "fs";
import * as path from "path";
import { formatDouble } from "./pyfloat";

export class BundleError extends Error {
  constructor(
    public readonly file: string,
    public readonly line: number | null,
    message: string,
  ) {
    super(line === null ? `${file}: ${message}` : `${file}:${line}: ${message}`);
    this.name = "BundleError";
  }
}

export interface BundleGraph {
  name: string;
  numNodes: number;
  numFeatures: number;
  numClasses: number;
  /** canonical edges: u < v, sorted by (u, v), no duplicates */
  edges: Array<[number, number]>;
  /** per node: (column, value) pairs with strictly ascending columns */
  featureRows: Array<Array<[number, number]>>;
  labels: number[];
}

export function writeBundle(graph: BundleGraph, outDir: string): void {
  fs.mkdirSync(outDir, { recursive: true });
  const meta = {
    name: graph.name,
    num_nodes: graph.numNodes,
    num_edges: graph.edges.length,
    num_features: graph.numFeatures,
    num_classes: graph.numClasses,
  };
  fs.writeFileSync(path.join(outDir, "meta.json"), JSON.stringify(meta, null, 2) + "\n");

  const edgeLines = graph.edges.map(([u, v]) => `${u} ${v}\n`);
  fs.writeFileSync(path.join(outDir, "edges.txt"), edgeLines.join(""));

  const featLines: string[] = [];
  for (let i = 0; i < graph.numNodes; i++) {
    const row = graph.featureRows[i] ?? [];
    featLines.push(row.map(([j, v]) => `${j}:${formatDouble(v)}`).join(" ") + "\n");
  }
  fs.writeFileSync(path.join(outDir, "features.txt"), featLines.join(""));

  fs.writeFileSync(path.join(outDir, "labels.txt"), graph.labels.map((l) => `${l}\n`).join(""));
}

export interface LoadedBundle {
  meta: {
    name: string;
    num_nodes: number;
    num_edges: number;
    num_features: number;
    num_classes: number;
  };
  edges: Array<[number, number]>;
  /** nonzero feature entries per node */
  featureRows: Array<Array<[number, number]>>;
  labels: number[];
  minFeatureValue: number;
}

function readLines(dir: string, file: string): string[] {
  const full = path.join(dir, file);
  if (!fs.existsSync(full)) throw new BundleError(file, null, "file missing");
  const text = fs.readFileSync(full, "latin1");
  const lines = text.split("\n");
  if (lines.length && lines[lines.length - 1] === "") lines.pop();
  return lines;
}

// Strict ASCII decimal integer, matching what the training library accepts.
function parseIntStrict(text: string): number | null {
  if (!/^-?\d+$/.test(text)) return null;
  return Number(text);
}

function metaInt(meta: Record<string, unknown>, key: string): number {
  const v = meta[key];
  if (typeof v !== "number" || !Number.isInteger(v) || v < 0) {
    throw new BundleError("meta.json", null, `field ${key} must be a non-negative integer`);
  }
  return v;
}

/**
 * Load and validate a bundle directory. Applies the same structural checks
 * the training library applies on load, so a bundle that passes here is
 * loadable there.
 */
export function readBundle(dir: string): LoadedBundle {
  const metaPath = path.join(dir, "meta.json");
  if (!fs.existsSync(metaPath)) {
    throw new BundleError("meta.json", null, `file missing in ${dir}`);
  }
  let rawMeta: unknown;
  try {
    rawMeta = JSON.parse(fs.readFileSync(metaPath, "utf8"));
  } catch (err) {
    throw new BundleError("meta.json", null, `invalid JSON: ${(err as Error).message}`);
  }
  if (typeof rawMeta !== "object" || rawMeta === null || Array.isArray(rawMeta)) {
    throw new BundleError("meta.json", null, "top level is not an object");
  }
  const metaObj = rawMeta as Record<string, unknown>;
  for (const key of ["name", "num_nodes", "num_edges", "num_features", "num_classes"]) {
    if (!(key in metaObj)) throw new BundleError("meta.json", null, `missing key '${key}'`);
  }
  if (typeof metaObj.name !== "string") {
    throw new BundleError("meta.json", null, "field name must be a string");
  }
  const meta = {
    name: metaObj.name,
    num_nodes: metaInt(metaObj, "num_nodes"),
    num_edges: metaInt(metaObj, "num_edges"),
    num_features: metaInt(metaObj, "num_features"),
    num_classes: metaInt(metaObj, "num_classes"),
  };
  const n = meta.num_nodes;
  const d = meta.num_features;
  const c = meta.num_classes;

  const edges: Array<[number, number]> = [];
  const seen = new Set<number>();
  const edgeLines = readLines(dir, "edges.txt");
  edgeLines.forEach((lineText, idx) => {
    const lineNo = idx + 1;
    const parts = lineText.split(" ");
    if (parts.length !== 2) {
      throw new BundleError("edges.txt", lineNo, `expected 'u v', got '${lineText}'`);
    }
    const u = parseIntStrict(parts[0]);
    const v = parseIntStrict(parts[1]);
    if (u === null || v === null) {
      throw new BundleError("edges.txt", lineNo, `non-integer endpoint in '${lineText}'`);
    }
    if (u === v) throw new BundleError("edges.txt", lineNo, `self loop on node ${u}`);
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw new BundleError("edges.txt", lineNo, `endpoint out of range in '${lineText}'`);
    }
    if (u >= v) {
      throw new BundleError("edges.txt", lineNo, `edge not in canonical u < v form: '${lineText}'`);
    }
    const key = u * n + v;
    if (seen.has(key)) throw new BundleError("edges.txt", lineNo, `duplicate edge ${u} ${v}`);
    seen.add(key);
    edges.push([u, v]);
  });
  if (edges.length !== meta.num_edges) {
    throw new BundleError(
      "edges.txt", null,
      `meta declares ${meta.num_edges} edges but file has ${edges.length}`,
    );
  }

  const featLines = readLines(dir, "features.txt");
  if (featLines.length !== n) {
    throw new BundleError("features.txt", null, `expected ${n} rows, found ${featLines.length}`);
  }
  let minFeatureValue = Infinity;
  const featureRows: Array<Array<[number, number]>> = featLines.map((lineText, idx) => {
    const lineNo = idx + 1;
    if (lineText === "") return [];
    const row: Array<[number, number]> = [];
    let prev = -1;
    for (const token of lineText.split(" ")) {
      const at = token.indexOf(":");
      const idxS = at < 0 ? token : token.slice(0, at);
      const valS = at < 0 ? "" : token.slice(at + 1);
      const j = parseIntStrict(idxS);
      const v = /^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(valS) ? Number(valS) : NaN;
      if (j === null || Number.isNaN(v)) {
        throw new BundleError("features.txt", lineNo, `malformed token '${token}'`);
      }
      if (j < 0 || j >= d) {
        throw new BundleError("features.txt", lineNo, `feature index ${j} out of range`);
      }
      if (j <= prev) {
        throw new BundleError("features.txt", lineNo, `feature indices not strictly ascending at ${j}`);
      }
      if (!Number.isFinite(v)) {
        throw new BundleError("features.txt", lineNo, `non-finite value '${valS}'`);
      }
      prev = j;
      row.push([j, v]);
      if (v < minFeatureValue) minFeatureValue = v;
    }
    return row;
  });

  const labelLines = readLines(dir, "labels.txt");
  if (labelLines.length !== n) {
    throw new BundleError("labels.txt", null, `expected ${n} rows, found ${labelLines.length}`);
  }
  const labels = labelLines.map((lineText, idx) => {
    const lineNo = idx + 1;
    const lab = parseIntStrict(lineText);
    if (lab === null) {
      throw new BundleError("labels.txt", lineNo, `non-integer label '${lineText}'`);
    }
    if (lab < 0 || lab >= c) {
      throw new BundleError("labels.txt", lineNo, `label ${lab} out of range [0, ${c})`);
    }
    return lab;
  });

  return { meta, edges, featureRows, labels, minFeatureValue };
}
