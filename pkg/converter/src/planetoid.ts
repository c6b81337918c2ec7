// Readers for the classic citation-network archives distributed as eight
// files per dataset:
//
//   ind.<name>.x / .tx / .allx   CSR feature matrices (labeled train rows,
//                                test rows, all non-test rows)
//   ind.<name>.y / .ty / .ally   matching one-hot label arrays
//   ind.<name>.graph             adjacency dict {node: [neighbors]}
//   ind.<name>.test.index        text file, one test node id per line
//
// Test rows are stored in a shuffled order; test.index says where each row
// of tx/ty lands in the full graph's node numbering. Node ids are preserved
// exactly as the archive defines them.

import * as fs from "fs";
import * as path from "path";
import { PyValue, unpickleBuffer } from "./unpickle";
import { SparseCsr, DenseArray, csrRow, toCsr, toDense } from "./ndarray";

export class ConvertError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConvertError";
  }
}

export interface PlanetoidRaw {
  x: SparseCsr;
  tx: SparseCsr;
  allx: SparseCsr;
  y: DenseArray;
  ty: DenseArray;
  ally: DenseArray;
  graph: Map<number, number[]>;
  testIndex: number[];
}

export interface EdgeCounts {
  /** adjacency entries as listed in the archive (directed, with repeats) */
  listed: number;
  /** links the listing describes: non-self entries / 2 plus self loops */
  links: number;
  /** deduplicated undirected edges with self loops stripped */
  unique: number;
}

export interface AssembledGraph {
  numNodes: number;
  numFeatures: number;
  numClasses: number;
  featureRows: Array<Array<[number, number]>>;
  labels: number[];
  edges: Array<[number, number]>;
  counts: EdgeCounts;
}

function loadPickle(dir: string, file: string): PyValue {
  const full = path.join(dir, file);
  if (!fs.existsSync(full)) throw new ConvertError(`${file}: file missing in ${dir}`);
  try {
    return unpickleBuffer(fs.readFileSync(full));
  } catch (err) {
    throw new ConvertError(`${file}: ${(err as Error).message}`);
  }
}

function asGraphDict(v: PyValue, file: string): Map<number, number[]> {
  if (!(v instanceof Map)) throw new ConvertError(`${file}: expected an adjacency dict`);
  const out = new Map<number, number[]>();
  for (const [k, nbrs] of v) {
    if (typeof k !== "number" || !Number.isInteger(k)) {
      throw new ConvertError(`${file}: non-integer node id ${String(k)}`);
    }
    if (!Array.isArray(nbrs)) throw new ConvertError(`${file}: neighbors of ${k} not a list`);
    const ids = nbrs.map((x) => {
      if (typeof x !== "number" || !Number.isInteger(x)) {
        throw new ConvertError(`${file}: non-integer neighbor of ${k}`);
      }
      return x;
    });
    out.set(k, ids);
  }
  return out;
}

/** Read the eight archive files for one dataset. */
export function readPlanetoidDir(dir: string, name: string): PlanetoidRaw {
  const pick = (part: string) => loadPickle(dir, `ind.${name}.${part}`);
  const sparse = (part: string) => {
    try {
      return toCsr(pick(part));
    } catch (err) {
      if (err instanceof ConvertError) throw err;
      throw new ConvertError(`ind.${name}.${part}: ${(err as Error).message}`);
    }
  };
  const dense = (part: string) => {
    try {
      return toDense(pick(part));
    } catch (err) {
      if (err instanceof ConvertError) throw err;
      throw new ConvertError(`ind.${name}.${part}: ${(err as Error).message}`);
    }
  };

  const indexFile = `ind.${name}.test.index`;
  const indexPath = path.join(dir, indexFile);
  if (!fs.existsSync(indexPath)) throw new ConvertError(`${indexFile}: file missing in ${dir}`);
  const testIndex = fs
    .readFileSync(indexPath, "ascii")
    .split("\n")
    .filter((line) => line.trim() !== "")
    .map((line) => {
      const v = parseInt(line.trim(), 10);
      if (Number.isNaN(v) || v < 0) throw new ConvertError(`${indexFile}: bad node id '${line}'`);
      return v;
    });

  return {
    x: sparse("x"),
    tx: sparse("tx"),
    allx: sparse("allx"),
    y: dense("y"),
    ty: dense("ty"),
    ally: dense("ally"),
    graph: asGraphDict(pick("graph"), `ind.${name}.graph`),
    testIndex,
  };
}

function argmax(row: number[]): number {
  let best = 0;
  for (let i = 1; i < row.length; i++) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

function denseRow(a: DenseArray, row: number): number[] {
  const cols = a.shape.length === 2 ? a.shape[1] : 1;
  return a.values.slice(row * cols, (row + 1) * cols);
}

/** Collect edge counts and the canonical deduplicated edge list. */
export function canonicalEdges(
  pairs: Iterable<[number, number]>,
  numNodes: number,
): { edges: Array<[number, number]>; counts: EdgeCounts } {
  let listed = 0;
  let selfListed = 0;
  const seen = new Set<number>();
  for (const [u, v] of pairs) {
    if (u < 0 || v < 0 || u >= numNodes || v >= numNodes) {
      throw new ConvertError(`edge endpoint out of range: ${u} ${v} with ${numNodes} nodes`);
    }
    listed++;
    if (u === v) {
      selfListed++;
      continue;
    }
    const lo = Math.min(u, v);
    const hi = Math.max(u, v);
    seen.add(lo * numNodes + hi);
  }
  const edges: Array<[number, number]> = [];
  for (const key of seen) {
    edges.push([Math.floor(key / numNodes), key % numNodes]);
  }
  edges.sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  return {
    edges,
    counts: {
      listed,
      links: Math.floor((listed - selfListed) / 2) + selfListed,
      unique: edges.length,
    },
  };
}

function* graphPairs(graph: Map<number, number[]>): Generator<[number, number]> {
  for (const [u, nbrs] of graph) {
    for (const v of nbrs) yield [u, v];
  }
}

/**
 * Assemble the archive parts into one graph over the archive's own node
 * numbering.
 *
 * Rows of allx keep their positions 0..allx.rows-1; test rows are placed at
 * the node ids given by test.index. When the test index range has holes
 * (isolated nodes that never made it into tx/ty), the missing nodes get
 * all-zero feature and label rows, which lands them in class 0.
 */
export function assemblePlanetoid(raw: PlanetoidRaw): AssembledGraph {
  const allxRows = raw.allx.rows;
  const d = raw.allx.cols;
  if (raw.tx.cols !== d || raw.x.cols !== d) {
    throw new ConvertError(
      `feature width mismatch: allx has ${d}, tx has ${raw.tx.cols}, x has ${raw.x.cols}`,
    );
  }
  const c = raw.ally.shape.length === 2 ? raw.ally.shape[1] : 0;
  if (c < 1) throw new ConvertError("ally is not a 2-d one-hot array");
  const tyCols = raw.ty.shape.length === 2 ? raw.ty.shape[1] : 0;
  if (tyCols !== c) {
    throw new ConvertError(`label width mismatch: ally has ${c} classes, ty has ${tyCols}`);
  }
  if (raw.ally.shape[0] !== allxRows) {
    throw new ConvertError(
      `allx has ${allxRows} rows but ally has ${raw.ally.shape[0]}`,
    );
  }
  if (raw.ty.shape[0] !== raw.tx.rows) {
    throw new ConvertError(`tx has ${raw.tx.rows} rows but ty has ${raw.ty.shape[0]}`);
  }

  const test = raw.testIndex;
  if (test.length !== raw.tx.rows) {
    throw new ConvertError(
      `test.index lists ${test.length} nodes but tx has ${raw.tx.rows} rows`,
    );
  }
  if (test.length === 0) throw new ConvertError("test.index is empty");
  const sorted = [...test].sort((a, b) => a - b);
  for (let i = 1; i < sorted.length; i++) {
    if (sorted[i] === sorted[i - 1]) {
      throw new ConvertError(`duplicate test node id ${sorted[i]}`);
    }
  }

  // Node count: every id the archive mentions anywhere.
  let maxId = sorted[sorted.length - 1];
  for (const [u, nbrs] of raw.graph) {
    if (u > maxId) maxId = u;
    for (const v of nbrs) if (v > maxId) maxId = v;
  }
  maxId = Math.max(maxId, allxRows - 1);
  const n = maxId + 1;

  // The test block covers [base, base+extLen); ids missing from test.index
  // inside that range are the isolated zero-row nodes.
  const base = sorted[0];
  const extLen = sorted[sorted.length - 1] - base + 1;
  if (base !== allxRows) {
    throw new ConvertError(
      `test ids start at ${base} but allx covers rows 0..${allxRows - 1}`,
    );
  }
  if (allxRows + extLen !== n) {
    throw new ConvertError(
      `node count mismatch: ${allxRows} non-test rows plus test range of ` +
      `${extLen} does not cover ${n} nodes`,
    );
  }

  // rank of each present test id within the sorted order = its tx/ty row
  // after the block is laid out contiguously
  const rankOf = new Map<number, number>();
  sorted.forEach((id, k) => rankOf.set(id, k));

  // Stacked layout: rows [0, allxRows) = allx, rows [allxRows, n) = the test
  // block in ascending id order. perm maps final node id -> stacked row.
  const perm: number[] = [];
  for (let i = 0; i < n; i++) perm.push(i);
  for (let k = 0; k < test.length; k++) {
    perm[test[k]] = allxRows + (sorted[k] - base);
  }

  const stackedFeatureRow = (j: number): Array<[number, number]> => {
    if (j < allxRows) return csrRow(raw.allx, j);
    const id = base + (j - allxRows);
    const k = rankOf.get(id);
    return k === undefined ? [] : csrRow(raw.tx, k);
  };
  const stackedLabelRow = (j: number): number[] => {
    if (j < allxRows) return denseRow(raw.ally, j);
    const id = base + (j - allxRows);
    const k = rankOf.get(id);
    return k === undefined ? new Array<number>(c).fill(0) : denseRow(raw.ty, k);
  };

  const featureRows: Array<Array<[number, number]>> = [];
  const labels: number[] = [];
  for (let i = 0; i < n; i++) {
    const row = stackedFeatureRow(perm[i]).filter(([, v]) => v !== 0);
    for (const [j, v] of row) {
      if (v < 0) throw new ConvertError(`negative feature value ${v} at node ${i} column ${j}`);
    }
    featureRows.push(row);
    labels.push(argmax(stackedLabelRow(perm[i])));
  }

  const { edges, counts } = canonicalEdges(graphPairs(raw.graph), n);
  return { numNodes: n, numFeatures: d, numClasses: c, featureRows, labels, edges, counts };
}
