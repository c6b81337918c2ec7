// Conversion of the npz-packaged citation graph (the large Cora variant).
// The archive stores a directed adjacency matrix, a sparse attribute matrix
// and an integer label vector as CSR component arrays.

import * as fs from "fs";
import * as path from "path";
import { readNpz } from "./npy";
import { DenseArray, SparseCsr, csrFromParts, csrRow } from "./ndarray";
import { AssembledGraph, ConvertError, canonicalEdges } from "./planetoid";

const NPZ_NAMES = ["cora_full.npz", "cora-full.npz", "cora.npz"];

export interface NpzGraphParts {
  adj: SparseCsr;
  attr: SparseCsr;
  labels: number[];
  file: string;
}

function member(data: Map<string, DenseArray>, key: string, file: string): DenseArray {
  const v = data.get(key);
  if (!v) throw new ConvertError(`${file}: missing member '${key}'`);
  return v;
}

function csrMembers(data: Map<string, DenseArray>, prefix: string, file: string): SparseCsr {
  const shape = member(data, `${prefix}_shape`, file).values;
  if (shape.length !== 2) throw new ConvertError(`${file}: ${prefix}_shape is not 2-d`);
  try {
    return csrFromParts(
      member(data, `${prefix}_data`, file).values,
      member(data, `${prefix}_indices`, file).values,
      member(data, `${prefix}_indptr`, file).values,
      shape[0],
      shape[1],
    );
  } catch (err) {
    throw new ConvertError(`${file}: ${prefix} matrix: ${(err as Error).message}`);
  }
}

/** Locate and read the npz archive in a raw directory. */
export function readNpzGraphDir(dir: string): NpzGraphParts {
  const name = NPZ_NAMES.find((candidate) => fs.existsSync(path.join(dir, candidate)));
  if (!name) {
    throw new ConvertError(`no npz archive in ${dir} (looked for ${NPZ_NAMES.join(", ")})`);
  }
  let data: Map<string, DenseArray>;
  try {
    data = readNpz(fs.readFileSync(path.join(dir, name)));
  } catch (err) {
    throw new ConvertError(`${name}: ${(err as Error).message}`);
  }
  const adj = csrMembers(data, "adj", name);
  const attr = csrMembers(data, "attr", name);
  if (adj.rows !== adj.cols) {
    throw new ConvertError(`${name}: adjacency is ${adj.rows}x${adj.cols}, not square`);
  }
  if (attr.rows !== adj.rows) {
    throw new ConvertError(
      `${name}: ${attr.rows} attribute rows for ${adj.rows} nodes`,
    );
  }
  const labelsArr = member(data, "labels", name);
  if (labelsArr.values.length !== adj.rows) {
    throw new ConvertError(`${name}: ${labelsArr.values.length} labels for ${adj.rows} nodes`);
  }
  const labels = labelsArr.values.map((v, i) => {
    if (!Number.isInteger(v) || v < 0) {
      throw new ConvertError(`${name}: bad label ${v} at node ${i}`);
    }
    return v;
  });
  return { adj, attr, labels, file: name };
}

function* adjacencyPairs(adj: SparseCsr): Generator<[number, number]> {
  for (let i = 0; i < adj.rows; i++) {
    for (let k = adj.indptr[i]; k < adj.indptr[i + 1]; k++) {
      if (adj.data[k] !== 0) yield [i, adj.indices[k]];
    }
  }
}

/**
 * Assemble the npz parts into a graph: adjacency symmetrized and
 * deduplicated, self loops stripped, node order and attribute values
 * preserved.
 *
 * The stored adjacency lists each link once in one direction, so the listed
 * entry count is also the link count.
 */
export function assembleNpzGraph(parts: NpzGraphParts, minClassSize = 0): AssembledGraph {
  const n = parts.adj.rows;
  const d = parts.attr.cols;

  let keep: number[] | null = null;
  let labels = parts.labels;
  if (minClassSize > 1) {
    const byClass = new Map<number, number>();
    for (const lab of labels) byClass.set(lab, (byClass.get(lab) ?? 0) + 1);
    const keptClasses = [...byClass.keys()]
      .filter((cls) => (byClass.get(cls) ?? 0) >= minClassSize)
      .sort((a, b) => a - b);
    if (keptClasses.length === 0) {
      throw new ConvertError(`no class has ${minClassSize} or more nodes`);
    }
    const newClass = new Map<number, number>();
    keptClasses.forEach((cls, at) => newClass.set(cls, at));
    keep = [];
    const remapped: number[] = [];
    for (let i = 0; i < n; i++) {
      const cls = newClass.get(labels[i]);
      if (cls !== undefined) {
        keep.push(i);
        remapped.push(cls);
      }
    }
    labels = remapped;
  }

  const oldToNew = new Map<number, number>();
  if (keep) keep.forEach((old, at) => oldToNew.set(old, at));
  const mapped = function* (): Generator<[number, number]> {
    for (const [u, v] of adjacencyPairs(parts.adj)) {
      if (!keep) {
        yield [u, v];
        continue;
      }
      const nu = oldToNew.get(u);
      const nv = oldToNew.get(v);
      if (nu !== undefined && nv !== undefined) yield [nu, nv];
    }
  };

  const numNodes = keep ? keep.length : n;
  const { edges, counts } = canonicalEdges(mapped(), numNodes);
  // one stored entry per link in this format
  counts.links = counts.listed;

  const nodeIds = keep ?? Array.from({ length: n }, (_, i) => i);
  const featureRows = nodeIds.map((old, i) => {
    const row = csrRow(parts.attr, old).filter(([, v]) => v !== 0);
    for (const [j, v] of row) {
      if (v < 0) throw new ConvertError(`negative feature value ${v} at node ${i} column ${j}`);
    }
    return row;
  });

  let numClasses = 0;
  for (const lab of labels) if (lab + 1 > numClasses) numClasses = lab + 1;
  if (numClasses === 0) throw new ConvertError("empty label vector");

  return { numNodes, numFeatures: d, numClasses, featureRows, labels, edges, counts };
}
