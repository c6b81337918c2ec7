// One-shot conversion: read a raw archive directory, assemble the graph,
// write the bundle plus a conversion.json record of the edge accounting and
// source file digests.

import * as crypto from "crypto";
import * as fs from "fs";
import * as path from "path";
import { writeBundle } from "./bundle";
import { assembleNpzGraph, readNpzGraphDir } from "./corafull";
import {
  AssembledGraph,
  ConvertError,
  assemblePlanetoid,
  readPlanetoidDir,
} from "./planetoid";

export const DATASETS = ["cora", "citeseer", "pubmed", "cora-full"] as const;
export type DatasetName = (typeof DATASETS)[number];

export interface ConvertOptions {
  minClassSize?: number;
}

export interface ConvertResult {
  dataset: DatasetName;
  outDir: string;
  numNodes: number;
  numFeatures: number;
  numClasses: number;
  edges: { listed: number; links: number; unique: number };
  sourceFiles: Record<string, string>; // name -> sha256
}

export function isDatasetName(name: string): name is DatasetName {
  return (DATASETS as readonly string[]).includes(name);
}

function planetoidFiles(name: string): string[] {
  return ["x", "y", "tx", "ty", "allx", "ally", "graph", "test.index"].map(
    (part) => `ind.${name}.${part}`,
  );
}

function sha256File(file: string): string {
  return crypto.createHash("sha256").update(fs.readFileSync(file)).digest("hex");
}

function digestSources(rawDir: string, files: string[]): Record<string, string> {
  const out: Record<string, string> = {};
  for (const file of files) {
    out[file] = sha256File(path.join(rawDir, file));
  }
  return out;
}

/** Convert one dataset's raw archive directory into a bundle directory. */
export function convertDataset(
  dataset: DatasetName,
  rawDir: string,
  outDir: string,
  options: ConvertOptions = {},
): ConvertResult {
  if (!fs.existsSync(rawDir)) throw new ConvertError(`raw directory ${rawDir} does not exist`);

  let graph: AssembledGraph;
  let sourceFiles: Record<string, string>;
  if (dataset === "cora-full") {
    const parts = readNpzGraphDir(rawDir);
    graph = assembleNpzGraph(parts, options.minClassSize ?? 0);
    sourceFiles = digestSources(rawDir, [parts.file]);
  } else {
    if (options.minClassSize) {
      throw new ConvertError("--min-class-size only applies to cora-full");
    }
    const raw = readPlanetoidDir(rawDir, dataset);
    graph = assemblePlanetoid(raw);
    sourceFiles = digestSources(rawDir, planetoidFiles(dataset));
  }

  writeBundle(
    {
      name: dataset,
      numNodes: graph.numNodes,
      numFeatures: graph.numFeatures,
      numClasses: graph.numClasses,
      edges: graph.edges,
      featureRows: graph.featureRows,
      labels: graph.labels,
    },
    outDir,
  );

  const record = {
    dataset,
    edges: graph.counts,
    options: { min_class_size: options.minClassSize ?? 0 },
    source_files: sourceFiles,
  };
  fs.writeFileSync(
    path.join(outDir, "conversion.json"),
    JSON.stringify(record, null, 2) + "\n",
  );

  return {
    dataset,
    outDir,
    numNodes: graph.numNodes,
    numFeatures: graph.numFeatures,
    numClasses: graph.numClasses,
    edges: graph.counts,
    sourceFiles,
  };
}
