// Bundle verification against the published statistics of the supported
// datasets. Edge counts are checked against both the raw count recorded at
// conversion time and the deduplicated count in the bundle, because the
// published numbers follow the archives' own counting convention.

import * as fs from "fs";
import * as path from "path";
import { BundleError, readBundle } from "./bundle";

export interface ExpectedStats {
  nodes: number;
  edges: number;
  features: number;
  classes: number;
}

export const PUBLISHED_STATS: Record<string, ExpectedStats> = {
  cora: { nodes: 2708, edges: 5429, features: 1433, classes: 7 },
  citeseer: { nodes: 3327, edges: 4732, features: 3703, classes: 6 },
  pubmed: { nodes: 19717, edges: 44338, features: 500, classes: 3 },
  "cora-full": { nodes: 19793, edges: 65311, features: 8710, classes: 67 },
};

export interface VerifyCheck {
  name: string;
  ok: boolean;
  detail: string;
}

export interface VerifyReport {
  ok: boolean;
  checks: VerifyCheck[];
}

interface ConversionRecord {
  edges?: { listed?: number; links?: number; unique?: number };
}

function readConversionRecord(dir: string): ConversionRecord | null {
  const file = path.join(dir, "conversion.json");
  if (!fs.existsSync(file)) return null;
  try {
    return JSON.parse(fs.readFileSync(file, "utf8")) as ConversionRecord;
  } catch {
    return null;
  }
}

/**
 * Verify a bundle directory. `expected` overrides the published statistics
 * looked up under the bundle's dataset name.
 */
export function verifyBundle(dir: string, expected?: ExpectedStats): VerifyReport {
  const checks: VerifyCheck[] = [];
  const push = (name: string, ok: boolean, detail: string) => checks.push({ name, ok, detail });

  let loaded;
  try {
    loaded = readBundle(dir);
  } catch (err) {
    const detail = err instanceof BundleError ? err.message : String(err);
    push("load", false, detail);
    return { ok: false, checks };
  }
  push("load", true, `bundle '${loaded.meta.name}' is well formed`);

  const want = expected ?? PUBLISHED_STATS[loaded.meta.name];
  if (!want) {
    push(
      "expected-stats", false,
      `no published statistics for dataset '${loaded.meta.name}'; pass an expected-stats file`,
    );
    return { ok: false, checks };
  }

  const exact = (name: string, got: number, wantV: number) =>
    push(name, got === wantV, `${got} (expected ${wantV})`);
  exact("nodes", loaded.meta.num_nodes, want.nodes);
  exact("features", loaded.meta.num_features, want.features);
  exact("classes", loaded.meta.num_classes, want.classes);

  const unique = loaded.edges.length;
  const record = readConversionRecord(dir);
  const raw = record?.edges?.links;
  const edgeOk = unique === want.edges || raw === want.edges;
  const rawText = raw === undefined ? "unknown" : String(raw);
  push(
    "edges", edgeOk,
    `raw ${rawText}, deduplicated ${unique} (expected ${want.edges}, either accepted)`,
  );

  push(
    "features-nonnegative",
    !(loaded.minFeatureValue < 0),
    loaded.minFeatureValue < 0
      ? `smallest feature value is ${loaded.minFeatureValue}`
      : "all feature values are >= 0",
  );

  // every node carries exactly one in-range class id; load already enforced
  // range, so report class occupancy for the record
  const occupancy = new Array<number>(loaded.meta.num_classes).fill(0);
  for (const lab of loaded.labels) occupancy[lab]++;
  const emptyClasses = occupancy.filter((count) => count === 0).length;
  push(
    "labels", true,
    emptyClasses === 0
      ? `one class id per node, all ${loaded.meta.num_classes} classes populated`
      : `one class id per node, ${emptyClasses} classes have no nodes`,
  );

  return { ok: checks.every((check) => check.ok), checks };
}

/** Load an expected-stats JSON file ({nodes, edges, features, classes}). */
export function readExpectedStats(file: string): ExpectedStats {
  const raw = JSON.parse(fs.readFileSync(file, "utf8")) as Record<string, unknown>;
  for (const key of ["nodes", "edges", "features", "classes"]) {
    if (typeof raw[key] !== "number") {
      throw new Error(`expected-stats file ${file} is missing numeric field '${key}'`);
    }
  }
  return raw as unknown as ExpectedStats;
}
