// Optional archive download with pinned URLs and sha256 verification.
//
// The pin table ships with the URLs of the canonical upstream mirrors. A
// sha256 of null means no digest has been recorded yet for that file; such
// a file is only accepted under --trust-download, which prints the digest
// it observed so it can be reviewed and pinned.

import * as crypto from "crypto";
import * as fs from "fs";
import * as path from "path";
import { DatasetName } from "./convert";
import { ConvertError } from "./planetoid";

export interface PinnedFile {
  name: string;
  url: string;
  sha256: string | null;
}

const PLANETOID_BASE = "https://github.com/kimiyoung/planetoid/raw/master/data";
const NPZ_URL = "https://github.com/abojchevski/graph2gauss/raw/master/data/cora.npz";

function planetoidPins(dataset: string): PinnedFile[] {
  return ["x", "y", "tx", "ty", "allx", "ally", "graph", "test.index"].map((part) => ({
    name: `ind.${dataset}.${part}`,
    url: `${PLANETOID_BASE}/ind.${dataset}.${part}`,
    sha256: null,
  }));
}

export const PINNED_FILES: Record<DatasetName, PinnedFile[]> = {
  cora: planetoidPins("cora"),
  citeseer: planetoidPins("citeseer"),
  pubmed: planetoidPins("pubmed"),
  "cora-full": [{ name: "cora.npz", url: NPZ_URL, sha256: null }],
};

export function sha256Hex(data: Uint8Array): string {
  return crypto.createHash("sha256").update(data).digest("hex");
}

/**
 * Decide whether downloaded bytes may be written. Returns a problem
 * description, or null when the file is acceptable.
 */
export function acceptDownload(
  pin: PinnedFile,
  digest: string,
  trust: boolean,
): string | null {
  if (pin.sha256 !== null) {
    if (digest === pin.sha256) return null;
    return `checksum mismatch for ${pin.name}: got ${digest}, pinned ${pin.sha256}`;
  }
  if (trust) return null;
  return (
    `no pinned checksum for ${pin.name}; rerun with --trust-download to accept ` +
    `and print the observed digest`
  );
}

export interface DownloadLog {
  (message: string): void;
}

/** Fetch any missing archive files for a dataset into rawDir. */
export async function downloadDataset(
  dataset: DatasetName,
  rawDir: string,
  trust: boolean,
  log: DownloadLog = () => {},
): Promise<void> {
  fs.mkdirSync(rawDir, { recursive: true });
  for (const pin of PINNED_FILES[dataset]) {
    const dest = path.join(rawDir, pin.name);
    if (fs.existsSync(dest)) {
      log(`${pin.name}: already present, skipping download`);
      continue;
    }
    log(`fetching ${pin.url}`);
    const response = await fetch(pin.url);
    if (!response.ok) {
      throw new ConvertError(`download failed for ${pin.url}: HTTP ${response.status}`);
    }
    const bytes = new Uint8Array(await response.arrayBuffer());
    const digest = sha256Hex(bytes);
    const problem = acceptDownload(pin, digest, trust);
    if (problem) throw new ConvertError(problem);
    if (pin.sha256 === null) {
      log(`${pin.name}: accepted on trust, sha256 ${digest}`);
    }
    fs.writeFileSync(dest, bytes);
  }
}
