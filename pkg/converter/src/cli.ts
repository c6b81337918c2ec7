#!/usr/bin/env node
// Command line front end.
//
//   bundle-converter convert --dataset cora --raw DIR --out DIR
//                            [--download] [--trust-download]
//                            [--min-class-size N]
//   bundle-converter verify  --bundle DIR [--expect FILE]
//
// Exit codes: 0 success / verification passed, 1 conversion failure or
// verification failed, 2 bad invocation.

import { parseArgs } from "util";
import { BundleError } from "./bundle";
import { DATASETS, convertDataset, isDatasetName } from "./convert";
import { downloadDataset } from "./download";
import { ConvertError } from "./planetoid";
import { readExpectedStats, verifyBundle } from "./stats";

const USAGE = `usage:
  bundle-converter convert --dataset {${DATASETS.join(",")}} --raw DIR --out DIR
                           [--download] [--trust-download] [--min-class-size N]
  bundle-converter verify --bundle DIR [--expect FILE]`;

function usageError(message: string): never {
  console.error(`error: ${message}`);
  console.error(USAGE);
  process.exit(2);
}

async function cmdConvert(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        dataset: { type: "string" },
        raw: { type: "string" },
        out: { type: "string" },
        download: { type: "boolean", default: false },
        "trust-download": { type: "boolean", default: false },
        "min-class-size": { type: "string" },
      },
    });
  } catch (err) {
    usageError((err as Error).message);
  }
  const values = parsed.values;
  if (!values.dataset) usageError("--dataset is required");
  if (!isDatasetName(values.dataset)) {
    usageError(`unknown dataset '${values.dataset}' (${DATASETS.join(", ")})`);
  }
  if (!values.raw) usageError("--raw is required");
  if (!values.out) usageError("--out is required");
  let minClassSize = 0;
  if (values["min-class-size"] !== undefined) {
    minClassSize = parseInt(values["min-class-size"], 10);
    if (Number.isNaN(minClassSize) || minClassSize < 0) {
      usageError(`--min-class-size must be a non-negative integer`);
    }
  }

  if (values.download) {
    await downloadDataset(values.dataset, values.raw, values["trust-download"], (m) =>
      console.error(m),
    );
  }

  const result = convertDataset(values.dataset, values.raw, values.out, { minClassSize });
  console.log(`dataset:  ${result.dataset}`);
  console.log(`nodes:    ${result.numNodes}`);
  console.log(`features: ${result.numFeatures}`);
  console.log(`classes:  ${result.numClasses}`);
  console.log(
    `edges:    raw ${result.edges.links} ` +
    `(${result.edges.listed} adjacency entries), ` +
    `deduplicated ${result.edges.unique}`,
  );
  console.log(`wrote ${result.outDir}`);
  return 0;
}

function cmdVerify(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        bundle: { type: "string" },
        expect: { type: "string" },
      },
    });
  } catch (err) {
    usageError((err as Error).message);
  }
  const values = parsed.values;
  if (!values.bundle) usageError("--bundle is required");
  let expected;
  if (values.expect) {
    try {
      expected = readExpectedStats(values.expect);
    } catch (err) {
      usageError((err as Error).message);
    }
  }

  const report = verifyBundle(values.bundle, expected);
  for (const check of report.checks) {
    console.log(`${check.ok ? "ok  " : "FAIL"} ${check.name}: ${check.detail}`);
  }
  console.log(report.ok ? "PASS" : "FAIL");
  return report.ok ? 0 : 1;
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  if (!command || command === "--help" || command === "-h") {
    console.log(USAGE);
    return command ? 0 : 2;
  }
  try {
    if (command === "convert") return await cmdConvert(rest);
    if (command === "verify") return cmdVerify(rest);
  } catch (err) {
    if (err instanceof ConvertError || err instanceof BundleError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  usageError(`unknown command '${command}'`);
}

if (require.main === module) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      console.error(err);
      process.exit(1);
    },
  );
}
