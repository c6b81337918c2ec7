import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterAll, describe, expect, it } from "vitest";
import { fixture } from "./helpers";

const CLI = path.resolve(__dirname, "..", "dist", "cli.js");
const tmpRoot = fs.mkdtempSync(path.join(os.tmpdir(), "cli-test-"));
afterAll(() => fs.rmSync(tmpRoot, { recursive: true, force: true }));

function run(...args: string[]) {
  const res = spawnSync(process.execPath, [CLI, ...args], { encoding: "utf8" });
  return { code: res.status, out: res.stdout, err: res.stderr };
}

describe("convert command", () => {
  it("converts an archive and reports both edge counts", () => {
    const out = path.join(tmpRoot, "tiny-out");
    const r = run("convert", "--dataset", "cora", "--raw", fixture("tiny", "raw"), "--out", out);
    expect(r.err).toBe("");
    expect(r.code).toBe(0);
    expect(r.out).toContain("nodes:    12");
    expect(r.out).toContain("features: 5");
    expect(r.out).toContain("classes:  3");
    expect(r.out).toContain("edges:    raw 11 (22 adjacency entries), deduplicated 10");
    expect(r.out).toContain(`wrote ${out}`);
    expect(fs.existsSync(path.join(out, "meta.json"))).toBe(true);
  });

  it("applies --min-class-size for cora-full", () => {
    const out = path.join(tmpRoot, "full-out");
    const r = run(
      "convert", "--dataset", "cora-full",
      "--raw", fixture("tinyfull", "raw"),
      "--out", out,
      "--min-class-size", "2",
    );
    expect(r.code).toBe(0);
    expect(r.out).toContain("nodes:    9");
    expect(r.out).toContain("classes:  3");
    const want = fs.readFileSync(fixture("tinyfull", "bundle-min2", "features.txt"));
    expect(fs.readFileSync(path.join(out, "features.txt")).equals(want)).toBe(true);
  });

  it("rejects --min-class-size for planetoid datasets", () => {
    const r = run(
      "convert", "--dataset", "cora",
      "--raw", fixture("tiny", "raw"),
      "--out", path.join(tmpRoot, "unused"),
      "--min-class-size", "2",
    );
    expect(r.code).toBe(1);
    expect(r.err).toContain("error: --min-class-size only applies to cora-full");
  });

  it("fails with a diagnostic when the raw directory is missing", () => {
    const r = run(
      "convert", "--dataset", "cora",
      "--raw", path.join(tmpRoot, "nowhere"),
      "--out", path.join(tmpRoot, "unused2"),
    );
    expect(r.code).toBe(1);
    expect(r.err).toMatch(/error: .*does not exist/);
  });

  it("fails with the loader's diagnostic on a corrupt archive", () => {
    const rawDir = path.join(tmpRoot, "corrupt-raw");
    fs.mkdirSync(rawDir, { recursive: true });
    for (const part of ["x", "y", "tx", "ty", "allx", "ally", "graph", "test.index"]) {
      fs.copyFileSync(
        fixture("tiny", "raw", `ind.cora.${part}`),
        path.join(rawDir, `ind.cora.${part}`),
      );
    }
    fs.writeFileSync(path.join(rawDir, "ind.cora.ally"), Buffer.from([0xff, 0x2e]));
    const r = run(
      "convert", "--dataset", "cora",
      "--raw", rawDir,
      "--out", path.join(tmpRoot, "unused3"),
    );
    expect(r.code).toBe(1);
    expect(r.err).toContain("ind.cora.ally");
  });
});

describe("verify command", () => {
  const out = path.join(tmpRoot, "verify-out");

  it("passes against an expected-stats file", () => {
    expect(
      run("convert", "--dataset", "cora", "--raw", fixture("tiny", "raw"), "--out", out).code,
    ).toBe(0);
    const r = run("verify", "--bundle", out, "--expect", fixture("tiny", "expected-stats.json"));
    expect(r.code).toBe(0);
    expect(r.out).toContain("ok   nodes: 12 (expected 12)");
    expect(r.out).toContain("ok   edges: raw 11, deduplicated 10 (expected 11, either accepted)");
    expect(r.out.trim().endsWith("PASS")).toBe(true);
  });

  it("fails against the published full-size statistics", () => {
    const r = run("verify", "--bundle", out);
    expect(r.code).toBe(1);
    expect(r.out).toContain("FAIL nodes: 12 (expected 2708)");
    expect(r.out.trim().endsWith("FAIL")).toBe(true);
  });

  it("fails cleanly on an empty bundle directory", () => {
    const empty = path.join(tmpRoot, "empty-bundle");
    fs.mkdirSync(empty, { recursive: true });
    const r = run("verify", "--bundle", empty);
    expect(r.code).toBe(1);
    expect(r.out).toContain("FAIL load:");
  });
});

describe("usage errors", () => {
  it.each([
    [["frobnicate"], "unknown command"],
    [["convert", "--dataset", "enron", "--raw", "a", "--out", "b"], "unknown dataset"],
    [["convert", "--dataset", "cora", "--out", "b"], "--raw is required"],
    [["verify"], "--bundle is required"],
    [["convert", "--dataset", "cora", "--raw", "a", "--out", "b", "--min-class-size", "x"],
      "--min-class-size"],
  ])("exits 2 for %j", (args, message) => {
    const r = run(...(args as string[]));
    expect(r.code).toBe(2);
    expect(r.err).toContain(message as string);
    expect(r.err).toContain("usage:");
  });

  it("prints usage on --help", () => {
    const r = run("--help");
    expect(r.code).toBe(0);
    expect(r.out).toContain("bundle-converter convert");
  });
});

describe("integration with the python consumer", () => {
  const python = spawnSync("python3", ["-c", "import fewlabel"], { encoding: "utf8" });
  const available = python.status === 0;

  it.skipIf(!available)("converted bundles load through the python CLI", () => {
    const out = path.join(tmpRoot, "integration-out");
    expect(
      run("convert", "--dataset", "citeseer", "--raw", fixture("tinygap", "raw"), "--out", out)
        .code,
    ).toBe(0);
    const r = spawnSync(
      "python3",
      ["-m", "fewlabel.cli", "inspect-bundle", "--dataset", out],
      { encoding: "utf8" },
    );
    expect(r.status).toBe(0);
    expect(r.stdout).toMatch(/nodes:\s+13/);
    expect(r.stdout).toMatch(/classes:\s+3/);
  });
});
