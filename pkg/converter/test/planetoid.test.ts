import { describe, expect, it } from "vitest";
import {
  ConvertError,
  assemblePlanetoid,
  canonicalEdges,
  readPlanetoidDir,
} from "../src/planetoid";
import { fixture, readJson } from "./helpers";

function assembleFixture(dir: string, name: string) {
  return assemblePlanetoid(readPlanetoidDir(fixture(dir, "raw"), name));
}

function blob(graph: ReturnType<typeof assembleFixture>) {
  return {
    nodes: graph.numNodes,
    features: graph.numFeatures,
    classes: graph.numClasses,
    edge_counts: graph.counts,
    edges: graph.edges,
    labels: graph.labels,
    feature_rows: graph.featureRows,
  };
}

describe("archive assembly", () => {
  it("reassembles the small archive exactly as the reference recipe", () => {
    expect(blob(assembleFixture("tiny", "cora"))).toEqual(readJson("tiny", "expected.json"));
  });

  it("fills holes in the test id range with zero rows and class 0", () => {
    const graph = assembleFixture("tinygap", "citeseer");
    expect(blob(graph)).toEqual(readJson("tinygap", "expected.json"));
    // node 10 is the hole
    expect(graph.featureRows[10]).toEqual([]);
    expect(graph.labels[10]).toBe(0);
  });

  it("keeps upstream node order: listed test ids get the matching tx rows", () => {
    const graph = assembleFixture("tiny", "cora");
    // test.index order [10, 8, 11, 9]; tx row 1 carries {1: 11.0}
    expect(graph.featureRows[8]).toEqual([[1, 11.0]]);
    expect(graph.featureRows[10]).toEqual([[0, 10.0], [2, 0.5]]);
  });

  it("drops explicitly stored zero feature values", () => {
    const graph = assembleFixture("tiny", "cora");
    // raw allx row 4 stores a zero at column 3
    expect(graph.featureRows[4]).toEqual([[0, 3.0], [1, 4.0], [2, 5.0]]);
  });

  it("aborts on mismatched feature widths, naming the widths", () => {
    expect(() => assembleFixture("tinybad", "cora")).toThrow(
      /feature width mismatch: allx has 5, tx has 4/,
    );
  });

  it("aborts when an archive file is missing", () => {
    expect(() => readPlanetoidDir(fixture("tinyfull", "raw"), "cora")).toThrow(
      /ind\.cora\.[a-z.]+: file missing/,
    );
  });
});

describe("canonicalEdges", () => {
  it("counts listed entries, described links, and unique edges separately", () => {
    // 2-node graph: link listed from both ends plus one self loop
    const { edges, counts } = canonicalEdges(
      [
        [1, 0],
        [0, 1],
        [1, 1],
      ],
      2,
    );
    expect(edges).toEqual([[0, 1]]);
    expect(counts).toEqual({ listed: 3, links: 2, unique: 1 });
  });

  it("orients and sorts edges canonically", () => {
    const { edges } = canonicalEdges(
      [
        [5, 2],
        [1, 4],
        [2, 5],
        [0, 3],
      ],
      6,
    );
    expect(edges).toEqual([
      [0, 3],
      [1, 4],
      [2, 5],
    ]);
  });

  it("rejects out-of-range endpoints", () => {
    expect(() => canonicalEdges([[0, 9]], 3)).toThrow(ConvertError);
  });
});
