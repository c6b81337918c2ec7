import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // the cli suite shells out to node and python
    testTimeout: 30000,
  },
});
