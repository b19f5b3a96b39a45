import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // the end-to-end test boots a real station process and flies a mission
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
