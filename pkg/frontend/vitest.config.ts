import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 45000,
    // the round-trip test owns a fixed service port
    fileParallelism: false,
  },
});
