import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["src/**/*.test.ts"],
    testTimeout: 60000,
    hookTimeout: 60000,
    // The integration suite drives one live server; run files serially.
    fileParallelism: false,
  },
});
