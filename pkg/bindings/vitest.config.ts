import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // every test shells out to the CLI; cold Python starts dominate
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
