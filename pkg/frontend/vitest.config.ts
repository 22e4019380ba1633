import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["test/**/*.test.ts"],
    // The end-to-end suite spawns the Python advisor service and waits
    // for it to come up, which can take a few seconds on a cold start.
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
