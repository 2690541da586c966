import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["test/**/*.test.ts"],
    // the end-to-end test boots the real annotation service (torch import
    // dominates); everything else finishes in milliseconds
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
