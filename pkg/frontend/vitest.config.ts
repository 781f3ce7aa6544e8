import { fileURLToPath } from "node:url";
import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // Tells tests where the repository (and its fixture corpus) lives;
    // import.meta.url is not a file URL inside DOM-environment tests.
    env: { REPO_ROOT: fileURLToPath(new URL("..", import.meta.url)) },
    // roundtrip.test.ts spawns the real service in beforeAll
    testTimeout: 20_000,
    hookTimeout: 90_000,
  },
});
