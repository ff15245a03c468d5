import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        // the round-trip test shells out to the renderer twice
        testTimeout: 30000,
    },
});
