import { defineConfig } from "vite";

export default defineConfig({
  build: { outDir: "dist" },
  server: {
    proxy: {
      // During development, proxy API and stream traffic to a running
      // `socsynth serve` instance.
      "/api": { target: "http://127.0.0.1:8642", changeOrigin: true },
    },
  },
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
  },
});
