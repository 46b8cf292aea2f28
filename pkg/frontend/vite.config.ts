import react from "@vitejs/plugin-react";
import { defineConfig } from "vitest/config";

export default defineConfig({
  plugins: [react()],
  server: {
    port: 5173,
    proxy: {
      // point the dev server at a locally running backend
      "/documents": "http://127.0.0.1:8080",
      "/sessions": "http://127.0.0.1:8080",
      "/quiz": "http://127.0.0.1:8080",
      "/profiles": "http://127.0.0.1:8080",
    },
  },
  test: {
    environment: "jsdom",
    globals: true,
    setupFiles: ["tests/setup.ts"],
  },
});
