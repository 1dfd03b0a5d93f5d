import { defineConfig } from "vitest/config";

// The e2e session file runs under happy-dom against a live server on this
// port; making it the page origin mirrors production, where the frontend is
// served as static assets by the voting service itself.
export default defineConfig({
  test: {
    environmentOptions: {
      happyDOM: { url: "http://127.0.0.1:8873" },
    },
  },
});
