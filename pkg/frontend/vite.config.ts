/// <reference types="vitest/config" />
import { defineConfig } from 'vite';

export default defineConfig({
  build: {
    outDir: 'dist',
  },
  server: {
    proxy: {
      // During `vite dev`, forward API calls to a locally running service.
      '/clips': 'http://127.0.0.1:8321',
      '/export': 'http://127.0.0.1:8321',
      '/api': 'http://127.0.0.1:8321',
    },
  },
  test: {
    environment: 'jsdom',
    include: ['tests/**/*.test.ts'],
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
