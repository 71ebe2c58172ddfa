/** Browser bootstrap: connect to the service, mount the canvas, poll by revision. */

import { VsoClient } from "./api.js";
import { Canvas } from "./canvas.js";
import { PositionStorage, SessionStore } from "./state.js";

const POLL_INTERVAL_MS = 1500;

class LocalPositionStorage implements PositionStorage {
  private readonly key = "vsoflow-positions";

  load(): Record<string, { x: number; y: number }> {
    try {
      return JSON.parse(window.localStorage.getItem(this.key) ?? "{}");
    } catch {
      return {};
    }
  }

  save(positions: Record<string, { x: number; y: number }>): void {
    window.localStorage.setItem(this.key, JSON.stringify(positions));
  }
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? window.location.origin;
  const client = new VsoClient(base, (input, init) => fetch(input, init));
  const store = new SessionStore(client, new LocalPositionStorage());
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  new Canvas(root, store);
  await store.start();
  window.setInterval(() => {
    void store.pollOnce().catch(() => undefined);
  }, POLL_INTERVAL_MS);
}

void boot();
