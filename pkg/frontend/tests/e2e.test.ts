/**
 * End-to-end UI loop against a live service running the demo catalog.
 *
 * The test spawns the Python service, mounts the real canvas in happy-dom, and
 * drives it through browser gestures: drag both object images onto the canvas,
 * accept the single suggestion, wire the two intra-object chain links through
 * port clicks, disable the middle model, then check the lifted edge sets at
 * every level and that the script preview equals the CLI-generated golden file
 * byte-for-byte.
 */

import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, expect, it } from "vitest";

import { VsoClient } from "../src/api.js";
import { Canvas } from "../src/canvas.js";
import { SessionStore } from "../src/state.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const REPO_ROOT = join(HERE, "..", "..");
const CATALOG = join(REPO_ROOT, "fixtures", "demo.vso-catalog");
const GOLDEN = join(REPO_ROOT, "fixtures", "chain.wf");
const PORT = 8752;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/v1/images`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "vsoflow.cli", "serve", "--addr", `127.0.0.1:${PORT}`, "--catalog", CATALOG],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  await waitForService();
});

afterAll(() => {
  server?.kill();
});

function click(root: HTMLElement, selector: string): void {
  const element = root.querySelector(selector);
  if (!element) {
    throw new Error(`no element matches ${selector}`);
  }
  element.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

function edgePairs(root: HTMLElement): [string, string][] {
  return [...root.querySelectorAll(".edge")].map((e) => [
    (e as SVGGElement).dataset.source!,
    (e as SVGGElement).dataset.target!,
  ]);
}

it("drives the full composition loop against the live service", async () => {
  const client = new VsoClient(BASE, (input, init) => fetch(input, init));
  const store = new SessionStore(client);
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  new Canvas(root, store);
  await store.start();

  // drag o1 and o2 from the palette onto the canvas
  for (const image of ["o1", "o2"]) {
    const item = root.querySelector(`.palette-item[data-image="${image}"]`)!;
    item.dispatchEvent(new Event("dragstart", { bubbles: true }));
    const canvas = root.querySelector(".canvas")!;
    canvas.dispatchEvent(new Event("drop", { bubbles: true, cancelable: true }));
    await store["queue"];
  }
  expect(
    [...root.querySelectorAll(".node")].map((e) => (e as HTMLElement).dataset.instance),
  ).toEqual(["o1#1", "o2#1"]);

  // exactly one suggestion: the cross-object hand-off through the sameAs pair
  const chips = root.querySelectorAll(".suggestion");
  expect(chips).toHaveLength(1);
  click(root, ".suggestion .accept");
  await store["queue"];
  expect(root.querySelectorAll(".suggestion")).toHaveLength(0);

  // the object-level edge o1 -> o2 appears immediately
  expect(edgePairs(root)).toEqual([["o1#1", "o2#1"]]);

  // wire the two intra-object chain links by clicking visible ports
  const byAddress = (address: string) => `.port[data-address="${address}"]`;
  const s2 = "o1#1/model:m1/method:s2";
  const s5 = "o1#1/model:m3/method:s5";
  click(root, byAddress(`${s2}/ip:0:ip4/out:y`));
  click(root, byAddress(`${s2}/ip:1:ip5/in:x`));
  await store["queue"];
  click(root, byAddress(`${s2}/ip:1:ip5/out:y`));
  click(root, byAddress(`${s5}/ip:0:ip10/in:x`));
  await store["queue"];
  expect(store.state.error).toBeNull();

  // switch to METHOD level: the expected method edge set appears
  click(root, '.level-btn[data-level="METHOD"]');
  await store["queue"];
  expect(new Set(edgePairs(root).map((pair) => pair.join(" -> ")))).toEqual(
    new Set([`${s2} -> ${s5}`, `${s5} -> o2#1/model:m4/method:s7`]),
  );

  // MODEL level: the expected model edge set
  click(root, '.level-btn[data-level="MODEL"]');
  await store["queue"];
  expect(new Set(edgePairs(root).map((pair) => pair.join(" -> ")))).toEqual(
    new Set([
      "o1#1/model:m1 -> o1#1/model:m3",
      "o1#1/model:m3 -> o2#1/model:m4",
    ]),
  );

  // back to OBJECT level: still the single object edge
  click(root, '.level-btn[data-level="OBJECT"]');
  await store["queue"];
  expect(edgePairs(root)).toEqual([["o1#1", "o2#1"]]);

  // disable o1's middle model through its checkbox
  const toggle = root.querySelector(
    '.model-toggle[data-instance="o1#1"][data-model="m2"]',
  ) as HTMLInputElement;
  expect(toggle.checked).toBe(true);
  toggle.checked = false;
  toggle.dispatchEvent(new Event("change", { bubbles: true }));
  await store["queue"];

  // compare panel lists all 12 configurations sorted by the chosen criterion
  click(root, '.compare-run[data-criterion="total"]');
  await store["queue"];
  const values = [...root.querySelectorAll(".report-value")].map((e) =>
    Number(e.textContent),
  );
  expect(values).toHaveLength(12);
  expect(values).toEqual([...values].sort((a, b) => a - b));

  // the script preview equals the CLI-generated golden byte-for-byte
  click(root, ".generate");
  await store["queue"];
  const golden = readFileSync(GOLDEN, "utf-8");
  expect(store.state.scriptText).toBe(golden);
  expect(root.querySelector(".script-text")?.textContent).toBe(golden);

  // the preview refreshes on revision change: disabling the producing model
  // makes the chain script impossible, and the pane reports the precise code
  const m3toggle = root.querySelector(
    '.model-toggle[data-instance="o1#1"][data-model="m3"]',
  ) as HTMLInputElement;
  m3toggle.checked = false;
  m3toggle.dispatchEvent(new Event("change", { bubbles: true }));
  await store["queue"];
  expect(store.state.scriptText).toBeNull();
  expect(root.querySelector(".script-error")?.textContent).toBe("DisconnectedRequiredInput");

  // re-enable: the golden preview returns
  const again = root.querySelector(
    '.model-toggle[data-instance="o1#1"][data-model="m3"]',
  ) as HTMLInputElement;
  again.checked = true;
  again.dispatchEvent(new Event("change", { bubbles: true }));
  await store["queue"];
  expect(store.state.scriptText).toBe(golden);
}, 60_000);
