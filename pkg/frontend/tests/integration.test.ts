// End-to-end smoke against the real service process (demo config, scripted
// gateways). Soft-skips when the Python service cannot be started, so the
// unit suite stays runnable on a frontend-only checkout.

import { ChildProcess, spawn } from "node:child_process";
import { fileURLToPath } from "node:url";
import path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { bootstrapApp } from "../src/main";

const PORT = 8137;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

let server: ChildProcess | null = null;
let serverUp = false;

async function waitForHealth(timeoutMs: number): Promise<boolean> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) return true;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  return false;
}

beforeAll(async () => {
  const code =
    "from chronomap.service.cli import main; import sys; " +
    `sys.exit(main(['--config', 'demo/config.json', 'serve', '--port', '${PORT}']))`;
  try {
    server = spawn("python3", ["-c", code], { cwd: REPO_ROOT, stdio: "ignore" });
  } catch {
    server = null;
  }
  serverUp = server !== null && (await waitForHealth(25000));
}, 30000);

afterAll(() => {
  server?.kill();
});

describe("live service smoke", () => {
  it("loads layers per year and renders QA answers equal to the API bodies", async () => {
    if (!serverUp) {
      console.warn("chronomap service unavailable; skipping live smoke");
      return;
    }
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    const app = await bootstrapApp(root, BASE);
    expect(app.state.years).toEqual([1877, 1901, 1916, 1930]);
    for (const year of app.state.years) {
      await app.changeYear(year);
      expect(root.querySelectorAll("[data-iri]").length).toBeGreaterThan(0);
    }

    const factualQuestion = "How many lakes were there in Bargen in 1916?";
    const factualBody = await (
      await fetch(`${BASE}/qa/factual`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ question: factualQuestion }),
      })
    ).json();
    await app.factual.submit(factualQuestion);
    expect(root.querySelector(".pane-factual .answer-text")!.textContent).toBe(
      factualBody.answer_text,
    );

    const overview = "Please provide an overview about Aarberg in 1901.";
    const descriptiveBody = await (
      await fetch(`${BASE}/qa/descriptive`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ question: overview }),
      })
    ).json();
    await app.descriptive.submit(overview, {});
    expect(root.querySelector(".pane-descriptive .answer-text")!.textContent).toBe(
      descriptiveBody.answer_text,
    );
  }, 40000);
});
