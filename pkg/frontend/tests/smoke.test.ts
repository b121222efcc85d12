// Scripted session against the mocked service: load layers for each year,
// ask one factual and one descriptive question, and check the rendered
// answers equal the API response bodies.

import { beforeEach, describe, expect, it } from "vitest";

import { bootstrapApp } from "../src/main";
import { DESCRIPTIVE, FACTUAL, HEALTH, installFetchRouter } from "./fixtures";

describe("app smoke session", () => {
  let calls: ReturnType<typeof installFetchRouter>;
  let root: HTMLElement;

  beforeEach(() => {
    calls = installFetchRouter();
    root = document.createElement("div");
    document.body.replaceChildren(root);
  });

  it("loads layers for each year, then answers factual and descriptive questions", async () => {
    const app = await bootstrapApp(root);
    // initial load on the first year
    expect(app.state.year).toBe(HEALTH.years[0]);
    expect(root.querySelectorAll("[data-layer-type]").length).toBeGreaterThan(0);
    // step through every year; each switch refetches with the year parameter
    for (const year of HEALTH.years.slice(1)) {
      await app.changeYear(year);
      expect(calls[calls.length - 1].path).toBe(`/features?year=${year}`);
      expect(root.querySelectorAll("[data-iri]").length).toBeGreaterThan(0);
    }
    // factual question: rendered answer equals the API body
    app.showPane("ask-factual");
    await app.factual.submit(FACTUAL.question);
    expect(root.querySelector(".pane-factual .answer-text")!.textContent).toBe(
      FACTUAL.answer_text,
    );
    // the solution cites 1916 features; the current 1930 layer has none of them
    expect(app.map.highlightedIris()).toEqual([]);
    // descriptive question: answer text and context badges match the body
    app.showPane("ask-descriptive");
    await app.descriptive.submit(DESCRIPTIVE.question, { useSearch: true });
    expect(root.querySelector(".pane-descriptive .answer-text")!.textContent).toBe(
      DESCRIPTIVE.answer_text,
    );
    expect(
      [...root.querySelectorAll(".pane-descriptive .badge")].map((b) => b.textContent),
    ).toEqual(DESCRIPTIVE.contexts_used);
  });

  it("highlights cited features when the layer contains them", async () => {
    const app = await bootstrapApp(root);
    await app.changeYear(1916);
    await app.factual.submit(FACTUAL.question);
    // the 1916 layer fixture contains lake_0000 referenced in the solution
    expect(app.map.highlightedIris()).toEqual([
      "http://chronomap.local/feature/ta_110_1916_lake_0000",
    ]);
  });

  it("keeps the map interactive when feature loading fails", async () => {
    const app = await bootstrapApp(root);
    globalThis.fetch = (async () => {
      throw new Error("network down");
    }) as typeof fetch;
    await app.changeYear(1901);
    const banner = root.querySelector<HTMLElement>(".app-banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("failed to load features");
  });
});
