import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { DescriptivePane, FactualPane, QueryEditorPane, solutionIris } from "../src/panes";
import { DESCRIPTIVE, FACTUAL, installFetchRouter } from "./fixtures";

const api = new ApiClient("");

describe("FactualPane", () => {
  beforeEach(() => {
    installFetchRouter();
    document.body.replaceChildren();
  });

  it("renders the answer text verbatim with a collapsible query and rows", async () => {
    const highlighted: string[][] = [];
    const pane = new FactualPane(api, (iris) => highlighted.push(iris));
    document.body.appendChild(pane.element);
    await pane.submit("How many lakes were there in Bargen in 1916?");
    expect(pane.element.querySelector(".answer-text")!.textContent).toBe(FACTUAL.answer_text);
    expect(pane.element.querySelector("details.generated-query pre")!.textContent).toBe(
      FACTUAL.query,
    );
    expect(pane.element.querySelectorAll(".results-table tr")).toHaveLength(3);
    expect(highlighted).toEqual([
      [
        "http://chronomap.local/feature/ta_110_1916_lake_0000",
        "http://chronomap.local/feature/ta_110_1916_lake_0001",
      ],
    ]);
  });

  it("extracts distinct feature IRIs from solution bindings", () => {
    expect(solutionIris(FACTUAL.solution)).toHaveLength(2);
    expect(solutionIris(null)).toEqual([]);
    expect(solutionIris({ head: {}, boolean: true })).toEqual([]);
  });
});

describe("DescriptivePane", () => {
  beforeEach(() => {
    installFetchRouter();
    document.body.replaceChildren();
  });

  it("shows answer, context badges, and verdict-ready fact list", async () => {
    const pane = new DescriptivePane(api);
    document.body.appendChild(pane.element);
    await pane.submit("Please provide an overview about Aarberg in 1901.", {
      useSearch: true,
    });
    expect(pane.element.querySelector(".answer-text")!.textContent).toBe(
      DESCRIPTIVE.answer_text,
    );
    const badges = [...pane.element.querySelectorAll(".badge")].map((b) => b.textContent);
    expect(badges).toEqual(["kg", "search"]);
    const facts = pane.element.querySelectorAll(".fact-item");
    expect(facts).toHaveLength(1);
    expect(facts[0].querySelector("input.fact-verdict")).not.toBeNull();
  });
});

describe("QueryEditorPane", () => {
  beforeEach(() => {
    installFetchRouter();
    document.body.replaceChildren();
  });

  it("renders a boolean chip for ASK", async () => {
    const pane = new QueryEditorPane(api);
    document.body.appendChild(pane.element);
    await pane.run("ASK { ?s ?p ?o }");
    expect(pane.element.querySelector(".boolean-chip")!.textContent).toBe("true");
  });

  it("renders a row per binding for SELECT", async () => {
    const pane = new QueryEditorPane(api);
    document.body.appendChild(pane.element);
    await pane.run("SELECT ?f ?a WHERE { ?f cmo:areaSqm ?a }");
    // header + 3 bindings
    expect(pane.element.querySelectorAll(".results-table tr")).toHaveLength(4);
  });

  it("marks the gutter at the reported parse-error line", async () => {
    const pane = new QueryEditorPane(api);
    document.body.appendChild(pane.element);
    await pane.run("SELECT bogus\n nonsense");
    const marker = pane.element.querySelector<HTMLElement>(".gutter-error")!;
    expect(marker.dataset.line).toBe("2");
    expect(pane.element.querySelector(".inline-error")!.textContent).toContain("line 2");
  });
});
