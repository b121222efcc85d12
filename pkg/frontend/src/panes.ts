// The three interaction panes: factual QA, descriptive QA, raw query
// editor. Each pane keeps at most one in-flight request and cancels it on
// resubmit. All rendered values are taken verbatim from response bodies.

import { ApiClient, ApiError } from "./api";
import type { FactualResult, SparqlResults, SparqlTerm } from "./types";
import { isAskResults } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function termText(term: SparqlTerm | undefined): string {
  return term ? term.value : "";
}

export function solutionIris(solution: SparqlResults | null): string[] {
  if (!solution || isAskResults(solution)) return [];
  const iris: string[] = [];
  for (const row of solution.results.bindings) {
    for (const term of Object.values(row)) {
      if (term.type === "uri" && !iris.includes(term.value)) {
        iris.push(term.value);
      }
    }
  }
  return iris;
}

function bindingsTable(solution: SparqlResults): HTMLElement {
  if (isAskResults(solution)) {
    return el("span", `boolean-chip ${solution.boolean}`, String(solution.boolean));
  }
  const table = el("table", "results-table");
  const head = el("tr");
  for (const v of solution.head.vars) head.appendChild(el("th", undefined, v));
  table.appendChild(head);
  for (const row of solution.results.bindings) {
    const tr = el("tr");
    for (const v of solution.head.vars) tr.appendChild(el("td", undefined, termText(row[v])));
    table.appendChild(tr);
  }
  return table;
}

function errorBox(error: unknown): HTMLElement {
  if (error instanceof ApiError) {
    const stage = error.stage ? ` (stage: ${error.stage})` : "";
    const box = el("div", "error-banner", `${error.code}: ${error.message}${stage}`);
    if (error.status === 504) {
      box.appendChild(el("button", "retry-button", "retry"));
    }
    return box;
  }
  return el("div", "error-banner", String(error));
}

abstract class Pane {
  readonly element: HTMLElement;
  protected output: HTMLElement;
  private inflight: AbortController | null = null;

  constructor(className: string) {
    this.element = el("section", `pane ${className}`);
    this.output = el("div", "pane-output");
  }

  protected nextSignal(): AbortSignal {
    this.inflight?.abort();
    this.inflight = new AbortController();
    return this.inflight.signal;
  }
}

export class FactualPane extends Pane {
  private input: HTMLInputElement;

  constructor(
    private api: ApiClient,
    private onSolutionIris: (iris: string[]) => void = () => {},
  ) {
    super("pane-factual");
    this.input = el("input", "question-input");
    this.input.placeholder = "Ask a factual question";
    const button = el("button", "submit", "Ask");
    button.addEventListener("click", () => void this.submit(this.input.value));
    this.element.append(this.input, button, this.output);
  }

  async submit(question: string): Promise<FactualResult | null> {
    if (!question.trim()) return null;
    this.output.replaceChildren(el("div", "loading", "..."));
    try {
      const result = await this.api.qaFactual(question, this.nextSignal());
      this.renderResult(result);
      return result;
    } catch (error) {
      if ((error as Error).name === "AbortError") return null;
      this.output.replaceChildren(errorBox(error));
      return null;
    }
  }

  private renderResult(result: FactualResult): void {
    this.output.replaceChildren();
    if (result.status !== "delivered") {
      this.output.appendChild(
        el(
          "div",
          "error-banner",
          `failed at ${result.failed_stage}: ${result.failure_reason ?? ""}`,
        ),
      );
      return;
    }
    this.output.appendChild(el("p", "answer-text", result.answer_text ?? ""));
    if (result.query) {
      const details = el("details", "generated-query");
      details.appendChild(el("summary", undefined, "generated query"));
      details.appendChild(el("pre", undefined, result.query));
      this.output.appendChild(details);
    }
    if (result.solution) {
      this.output.appendChild(bindingsTable(result.solution));
    }
    this.onSolutionIris(solutionIris(result.solution));
  }
}

export class DescriptivePane extends Pane {
  private input: HTMLInputElement;
  private mapImage: HTMLInputElement;
  private search: HTMLInputElement;

  constructor(private api: ApiClient) {
    super("pane-descriptive");
    this.input = el("input", "question-input");
    this.input.placeholder = "Ask a descriptive question";
    this.mapImage = el("input", "opt-map-image");
    this.mapImage.type = "checkbox";
    this.search = el("input", "opt-search");
    this.search.type = "checkbox";
    const button = el("button", "submit", "Ask");
    button.addEventListener("click", () => void this.submit(this.input.value));
    const options = el("label", "options", " map image ");
    options.prepend(this.mapImage);
    const searchLabel = el("label", "options", " web search ");
    searchLabel.prepend(this.search);
    this.element.append(this.input, options, searchLabel, button, this.output);
  }

  async submit(
    question: string,
    options?: { useMapImage?: boolean; useSearch?: boolean },
  ): Promise<void> {
    if (!question.trim()) return;
    const chosen = options ?? {
      useMapImage: this.mapImage.checked,
      useSearch: this.search.checked,
    };
    this.output.replaceChildren(el("div", "loading", "..."));
    try {
      const result = await this.api.qaDescriptive(question, chosen, this.nextSignal());
      this.output.replaceChildren();
      if (result.status !== "delivered") {
        this.output.appendChild(
          el("div", "error-banner", `failed at ${result.failed_stage}`),
        );
        return;
      }
      this.output.appendChild(el("p", "answer-text", result.answer_text ?? ""));
      const badges = el("div", "context-badges");
      for (const context of result.contexts_used) {
        badges.appendChild(el("span", `badge badge-${context}`, context));
      }
      this.output.appendChild(badges);
      const facts = el("ul", "fact-list");
      for (const sub of result.sub_results) {
        if (sub.status !== "delivered") continue;
        const item = el("li", "fact-item");
        const check = el("input", "fact-verdict");
        check.type = "checkbox";
        item.append(check, el("span", "fact-question", sub.question), el("span", "fact-answer", ` ${sub.answer_text ?? ""}`));
        facts.appendChild(item);
      }
      this.output.appendChild(facts);
    } catch (error) {
      if ((error as Error).name === "AbortError") return;
      this.output.replaceChildren(errorBox(error));
    }
  }
}

const LINE_COLUMN = /line (\d+)/;

export class QueryEditorPane extends Pane {
  readonly editor: HTMLTextAreaElement;
  private gutter: HTMLElement;

  constructor(private api: ApiClient) {
    super("pane-query");
    this.editor = document.createElement("textarea");
    this.editor.className = "query-editor";
    this.gutter = el("div", "editor-gutter");
    const button = el("button", "submit", "Run");
    button.addEventListener("click", () => void this.run(this.editor.value));
    this.element.append(this.gutter, this.editor, button, this.output);
  }

  async run(query: string): Promise<void> {
    this.gutter.replaceChildren();
    this.output.replaceChildren(el("div", "loading", "..."));
    try {
      const results = await this.api.sparql(query);
      this.output.replaceChildren(bindingsTable(results));
    } catch (error) {
      this.output.replaceChildren();
      if (error instanceof ApiError && error.code === "parse_error") {
        const match = LINE_COLUMN.exec(error.message);
        if (match) {
          const marker = el("span", "gutter-error", "!");
          marker.dataset.line = match[1];
          this.gutter.appendChild(marker);
        }
        this.output.appendChild(el("div", "inline-error", error.message));
      } else {
        this.output.appendChild(errorBox(error));
      }
    }
  }
}
