// Application bootstrap: year selector, layer toggles, map, and the three
// panes wired against the service API.

import { ApiClient } from "./api";
import { MapView } from "./map";
import { DescriptivePane, FactualPane, QueryEditorPane } from "./panes";
import {
  PaneName,
  ViewState,
  initialState,
  setPane,
  setYear,
  toggleLayer,
} from "./state";

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

export class App {
  state!: ViewState;
  readonly map: MapView;
  readonly factual: FactualPane;
  readonly descriptive: DescriptivePane;
  readonly queryEditor: QueryEditorPane;
  private yearSelect: HTMLSelectElement;
  private layerBox: HTMLElement;
  private banner: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {
    this.banner = el("div", "error-banner app-banner");
    this.banner.hidden = true;
    this.yearSelect = document.createElement("select");
    this.yearSelect.className = "year-select";
    this.yearSelect.addEventListener("change", () => {
      void this.changeYear(Number(this.yearSelect.value));
    });
    this.layerBox = el("div", "layer-toggles");
    const mapRoot = el("div", "map-root");
    this.map = new MapView(mapRoot);
    this.factual = new FactualPane(api, (iris) => this.map.highlight(iris));
    this.descriptive = new DescriptivePane(api);
    this.queryEditor = new QueryEditorPane(api);

    const tabs = el("nav", "pane-tabs");
    const paneNames: PaneName[] = ["ask-factual", "ask-descriptive", "query-editor"];
    for (const name of paneNames) {
      const button = el("button", `tab tab-${name}`, name);
      button.addEventListener("click", () => this.showPane(name));
      tabs.appendChild(button);
    }
    const header = el("header", "app-header");
    header.append(this.yearSelect, this.layerBox);
    this.root.replaceChildren(
      this.banner,
      header,
      mapRoot,
      tabs,
      this.factual.element,
      this.descriptive.element,
      this.queryEditor.element,
    );
  }

  async start(): Promise<void> {
    const health = await this.api.health();
    this.state = initialState(health);
    this.yearSelect.replaceChildren(
      ...this.state.years.map((y) => new Option(String(y), String(y))),
    );
    this.yearSelect.value = String(this.state.year);
    this.showPane(this.state.pane);
    await this.refreshLayers();
  }

  showPane(name: PaneName): void {
    this.state = setPane(this.state, name);
    this.factual.element.hidden = name !== "ask-factual";
    this.descriptive.element.hidden = name !== "ask-descriptive";
    this.queryEditor.element.hidden = name !== "query-editor";
  }

  async changeYear(year: number): Promise<void> {
    this.state = setYear(this.state, year);
    this.yearSelect.value = String(this.state.year);
    await this.refreshLayers();
  }

  toggleLayerType(featureType: string): void {
    this.state = toggleLayer(this.state, featureType);
    this.map.setVisible(this.state.hiddenTypes);
  }

  async refreshLayers(): Promise<void> {
    try {
      const collection = await this.api.features({
        year: this.state.year,
        municipality: this.state.municipality ?? undefined,
      });
      this.banner.hidden = true;
      this.map.render(collection, this.state.hiddenTypes);
      this.layerBox.replaceChildren();
      for (const type of this.map.layerTypes()) {
        const label = el("label", "layer-toggle", ` ${type}`);
        const box = document.createElement("input");
        box.type = "checkbox";
        box.checked = !this.state.hiddenTypes.includes(type);
        box.dataset.layerType = type;
        box.addEventListener("change", () => this.toggleLayerType(type));
        label.prepend(box);
        this.layerBox.appendChild(label);
      }
    } catch (error) {
      this.banner.textContent = `failed to load features: ${String(error)}`;
      this.banner.hidden = false; // map stays interactive with stale layers
    }
  }
}

export async function bootstrapApp(root: HTMLElement, baseUrl: string = ""): Promise<App> {
  const app = new App(root, new ApiClient(baseUrl));
  await app.start();
  return app;
}

declare global {
  interface Window {
    CHRONOMAP_BASE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void bootstrapApp(
    document.getElementById("app") as HTMLElement,
    window.CHRONOMAP_BASE_URL ?? "",
  );
}
