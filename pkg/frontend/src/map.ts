// SVG feature renderer: one toggleable layer per feature type, popups from
// feature properties, and highlighting keyed on feature IRIs. Coordinate
// scaling is purely presentational; no displayed value is computed here.

import type { FeatureCollection, GeoJsonGeometry, MapFeature } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";

const LAYER_COLORS: Record<string, string> = {
  lake: "#3b82d0",
  river: "#2a9df4",
  stream: "#63b3ed",
  wetland: "#4fa56f",
  forest: "#2f7d46",
};

function geometryPoints(geometry: GeoJsonGeometry): number[][] {
  switch (geometry.type) {
    case "Point":
      return [geometry.coordinates];
    case "LineString":
      return geometry.coordinates;
    case "Polygon":
      return geometry.coordinates.flat();
    case "MultiPolygon":
      return geometry.coordinates.flat(2);
  }
}

function ringPath(ring: number[][]): string {
  return (
    ring.map((pt, i) => `${i === 0 ? "M" : "L"}${pt[0]} ${pt[1]}`).join(" ") + " Z"
  );
}

export class MapView {
  private svg: SVGSVGElement;
  private popup: HTMLElement;
  private layers = new Map<string, SVGGElement>();

  constructor(root: HTMLElement) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "map-canvas");
    this.svg.setAttribute("preserveAspectRatio", "xMidYMid meet");
    this.popup = document.createElement("div");
    this.popup.className = "feature-popup";
    this.popup.hidden = true;
    root.appendChild(this.svg);
    root.appendChild(this.popup);
  }

  render(collection: FeatureCollection, hiddenTypes: string[] = []): void {
    this.svg.replaceChildren();
    this.layers.clear();
    this.popup.hidden = true;
    const points = collection.features.flatMap((f) => geometryPoints(f.geometry));
    if (points.length > 0) {
      const xs = points.map((p) => p[0]);
      const ys = points.map((p) => p[1]);
      const minX = Math.min(...xs);
      const maxX = Math.max(...xs);
      const minY = Math.min(...ys);
      const maxY = Math.max(...ys);
      const pad = Math.max(maxX - minX, maxY - minY, 1) * 0.05;
      this.svg.setAttribute(
        "viewBox",
        `${minX - pad} ${-(maxY + pad)} ${maxX - minX + 2 * pad} ${maxY - minY + 2 * pad}`,
      );
    }
    for (const feature of collection.features) {
      const layer = this.layerFor(feature.properties.type);
      layer.appendChild(this.renderFeature(feature));
    }
    this.setVisible(hiddenTypes);
  }

  layerTypes(): string[] {
    return [...this.layers.keys()].sort();
  }

  setVisible(hiddenTypes: string[]): void {
    for (const [type, layer] of this.layers) {
      layer.style.display = hiddenTypes.includes(type) ? "none" : "";
    }
  }

  highlight(iris: string[]): void {
    const wanted = new Set(iris);
    for (const el of this.svg.querySelectorAll<SVGElement>("[data-iri]")) {
      el.classList.toggle("highlight", wanted.has(el.dataset.iri ?? ""));
    }
  }

  highlightedIris(): string[] {
    return [...this.svg.querySelectorAll<SVGElement>(".highlight")].map(
      (el) => el.dataset.iri ?? "",
    );
  }

  private layerFor(type: string): SVGGElement {
    let layer = this.layers.get(type);
    if (!layer) {
      layer = document.createElementNS(SVG_NS, "g");
      layer.dataset.layerType = type;
      this.layers.set(type, layer);
      this.svg.appendChild(layer);
    }
    return layer;
  }

  private renderFeature(feature: MapFeature): SVGElement {
    const color = LAYER_COLORS[feature.properties.type] ?? "#888";
    let el: SVGElement;
    const geometry = feature.geometry;
    if (geometry.type === "Point") {
      el = document.createElementNS(SVG_NS, "circle");
      el.setAttribute("cx", String(geometry.coordinates[0]));
      el.setAttribute("cy", String(-geometry.coordinates[1]));
      el.setAttribute("r", "6");
      el.setAttribute("fill", color);
    } else if (geometry.type === "LineString") {
      el = document.createElementNS(SVG_NS, "path");
      const d = geometry.coordinates
        .map((pt, i) => `${i === 0 ? "M" : "L"}${pt[0]} ${-pt[1]}`)
        .join(" ");
      el.setAttribute("d", d);
      el.setAttribute("fill", "none");
      el.setAttribute("stroke", color);
      el.setAttribute("stroke-width", "4");
    } else {
      const rings =
        geometry.type === "Polygon" ? [geometry.coordinates] : geometry.coordinates;
      el = document.createElementNS(SVG_NS, "path");
      const d = rings
        .flat()
        .map((ring) => ringPath(ring.map((pt) => [pt[0], -pt[1]])))
        .join(" ");
      el.setAttribute("d", d);
      el.setAttribute("fill", color);
      el.setAttribute("fill-opacity", "0.55");
      el.setAttribute("fill-rule", "evenodd");
    }
    el.classList.add("map-feature");
    el.dataset.iri = feature.properties.iri;
    el.addEventListener("click", () => this.showPopup(feature));
    return el;
  }

  private showPopup(feature: MapFeature): void {
    const props = feature.properties;
    const rows = [
      `type: ${props.type}`,
      `year: ${props.year ?? "?"}`,
    ];
    if (props.areaSqm !== undefined) rows.push(`area: ${props.areaSqm} m²`);
    if (props.lengthM !== undefined) rows.push(`length: ${props.lengthM} m`);
    if (props.currentName !== undefined) rows.push(`current name: ${props.currentName}`);
    this.popup.textContent = rows.join("\n");
    this.popup.hidden = false;
  }
}
