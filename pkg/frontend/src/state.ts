// View state and pure transitions. Every change is reproducible from a
// (state, input) pair; panes are mutually exclusive by construction.

import type { DescriptiveResult, FactualResult, HealthInfo, SparqlResults } from "./types";

export type PaneName = "ask-factual" | "ask-descriptive" | "query-editor";

export type LastResults =
  | { kind: "factual"; value: FactualResult }
  | { kind: "descriptive"; value: DescriptiveResult }
  | { kind: "query"; value: SparqlResults }
  | null;

export interface ViewState {
  years: number[];
  year: number;
  municipalities: string[];
  municipality: string | null;
  hiddenTypes: string[];
  pane: PaneName;
  lastResults: LastResults;
}

export function initialState(health: HealthInfo): ViewState {
  if (health.years.length === 0) {
    throw new Error("service reports no years");
  }
  return {
    years: [...health.years],
    year: health.years[0],
    municipalities: [...health.municipalities],
    municipality: null,
    hiddenTypes: [],
    pane: "ask-factual",
    lastResults: null,
  };
}

export function setYear(state: ViewState, year: number): ViewState {
  if (!state.years.includes(year)) {
    return state; // invariant: selected year comes from /health
  }
  return { ...state, year };
}

export function setMunicipality(state: ViewState, municipality: string | null): ViewState {
  if (municipality !== null && !state.municipalities.includes(municipality)) {
    return state;
  }
  return { ...state, municipality };
}

export function setPane(state: ViewState, pane: PaneName): ViewState {
  return { ...state, pane };
}

export function toggleLayer(state: ViewState, featureType: string): ViewState {
  const hidden = state.hiddenTypes.includes(featureType)
    ? state.hiddenTypes.filter((t) => t !== featureType)
    : [...state.hiddenTypes, featureType];
  return { ...state, hiddenTypes: hidden };
}

export function setResults(state: ViewState, results: LastResults): ViewState {
  return { ...state, lastResults: results };
}
