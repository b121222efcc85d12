import { describe, expect, it } from "vitest";

import {
  initialState,
  setMunicipality,
  setPane,
  setYear,
  toggleLayer,
} from "../src/state";
import { HEALTH } from "./fixtures";

describe("view state", () => {
  it("starts on the first reported year with the factual pane", () => {
    const state = initialState(HEALTH);
    expect(state.year).toBe(1877);
    expect(state.pane).toBe("ask-factual");
    expect(state.hiddenTypes).toEqual([]);
  });

  it("rejects years not reported by /health", () => {
    const state = initialState(HEALTH);
    expect(setYear(state, 1955)).toBe(state);
    expect(setYear(state, 1901).year).toBe(1901);
  });

  it("rejects unknown municipalities", () => {
    const state = initialState(HEALTH);
    expect(setMunicipality(state, "zurich")).toBe(state);
    expect(setMunicipality(state, "bargen").municipality).toBe("bargen");
    expect(setMunicipality(setMunicipality(state, "bargen"), null).municipality).toBeNull();
  });

  it("panes are mutually exclusive by construction", () => {
    const state = setPane(initialState(HEALTH), "query-editor");
    expect(state.pane).toBe("query-editor");
  });

  it("layer toggling is an involution", () => {
    const state = initialState(HEALTH);
    const hidden = toggleLayer(state, "lake");
    expect(hidden.hiddenTypes).toEqual(["lake"]);
    expect(toggleLayer(hidden, "lake").hiddenTypes).toEqual([]);
  });

  it("transitions are pure", () => {
    const state = initialState(HEALTH);
    setYear(state, 1901);
    toggleLayer(state, "lake");
    expect(state.year).toBe(1877);
    expect(state.hiddenTypes).toEqual([]);
  });
});
