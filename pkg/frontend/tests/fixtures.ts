// Canned API payloads and a fetch router for offline tests.

import type {
  DescriptiveResult,
  FactualResult,
  FeatureCollection,
  HealthInfo,
} from "../src/types";

export const HEALTH: HealthInfo = {
  status: "ok",
  triples: 716,
  years: [1877, 1901, 1916, 1930],
  municipalities: ["aarberg", "bargen"],
};

export function featuresFor(year: number): FeatureCollection {
  const lake = {
    type: "Feature" as const,
    properties: {
      iri: `http://chronomap.local/feature/ta_110_${year}_lake_0000`,
      type: "lake",
      year,
      areaSqm: 1600,
      currentName: "Lobsigensee",
    },
    geometry: {
      type: "Polygon" as const,
      coordinates: [
        [
          [100, 100],
          [140, 100],
          [140, 140],
          [100, 140],
          [100, 100],
        ],
      ],
    },
  };
  const stream = {
    type: "Feature" as const,
    properties: {
      iri: `http://chronomap.local/feature/ta_110_${year}_stream_0001`,
      type: "stream",
      year,
      lengthM: 200,
    },
    geometry: {
      type: "LineString" as const,
      coordinates: [
        [3500, 100],
        [3500, 300],
      ],
    },
  };
  return { type: "FeatureCollection", features: year === 1877 ? [lake] : [lake, stream] };
}

export const FACTUAL: FactualResult = {
  question: "How many lakes were there in Bargen in 1916?",
  query:
    'SELECT (COUNT(?f) AS ?n) WHERE { ?f cmo:featureType "lake" . ?f cmo:municipality "bargen" . ?f cmo:year 1916 }',
  validation: { verdict: "accepted" },
  solution: {
    head: { vars: ["f", "n"] },
    results: {
      bindings: [
        {
          f: { type: "uri", value: "http://chronomap.local/feature/ta_110_1916_lake_0000" },
          n: {
            type: "literal",
            value: "2",
            datatype: "http://www.w3.org/2001/XMLSchema#integer",
          },
        },
        {
          f: { type: "uri", value: "http://chronomap.local/feature/ta_110_1916_lake_0001" },
          n: {
            type: "literal",
            value: "2",
            datatype: "http://www.w3.org/2001/XMLSchema#integer",
          },
        },
      ],
    },
  },
  answer_text: "There were 2 lakes in Bargen in 1916.",
  status: "delivered",
  failed_stage: null,
  failure_reason: null,
  attempts: 1,
};

export const DESCRIPTIVE: DescriptiveResult = {
  question: "Please provide an overview about Aarberg in 1901.",
  sub_results: [
    { ...FACTUAL, question: "How many forests were there in Aarberg in 1901?", answer_text: "There were 18 forests.", solution: null },
  ],
  facts_text: "Q: How many forests were there in Aarberg in 1901? A: There were 18 forests.",
  contexts_used: ["kg", "search"],
  answer_text: "Aarberg in 1901 was dominated by forests and a single wetland.",
  status: "delivered",
  failed_stage: null,
  failure_reason: null,
  warnings: [],
};

export const PARSE_ERROR_BODY = {
  code: "parse_error",
  message: "expected term at line 2, column 17 (expected one of: variable, iri)",
  stage: null,
};

export interface RecordedRequest {
  path: string;
  body: unknown;
}

export function installFetchRouter(): RecordedRequest[] {
  const calls: RecordedRequest[] = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), "http://service.test");
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    calls.push({ path: url.pathname + url.search, body });
    const json = (payload: unknown, status = 200) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { "content-type": "application/json" },
      });
    if (url.pathname === "/health") return json(HEALTH);
    if (url.pathname === "/features") {
      return json(featuresFor(Number(url.searchParams.get("year") ?? "1877")));
    }
    if (url.pathname === "/qa/factual") return json(FACTUAL);
    if (url.pathname === "/qa/descriptive") return json(DESCRIPTIVE);
    if (url.pathname === "/sparql") {
      const query = (body as { query: string }).query;
      if (query.includes("ASK")) return json({ head: {}, boolean: true });
      if (query.includes("bogus")) return json(PARSE_ERROR_BODY, 400);
      return json({
        head: { vars: ["f", "a"] },
        results: {
          bindings: [
            {
              f: { type: "uri", value: "http://chronomap.local/feature/x" },
              a: { type: "literal", value: "1600", datatype: "http://www.w3.org/2001/XMLSchema#decimal" },
            },
            {
              f: { type: "uri", value: "http://chronomap.local/feature/y" },
              a: { type: "literal", value: "3600", datatype: "http://www.w3.org/2001/XMLSchema#decimal" },
            },
            {
              f: { type: "uri", value: "http://chronomap.local/feature/z" },
              a: { type: "literal", value: "29114", datatype: "http://www.w3.org/2001/XMLSchema#decimal" },
            },
          ],
        },
      });
    }
    return json({ code: "not_found", message: "no such endpoint" }, 404);
  }) as typeof fetch;
  return calls;
}
