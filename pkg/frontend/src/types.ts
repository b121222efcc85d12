// API payload shapes, mirroring the service's response models.

export interface HealthInfo {
  status: string;
  triples: number;
  years: number[];
  municipalities: string[];
}

export interface SparqlTerm {
  type: "uri" | "literal";
  value: string;
  datatype?: string;
}

export type SparqlRow = Record<string, SparqlTerm>;

export interface SparqlSelectResults {
  head: { vars: string[] };
  results: { bindings: SparqlRow[] };
}

export interface SparqlAskResults {
  head: Record<string, never>;
  boolean: boolean;
}

export type SparqlResults = SparqlSelectResults | SparqlAskResults;

export function isAskResults(r: SparqlResults): r is SparqlAskResults {
  return "boolean" in r;
}

export interface ValidationInfo {
  verdict: string;
  query?: string | null;
  reason?: string | null;
}

export interface FactualResult {
  question: string;
  query: string | null;
  validation: ValidationInfo | null;
  solution: SparqlResults | null;
  answer_text: string | null;
  status: "delivered" | "failed";
  failed_stage: string | null;
  failure_reason: string | null;
  attempts: number;
}

export interface DescriptiveResult {
  question: string;
  sub_results: FactualResult[];
  facts_text: string;
  contexts_used: string[];
  answer_text: string | null;
  status: "delivered" | "failed";
  failed_stage: string | null;
  failure_reason: string | null;
  warnings: string[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  stage?: string | null;
}

export interface FeatureProperties {
  iri: string;
  type: string;
  year: number | null;
  areaSqm?: number;
  lengthM?: number;
  currentName?: string;
}

export type GeoJsonGeometry =
  | { type: "Point"; coordinates: number[] }
  | { type: "LineString"; coordinates: number[][] }
  | { type: "Polygon"; coordinates: number[][][] }
  | { type: "MultiPolygon"; coordinates: number[][][][] };

export interface MapFeature {
  type: "Feature";
  properties: FeatureProperties;
  geometry: GeoJsonGeometry;
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: MapFeature[];
}
