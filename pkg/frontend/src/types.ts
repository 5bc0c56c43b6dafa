/** Payload shapes of the equix HTTP API. */

export interface CatalogSummary {
  name: string;
  root: string;
  documents: number;
}

export interface AttributeDef {
  name: string;
  type: "CDATA" | "ID" | "IDREF";
  default: "#REQUIRED" | "#IMPLIED";
}

export interface DtdElement {
  name: string;
  content: string;
  children: string[];
  attributes: AttributeDef[];
}

/** Structured DTD served by GET /catalogs/{name}/dtd and /results/{id}/dtd. */
export interface DtdPayload {
  root: string;
  elements: DtdElement[];
}

export interface ResultSetSummary {
  id: string;
  origin: string;
  query: unknown;
  document_count: number;
  created_at: string;
  result_dtd: string | null;
  ontology: string | null;
}

export interface DocsPage {
  page: number;
  page_size: number;
  total: number;
  documents: string[];
}

export interface OntologySummary {
  name: string;
  terms: string[];
}

export interface ErrorBody {
  code: string;
  message: string;
  diagnostics: string[];
}

/** The concrete-query JSON accepted by the service. */
export type MatcherJson =
  | { op: "true" }
  | { op: "word" | "phrase" | "regex"; value: string }
  | { op: "and" | "or"; args: MatcherJson[] }
  | { op: "not"; arg: MatcherJson };

export interface HavingJson {
  fn: string;
  op: string;
  value: number | string;
}

export interface QueryNodeJson {
  label: string;
  matcher?: MatcherJson;
  output?: boolean;
  agg?: string[];
  having?: HavingJson[];
  children?: { quantifier: string; node: QueryNodeJson }[];
}

export interface QueryJson {
  form: "concrete";
  mode?: "strict" | "ontology";
  ontology?: string;
  root: QueryNodeJson;
}
