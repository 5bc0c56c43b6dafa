/** Typed client for the equix HTTP API. */

import type {
  CatalogSummary,
  DocsPage,
  DtdPayload,
  ErrorBody,
  OntologySummary,
  QueryJson,
  ResultSetSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly diagnostics: string[] = [],
  ) {
    super(message);
  }
}

async function asError(resp: Response): Promise<ApiError> {
  let body: Partial<ErrorBody> = {};
  try {
    body = (await resp.json()) as ErrorBody;
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(
    resp.status,
    body.code ?? "http-error",
    body.message ?? resp.statusText,
    body.diagnostics ?? [],
  );
}

export class EquixClient {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw await asError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await asError(resp);
    return (await resp.json()) as T;
  }

  catalogs(): Promise<CatalogSummary[]> {
    return this.get("/catalogs");
  }

  catalogDtd(name: string): Promise<DtdPayload> {
    return this.get(`/catalogs/${encodeURIComponent(name)}/dtd`);
  }

  query(catalog: string, query: QueryJson): Promise<ResultSetSummary> {
    return this.post(`/catalogs/${encodeURIComponent(catalog)}/query`, query);
  }

  requery(resultId: string, query: QueryJson): Promise<ResultSetSummary> {
    return this.post(`/results/${encodeURIComponent(resultId)}/query`, query);
  }

  resultSummary(id: string): Promise<ResultSetSummary> {
    return this.get(`/results/${encodeURIComponent(id)}`);
  }

  resultDocs(id: string, page = 1, pageSize = 50): Promise<DocsPage> {
    return this.get(
      `/results/${encodeURIComponent(id)}/docs?page=${page}&page_size=${pageSize}`,
    );
  }

  /** Throws ApiError code "no-result-dtd" for ontology-mode result sets. */
  resultDtd(id: string): Promise<DtdPayload> {
    return this.get(`/results/${encodeURIComponent(id)}/dtd`);
  }

  ontologies(): Promise<OntologySummary[]> {
    return this.get("/ontologies");
  }

  /**
   * Provenance chain of a result set: catalog name first, then each
   * result-set id down to (and including) the given one.
   */
  async provenance(id: string): Promise<string[]> {
    const chain: string[] = [];
    let cursor = id;
    for (;;) {
      const summary: ResultSetSummary = await this.resultSummary(cursor);
      chain.unshift(cursor);
      try {
        await this.resultSummary(summary.origin);
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          chain.unshift(summary.origin); // a catalog name roots the chain
          return chain;
        }
        throw err;
      }
      cursor = summary.origin;
    }
  }
}
