/** Browser entry point: catalog picker, query form, results, requery. */

import { ApiError, EquixClient } from "./api.js";
import { FormError, QueryForm } from "./form.js";
import { renderForm, renderResults } from "./render.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8743";

interface AppState {
  catalog: string | null;
  form: QueryForm | null;
  /** null targets the catalog; otherwise the result set being requeried. */
  requeryTarget: string | null;
  diagnostics: string[];
}

const client = new EquixClient(SERVICE_URL);
const state: AppState = {
  catalog: null,
  form: null,
  requeryTarget: null,
  diagnostics: [],
};

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function formPane(): HTMLElement {
  return byId("form-pane");
}

function resultsPane(): HTMLElement {
  return byId("results-pane");
}

function redraw(): void {
  if (!state.form) return;
  renderForm(formPane(), state.form, { onChanged: redraw, onSubmit: submit }, state.diagnostics);
}

async function openCatalog(name: string): Promise<void> {
  state.catalog = name;
  state.requeryTarget = null;
  state.diagnostics = [];
  state.form = new QueryForm(await client.catalogDtd(name));
  resultsPane().replaceChildren();
  redraw();
}

async function openRequery(resultId: string): Promise<void> {
  try {
    state.form = new QueryForm(await client.resultDtd(resultId));
  } catch (err) {
    if (err instanceof ApiError && err.code === "no-result-dtd") return;
    throw err;
  }
  state.requeryTarget = resultId;
  state.diagnostics = [];
  redraw();
}

async function submit(): Promise<void> {
  if (!state.form || !state.catalog) return;
  let query;
  try {
    query = state.form.emit();
  } catch (err) {
    if (err instanceof FormError) {
      state.diagnostics = [err.message];
      redraw();
      return;
    }
    throw err;
  }
  try {
    const summary = state.requeryTarget
      ? await client.requery(state.requeryTarget, query)
      : await client.query(state.catalog, query);
    state.diagnostics = [];
    redraw();
    const docs = await client.resultDocs(summary.id);
    renderResults(
      resultsPane(),
      {
        summaryLine: `${summary.document_count} result document(s)`,
        documents: docs.documents,
        resultDtd: summary.result_dtd,
        provenance: await client.provenance(summary.id),
        requeryEnabled: summary.result_dtd !== null,
      },
      () => void openRequery(summary.id),
    );
  } catch (err) {
    if (err instanceof ApiError) {
      state.diagnostics = err.diagnostics.length ? err.diagnostics : [err.message];
      redraw();
      return;
    }
    throw err;
  }
}

async function boot(): Promise<void> {
  const picker = byId("catalog-picker") as HTMLSelectElement;
  const catalogs = await client.catalogs();
  for (const c of catalogs) {
    const opt = document.createElement("option");
    opt.value = c.name;
    opt.textContent = `${c.name} (${c.documents} document(s), root ${c.root})`;
    picker.append(opt);
  }
  picker.addEventListener("change", () => void openCatalog(picker.value));
  if (catalogs.length) await openCatalog(catalogs[0].name);
}

void boot();
