/**
 * Plain-DOM rendering of the query form and result views.
 *
 * Each form row renders as: expand button (elements with content), label,
 * quantifier selector (non-root rows), constraint input, output checkbox,
 * and, behind the advanced toggle, aggregation widgets.  Validation
 * diagnostics returned by the service attach to the rows they mention.
 */

import {
  AGG_FUNCTIONS,
  AggFunction,
  FormRow,
  QUANTIFIER_LABELS,
  QUANTIFIERS,
  Quantifier,
  QueryForm,
} from "./form.js";

export interface FormCallbacks {
  onChanged(): void;
  onSubmit(): void;
}

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

function rowControls(
  form: QueryForm,
  row: FormRow,
  depth: number,
  callbacks: FormCallbacks,
  diagnostics: string[],
): HTMLElement {
  const line = el("div", "form-row");
  line.style.marginLeft = `${depth * 1.5}rem`;
  line.dataset.label = row.label;

  if (row.kind === "element" && row.expandable && !row.expanded) {
    const expand = el("button", "expand", "+");
    expand.title = `show the attributes and sub-elements of ${row.label}`;
    expand.addEventListener("click", () => {
      form.expand(row);
      callbacks.onChanged();
    });
    line.append(expand);
  }

  line.append(el("span", `label kind-${row.kind}`, row.label));

  if (row !== form.root) {
    const quant = el("select", "quantifier");
    for (const q of QUANTIFIERS) {
      const opt = el("option", undefined, QUANTIFIER_LABELS[q]);
      opt.value = q;
      quant.append(opt);
    }
    quant.value = row.quantifier;
    quant.addEventListener("change", () => {
      row.quantifier = quant.value as Quantifier;
      callbacks.onChanged();
    });
    line.append(quant);
  }

  const constraint = el("input", "constraint");
  constraint.placeholder = 'words, "a phrase", or /regex/';
  constraint.value = row.constraint;
  constraint.addEventListener("input", () => {
    row.constraint = constraint.value;
  });
  line.append(constraint);

  const outputLabel = el("label", "output");
  const output = el("input");
  output.type = "checkbox";
  output.checked = row.output;
  output.addEventListener("change", () => {
    row.output = output.checked;
  });
  outputLabel.append(output, document.createTextNode(" output"));
  line.append(outputLabel);

  if (form.advanced && row !== form.root) {
    const aggBox = el("span", "agg");
    for (const fn of AGG_FUNCTIONS) {
      const aggLabel = el("label", undefined);
      const box = el("input");
      box.type = "checkbox";
      box.checked = row.agg.includes(fn);
      box.addEventListener("change", () => {
        row.agg = box.checked
          ? [...row.agg, fn as AggFunction]
          : row.agg.filter((f) => f !== fn);
      });
      aggLabel.append(box, document.createTextNode(fn));
      aggBox.append(aggLabel);
    }
    line.append(aggBox);
  }

  const related = diagnostics.filter((d) => d.includes(`'${row.label}'`));
  for (const message of related) {
    line.append(el("span", "diagnostic", message));
  }
  return line;
}

export function renderForm(
  container: HTMLElement,
  form: QueryForm,
  callbacks: FormCallbacks,
  diagnostics: string[] = [],
): void {
  container.replaceChildren();

  const walk = (row: FormRow, depth: number) => {
    container.append(rowControls(form, row, depth, callbacks, diagnostics));
    if (row.expanded) row.children.forEach((c) => walk(c, depth + 1));
  };
  walk(form.root, 0);

  const general = diagnostics.filter(
    (d) => !form.rows().some((r) => d.includes(`'${r.label}'`)),
  );
  for (const message of general) {
    container.append(el("div", "diagnostic", message));
  }

  const bar = el("div", "actions");
  const advanced = el("label", "advanced-toggle");
  const advancedBox = el("input");
  advancedBox.type = "checkbox";
  advancedBox.checked = form.advanced;
  advancedBox.addEventListener("change", () => {
    form.advanced = advancedBox.checked;
    callbacks.onChanged();
  });
  advanced.append(advancedBox, document.createTextNode(" advanced (aggregation)"));

  const submit = el("button", "submit", "Search");
  submit.addEventListener("click", callbacks.onSubmit);
  bar.append(advanced, submit);
  container.append(bar);
}

export interface ResultView {
  summaryLine: string;
  documents: string[];
  resultDtd: string | null;
  provenance: string[];
  requeryEnabled: boolean;
}

export function renderResults(
  container: HTMLElement,
  view: ResultView,
  onRequery: () => void,
): void {
  container.replaceChildren();
  container.append(el("div", "breadcrumb", view.provenance.join(" → ")));
  container.append(el("div", "summary", view.summaryLine));
  if (view.resultDtd) {
    const dtd = el("pre", "result-dtd");
    dtd.textContent = view.resultDtd;
    container.append(dtd);
  }
  for (const doc of view.documents) {
    const pre = el("pre", "document");
    pre.textContent = doc;
    container.append(pre);
  }
  const requery = el("button", "requery", "Requery these results");
  requery.disabled = !view.requeryEnabled;
  if (!view.requeryEnabled) {
    container.append(
      el(
        "div",
        "note",
        "Ontology-mode results carry no result DTD; requery is unavailable.",
      ),
    );
  }
  requery.addEventListener("click", onRequery);
  container.append(requery);
}
