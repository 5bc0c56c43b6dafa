/**
 * The query-form model: a tree of widget rows built by exploring a DTD.
 *
 * The initial form shows only the catalog's root element with one free-text
 * constraint box.  Expanding a row reveals its sub-elements and attributes
 * as new rows, each with a constraint input, a quantifier selector and an
 * output checkbox.  Emitting compiles the touched rows into the concrete
 * query JSON understood by the service; untouched rows stay out of the
 * query so that displaying a row never constrains the results.
 */

import type {
  DtdElement,
  DtdPayload,
  HavingJson,
  MatcherJson,
  QueryJson,
  QueryNodeJson,
} from "./types.js";

export type Quantifier = "one-is" | "none-is" | "all-are" | "not-all-are";

export const QUANTIFIERS: Quantifier[] = [
  "one-is",
  "none-is",
  "all-are",
  "not-all-are",
];

/** User-facing quantifier wording. */
export const QUANTIFIER_LABELS: Record<Quantifier, string> = {
  "one-is": "One Is",
  "none-is": "None Is",
  "all-are": "All Are",
  "not-all-are": "Not All Are",
};

export const AGG_FUNCTIONS = ["count", "min", "max", "sum", "avg"] as const;
export type AggFunction = (typeof AGG_FUNCTIONS)[number];

export interface FormRow {
  readonly label: string;
  readonly kind: "element" | "attribute";
  /** Whether the row can be expanded further (elements with content/attrs). */
  readonly expandable: boolean;
  quantifier: Quantifier;
  constraint: string;
  output: boolean;
  expanded: boolean;
  children: FormRow[];
  agg: AggFunction[];
  having: HavingJson[];
}

export class FormError extends Error {}

function makeRow(
  label: string,
  kind: "element" | "attribute",
  expandable: boolean,
): FormRow {
  return {
    label,
    kind,
    expandable,
    quantifier: "one-is",
    constraint: "",
    output: false,
    expanded: false,
    children: [],
    agg: [],
    having: [],
  };
}

/**
 * Compile a free-text constraint box into a matcher.
 *
 * A quoted string is a phrase ("Wild West" finds the words adjacent), a
 * /pattern/ is a regular expression, several words are a conjunction of
 * word matchers, one word is a word matcher.
 */
export function compileConstraint(text: string): MatcherJson | undefined {
  const trimmed = text.trim();
  if (!trimmed) return undefined;
  const quoted = trimmed.match(/^"(.*)"$/s);
  if (quoted) return { op: "phrase", value: quoted[1] };
  const regex = trimmed.match(/^\/(.+)\/$/s);
  if (regex) return { op: "regex", value: regex[1] };
  const words = trimmed.split(/\s+/);
  if (words.length === 1) return { op: "word", value: words[0] };
  return { op: "and", args: words.map((w) => ({ op: "word", value: w })) };
}

/** A row is part of the query once the user touched it (or a descendant). */
export function isActive(row: FormRow): boolean {
  return (
    row.output ||
    row.constraint.trim() !== "" ||
    row.quantifier !== "one-is" ||
    row.agg.length > 0 ||
    row.having.length > 0 ||
    row.children.some(isActive)
  );
}

export class QueryForm {
  readonly root: FormRow;
  /** Aggregation widgets render only when this is on. */
  advanced = false;

  private readonly elements: Map<string, DtdElement>;

  constructor(readonly dtd: DtdPayload) {
    this.elements = new Map(dtd.elements.map((e) => [e.name, e]));
    const rootDef = this.elements.get(dtd.root);
    if (!rootDef) throw new FormError(`DTD does not define root '${dtd.root}'`);
    this.root = makeRow(dtd.root, "element", this.hasExpansion(rootDef));
  }

  private hasExpansion(def: DtdElement): boolean {
    return def.children.length > 0 || def.attributes.length > 0;
  }

  /** Reveal a row's sub-element and attribute rows, as declared in the DTD. */
  expand(row: FormRow): FormRow[] {
    if (row.expanded) return row.children;
    if (row.kind !== "element") {
      throw new FormError(`'${row.label}' is an attribute and cannot expand`);
    }
    const def = this.elements.get(row.label);
    if (!def) throw new FormError(`'${row.label}' is not a declared element`);
    row.children = [
      ...def.attributes.map((a) => makeRow(a.name, "attribute", false)),
      ...def.children.map((name) => {
        const child = this.elements.get(name);
        return makeRow(name, "element", child ? this.hasExpansion(child) : false);
      }),
    ];
    row.expanded = true;
    return row.children;
  }

  expandAll(): void {
    const walk = (row: FormRow) => {
      if (row.kind === "element" && row.expandable) this.expand(row);
      row.children.forEach(walk);
    };
    walk(this.root);
  }

  /** All rows currently visible, in display order. */
  rows(): FormRow[] {
    const out: FormRow[] = [];
    const walk = (row: FormRow) => {
      out.push(row);
      if (row.expanded) row.children.forEach(walk);
    };
    walk(this.root);
    return out;
  }

  elementRows(): FormRow[] {
    return this.rows().filter((r) => r.kind === "element");
  }

  /** Find a visible row by the labels on its path (test convenience). */
  row(...path: string[]): FormRow {
    let current = this.root;
    if (path[0] !== current.label) throw new FormError(`no row at ${path.join("/")}`);
    for (const label of path.slice(1)) {
      const next = current.children.find((c) => c.label === label);
      if (!next) throw new FormError(`no row at ${path.join("/")}`);
      current = next;
    }
    return current;
  }

  /** Compile the touched rows into concrete-query JSON. */
  emit(): QueryJson {
    if (!this.rows().some((r) => r.output)) {
      throw new FormError("mark at least one row for output");
    }
    const convert = (row: FormRow): QueryNodeJson => {
      const node: QueryNodeJson = { label: row.label };
      const matcher = compileConstraint(row.constraint);
      if (matcher) node.matcher = matcher;
      if (row.output) node.output = true;
      if (row.agg.length) node.agg = [...row.agg];
      if (row.having.length) node.having = row.having.map((h) => ({ ...h }));
      const active = row.children.filter(isActive);
      if (active.length) {
        node.children = active.map((c) => ({
          quantifier: c.quantifier,
          node: convert(c),
        }));
      }
      return node;
    };
    return { form: "concrete", root: convert(this.root) };
  }
}
