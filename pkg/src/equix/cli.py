"""Command-line front door: query, validate, dtd, serve.

Exit codes: 0 success, 2 validation failure (query or catalog diagnostics),
1 anything else (including an --oracle mismatch).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

from . import aggregation, evaluator, ontology as ontology_mod
from .query_model import QueryFormatError, load_query, validate_query_against_dtd
from .result_dtd import create_result_dtd
from .store import dtd_payload
from .xml_model import CatalogError, conformance_diagnostics, load_catalog, serialize_document

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2


def _resolve_catalog(ref: str) -> Path:
    path = Path(ref)
    if path.is_file():
        return path
    data_dir = os.environ.get("EQUIX_DATA_DIR")
    if data_dir:
        candidate = Path(data_dir) / "catalogs" / f"{ref}.json"
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"no catalog manifest at {ref!r}")


def _strip_aggregates(obj):
    """Drop agg/having annotations (used when --agg is not given)."""
    obj = copy.deepcopy(obj)

    def scrub(node):
        node.pop("agg", None)
        node.pop("having", None)
        for entry in node.get("children", []):
            scrub(entry["node"])

    scrub(obj["root"] if "root" in obj else obj)
    return obj


def _load_ontology_for(args, query):
    if args.ontology_file:
        return ontology_mod.load_ontology(args.ontology_file)
    data_dir = os.environ.get("EQUIX_DATA_DIR")
    if data_dir and query.ontology:
        candidate = Path(data_dir) / "ontologies" / f"{query.ontology}.json"
        if candidate.is_file():
            return ontology_mod.load_ontology(candidate)
    raise FileNotFoundError(
        "ontology mode needs --ontology-file or an ontology manifest under "
        "$EQUIX_DATA_DIR/ontologies"
    )


def _summary_xml(summary: dict) -> str:
    lines = [f'<summary catalog="{summary["catalog"]}" documents="{summary["documents"]}">']
    for row in summary["results"]:
        lines.append(
            f'  <result file="{row["file"]}" output-nodes="{row["output_nodes"]}"/>'
        )
    lines.append("</summary>")
    return "\n".join(lines) + "\n"


def cmd_query(args) -> int:
    try:
        catalog = load_catalog(_resolve_catalog(args.catalog))
    except (FileNotFoundError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        query_obj = json.loads(Path(args.query).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read query: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not args.agg:
        query_obj = _strip_aggregates(query_obj)
    try:
        query = load_query(query_obj)
    except QueryFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.mode:
        query.mode = args.mode

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if query.mode == "ontology":
        try:
            ont = _load_ontology_for(args, query)
        except (FileNotFoundError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        diags = ontology_mod.validate_query_against_ontology(query, ont)
        if diags:
            for d in diags:
                print(f"invalid query: {d}", file=sys.stderr)
            return EXIT_INVALID
        docs = [
            d for d in catalog.documents if ontology_mod.describable_by(d, ont)
        ]
        evaluations = [(doc, ontology_mod.query_evaluate_reg(doc, query)) for doc in docs]
        projections = [
            (evaluator.project(doc, out), out) for doc, out in evaluations if out
        ]
        dtd_text = None
    else:
        diags = validate_query_against_dtd(query, catalog.dtd)
        if diags:
            for d in diags:
                print(f"invalid query: {d}", file=sys.stderr)
            return EXIT_INVALID
        projections = []
        for doc in catalog.documents:
            projected, out = aggregation.evaluate_document(doc, query, catalog.dtd)
            if projected is not None:
                projections.append((projected, out))
        dtd_text = create_result_dtd(query, catalog.dtd, origin=catalog.name).render()

    oracle_failed = False
    if args.oracle:
        for doc in catalog.documents:
            try:
                if query.mode == "ontology":
                    expected = ontology_mod.brute_force_output_set_reg(doc, query)
                    actual = ontology_mod.query_evaluate_reg(doc, query)
                else:
                    expected = evaluator.brute_force_output_set(doc, query)
                    actual = evaluator.query_evaluate(doc, query)
            except ValueError:
                print("oracle: SKIPPED (instance too large)")
                continue
            if actual == expected:
                print("oracle: MATCH")
            else:
                print("oracle: MISMATCH")
                oracle_failed = True

    rows = []
    for i, (projected, out) in enumerate(projections, start=1):
        name = f"result-{i:04d}.xml"
        (out_dir / name).write_text(serialize_document(projected))
        rows.append({"file": name, "output_nodes": len(out.out)})
    if dtd_text is not None:
        (out_dir / "result.dtd").write_text(dtd_text)
    summary = {
        "catalog": catalog.name,
        "query": str(args.query),
        "documents": len(rows),
        "results": rows,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if args.format == "xml":
        print(_summary_xml(summary), end="")
    else:
        print(json.dumps(summary, indent=2))
    return EXIT_ERROR if oracle_failed else EXIT_OK


def cmd_validate(args) -> int:
    try:
        catalog = load_catalog(_resolve_catalog(args.catalog), strict=False)
    except (FileNotFoundError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    failures = 0
    for name, doc in zip(catalog.document_names, catalog.documents):
        problems = conformance_diagnostics(doc, catalog.dtd)
        if doc.label(doc.root) != catalog.dtd.root_element:
            problems.insert(
                0,
                f"root '{doc.label(doc.root)}' is not the DTD root "
                f"'{catalog.dtd.root_element}'",
            )
        if problems:
            failures += 1
            print(f"{name}: FAIL")
            for p in problems:
                print(f"  {p}")
        else:
            print(f"{name}: OK")
    return EXIT_INVALID if failures else EXIT_OK


def cmd_dtd(args) -> int:
    try:
        catalog = load_catalog(_resolve_catalog(args.catalog))
    except (FileNotFoundError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.format == "json":
        print(json.dumps(dtd_payload(catalog.dtd), indent=2))
    else:
        print(catalog.dtd.render(), end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    data_dir = args.data_dir or os.environ.get("EQUIX_DATA_DIR", "equix-data")
    app = create_app(data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_query = sub.add_parser("query", help="run a query over a catalog")
    p_query.add_argument("catalog", help="catalog manifest path or name")
    p_query.add_argument("query", help="query JSON file")
    p_query.add_argument("-o", "--out", required=True, help="output directory")
    p_query.add_argument("--oracle", action="store_true",
                         help="cross-check against the brute-force oracle")
    p_query.add_argument("--mode", choices=["strict", "ontology"],
                         help="override the query's mode")
    p_query.add_argument("--agg", action="store_true",
                         help="honor aggregation annotations")
    p_query.add_argument("--ontology-file", help="ontology manifest (ontology mode)")
    p_query.add_argument("--format", choices=["json", "xml"], default="json")
    p_query.set_defaults(func=cmd_query)

    p_validate = sub.add_parser("validate", help="check strict conformance")
    p_validate.add_argument("catalog")
    p_validate.set_defaults(func=cmd_validate)

    p_dtd = sub.add_parser("dtd", help="print a catalog's DTD")
    p_dtd.add_argument("catalog")
    p_dtd.add_argument("--format", choices=["text", "json"], default="text")
    p_dtd.set_defaults(func=cmd_dtd)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--data-dir", help="store root (default $EQUIX_DATA_DIR)")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8743)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
