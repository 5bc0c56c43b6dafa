"""Persistent data store: catalogs, ontologies and result-set records.

Result sets persist as directories (manifest JSON + XML files + DTD file)
under the data directory; the in-memory index is rebuilt on startup so
requery chains survive restarts.  Result-set ids are content-addressed
over (origin, query), deduplicating identical requeries.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import aggregation, evaluator, ontology as ontology_mod
from .dtd import Dtd, parse_dtd
from .query_model import (
    AbstractQuery,
    load_query,
    validate_query_against_dtd,
)
from .result_dtd import create_result_dtd
from .xml_model import (
    Catalog,
    XmlDocument,
    load_catalog,
    parse_document,
    serialize_document,
)


class StoreError(Exception):
    def __init__(self, code: str, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.diagnostics = diagnostics or []


@dataclass
class ResultSetRecord:
    id: str
    origin: str  # catalog name or parent result-set id
    root_element: str
    query: dict
    document_count: int
    created_at: str
    result_dtd_text: str | None = None  # None in ontology mode
    ontology: str | None = None
    path: Path | None = None

    def summary(self) -> dict:
        return {
            "id": self.id,
            "origin": self.origin,
            "query": self.query,
            "document_count": self.document_count,
            "created_at": self.created_at,
            "result_dtd": self.result_dtd_text,
            "ontology": self.ontology,
        }


def result_set_id(origin: str, query_obj: dict) -> str:
    payload = json.dumps({"origin": origin, "query": query_obj}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class EquixStore:
    """Catalogs + ontologies + the persisted result-set store."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.catalogs: dict[str, Catalog] = {}
        self.ontologies: dict[str, ontology_mod.Ontology] = {}
        self._records: dict[str, ResultSetRecord] = {}
        self._lock = threading.RLock()
        self.reload()

    # -- loading ------------------------------------------------------------

    def reload(self) -> None:
        with self._lock:
            self.catalogs.clear()
            self.ontologies.clear()
            self._records.clear()
            cat_dir = self.data_dir / "catalogs"
            if cat_dir.is_dir():
                for manifest in sorted(cat_dir.glob("*.json")):
                    catalog = load_catalog(manifest)
                    self.catalogs[catalog.name] = catalog
            ont_dir = self.data_dir / "ontologies"
            if ont_dir.is_dir():
                for manifest in sorted(ont_dir.glob("*.json")):
                    ont = ontology_mod.load_ontology(manifest)
                    self.ontologies[ont.name] = ont
            res_dir = self.data_dir / "results"
            if res_dir.is_dir():
                for record_dir in sorted(res_dir.iterdir()):
                    manifest = record_dir / "manifest.json"
                    if manifest.is_file():
                        self._records[record_dir.name] = self._read_record(record_dir)

    def _read_record(self, record_dir: Path) -> ResultSetRecord:
        meta = json.loads((record_dir / "manifest.json").read_text())
        dtd_file = record_dir / "result.dtd"
        return ResultSetRecord(
            id=meta["id"],
            origin=meta["origin"],
            root_element=meta["root"],
            query=meta["query"],
            document_count=meta["document_count"],
            created_at=meta["created_at"],
            result_dtd_text=dtd_file.read_text() if dtd_file.is_file() else None,
            ontology=meta.get("ontology"),
            path=record_dir,
        )

    # -- lookups ------------------------------------------------------------

    def list_catalogs(self) -> list[dict]:
        return [
            {
                "name": c.name,
                "root": c.dtd.root_element,
                "documents": len(c.documents),
            }
            for c in self.catalogs.values()
        ]

    def record(self, result_id: str) -> ResultSetRecord:
        rec = self._records.get(result_id)
        if rec is None:
            raise StoreError("unknown-result", f"no result set {result_id!r}")
        return rec

    def result_documents(self, rec: ResultSetRecord) -> list[str]:
        assert rec.path is not None
        files = sorted(rec.path.glob("result-*.xml"))
        return [f.read_text() for f in files]

    def target_dtd(self, target: str) -> Dtd:
        """The DTD queries against `target` are validated and narrowed by."""
        if target in self.catalogs:
            return self.catalogs[target].dtd
        rec = self.record(target)
        if rec.result_dtd_text is None:
            raise StoreError(
                "no-result-dtd",
                f"result set {target!r} was produced in ontology mode and "
                "has no result DTD to requery against",
            )
        return parse_dtd(rec.result_dtd_text, rec.root_element)

    def _target_documents(self, target: str, dtd: Dtd) -> list[XmlDocument]:
        if target in self.catalogs:
            return self.catalogs[target].documents
        rec = self.record(target)
        return [parse_document(text, dtd) for text in self.result_documents(rec)]

    # -- evaluation ---------------------------------------------------------

    def create_result_set(self, target: str, query_obj: dict) -> ResultSetRecord:
        """Evaluate a query over a catalog or an earlier result set."""
        if target not in self.catalogs and target not in self._records:
            raise StoreError("unknown-target", f"no catalog or result set {target!r}")
        query = load_query(query_obj)
        if query.mode == "ontology":
            return self._create_ontology_result(target, query, query_obj)
        dtd = self.target_dtd(target)
        diagnostics = validate_query_against_dtd(query, dtd)
        if diagnostics:
            raise StoreError(
                "query-invalid", "query does not fit the target DTD", diagnostics
            )
        docs = self._target_documents(target, dtd)
        results = []
        for doc in docs:
            projected = aggregation.evaluate_with_aggregation(doc, query, dtd)
            if projected is not None:
                results.append(projected)
        rid = result_set_id(target, query_obj)
        result_dtd = create_result_dtd(query, dtd, origin=target, query_id=rid)
        return self._persist(
            rid,
            target,
            query_obj,
            results,
            result_dtd_text=result_dtd.render(),
            root_element=dtd.root_element,
        )

    def _create_ontology_result(
        self, target: str, query: AbstractQuery, query_obj: dict
    ) -> ResultSetRecord:
        ont = self.ontologies.get(query.ontology or "")
        if ont is None:
            raise StoreError("unknown-ontology", f"no ontology {query.ontology!r}")
        diagnostics = ontology_mod.validate_query_against_ontology(query, ont)
        if diagnostics:
            raise StoreError(
                "query-invalid", "query does not fit the ontology", diagnostics
            )
        # Ontology search ranges over every describable document in the store.
        docs: list[XmlDocument] = []
        for catalog in self.catalogs.values():
            docs.extend(
                d for d in catalog.documents if ontology_mod.describable_by(d, ont)
            )
        results = []
        for doc in docs:
            out = ontology_mod.query_evaluate_reg(doc, query)
            if out:
                results.append(evaluator.project(doc, out))
        rid = result_set_id(target, query_obj)
        return self._persist(
            rid,
            target,
            query_obj,
            results,
            ontology=ont.name,
            root_element=query.root.label,
        )

    def _persist(
        self,
        rid: str,
        origin: str,
        query_obj: dict,
        results: list[XmlDocument],
        root_element: str,
        result_dtd_text: str | None = None,
        ontology: str | None = None,
    ) -> ResultSetRecord:
        with self._lock:
            existing = self._records.get(rid)
            if existing is not None:
                return existing
            record_dir = self.data_dir / "results" / rid
            record_dir.mkdir(parents=True, exist_ok=True)
            for i, doc in enumerate(results, start=1):
                (record_dir / f"result-{i:04d}.xml").write_text(
                    serialize_document(doc)
                )
            if result_dtd_text is not None:
                (record_dir / "result.dtd").write_text(result_dtd_text)
            record = ResultSetRecord(
                id=rid,
                origin=origin,
                root_element=root_element,
                query=query_obj,
                document_count=len(results),
                created_at=datetime.now(timezone.utc).isoformat(),
                result_dtd_text=result_dtd_text,
                ontology=ontology,
                path=record_dir,
            )
            (record_dir / "manifest.json").write_text(
                json.dumps(
                    {
                        "id": record.id,
                        "origin": record.origin,
                        "root": record.root_element,
                        "query": record.query,
                        "document_count": record.document_count,
                        "created_at": record.created_at,
                        "ontology": record.ontology,
                    },
                    indent=2,
                )
            )
            self._records[rid] = record
            return record


def dtd_payload(dtd: Dtd) -> dict:
    """Structured DTD view for form building."""
    from .dtd import render_content

    return {
        "root": dtd.root_element,
        "elements": [
            {
                "name": name,
                "content": render_content(model),
                "children": dtd.element_children(name),
                "attributes": [
                    {"name": a.name, "type": a.type, "default": a.default}
                    for a in dtd.attribute_defs(name)
                ],
            }
            for name, model in dtd.elements.items()
        ],
    }
