"""HTTP service: catalogs, DTD exploration, query evaluation, result sets.

Errors are JSON objects {code, message, diagnostics}.  The store root
comes from EQUIX_DATA_DIR unless passed explicitly.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .dtd import parse_dtd
from .query_model import QueryFormatError
from .store import EquixStore, StoreError, dtd_payload

_NOT_FOUND_CODES = {"unknown-target", "unknown-result", "unknown-ontology"}


def _error(status: int, code: str, message: str, diagnostics=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "diagnostics": diagnostics or []},
    )


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("EQUIX_DATA_DIR", "equix-data")
    store = EquixStore(data_dir)
    app = FastAPI(title="equix", version="0.1.0")
    app.state.store = store

    @app.exception_handler(StoreError)
    async def store_error(_req: Request, exc: StoreError):
        if exc.code in _NOT_FOUND_CODES:
            return _error(404, exc.code, exc.message, exc.diagnostics)
        if exc.code == "query-invalid":
            return _error(422, exc.code, exc.message, exc.diagnostics)
        return _error(409, exc.code, exc.message, exc.diagnostics)

    @app.exception_handler(QueryFormatError)
    async def format_error(_req: Request, exc: QueryFormatError):
        return _error(400, "malformed-query", str(exc), [exc.pointer])

    @app.get("/catalogs")
    def list_catalogs():
        return store.list_catalogs()

    @app.get("/catalogs/{name}/dtd")
    def catalog_dtd(name: str):
        catalog = store.catalogs.get(name)
        if catalog is None:
            raise StoreError("unknown-target", f"no catalog {name!r}")
        return dtd_payload(catalog.dtd)

    @app.post("/catalogs/{name}/query")
    def query_catalog(name: str, query: dict):
        if name not in store.catalogs:
            raise StoreError("unknown-target", f"no catalog {name!r}")
        record = store.create_result_set(name, query)
        return record.summary()

    @app.post("/results/{result_id}/query")
    def requery(result_id: str, query: dict):
        store.record(result_id)
        record = store.create_result_set(result_id, query)
        return record.summary()

    @app.get("/results/{result_id}")
    def result_summary(result_id: str):
        return store.record(result_id).summary()

    @app.get("/results/{result_id}/docs")
    def result_docs(result_id: str, page: int = 1, page_size: int = 50):
        record = store.record(result_id)
        docs = store.result_documents(record)
        page = max(page, 1)
        page_size = max(min(page_size, 500), 1)
        start = (page - 1) * page_size
        return {
            "page": page,
            "page_size": page_size,
            "total": len(docs),
            "documents": docs[start:start + page_size],
        }

    @app.get("/results/{result_id}/dtd")
    def result_dtd(result_id: str):
        record = store.record(result_id)
        if record.result_dtd_text is None:
            raise StoreError(
                "no-result-dtd",
                f"result set {result_id!r} has no result DTD (ontology mode)",
            )
        dtd = parse_dtd(record.result_dtd_text, record.root_element)
        return dtd_payload(dtd)

    @app.get("/ontologies")
    def list_ontologies():
        return [
            {"name": o.name, "terms": sorted(o.terms)}
            for o in store.ontologies.values()
        ]

    return app
