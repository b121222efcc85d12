"""FastAPI application over a sealed store.

Every endpoint is read-only; the store is built offline (CLI) and loaded
at startup. Errors carry machine codes and never leak stack traces. QA
endpoints run in a worker thread under a configurable timeout that
returns 504 with the stage the pipeline had reached.
"""

from __future__ import annotations

import asyncio
import logging
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse

from .. import __version__
from .. import geometry as geo
from .. import kgstore as kg
from ..errors import ChronomapError, QuerySyntaxError
from ..kgstore import CMO
from ..qapipeline import answer_descriptive, answer_factual
from ..query import evaluate, parse, to_results_json, validate_against_schema
from .context import AppContext
from .models import (
    DescriptiveRequest,
    ErrorBody,
    FactualRequest,
    HealthResponse,
    SparqlRequest,
)

log = logging.getLogger(__name__)


def _error(status: int, code: str, message: str, stage: str | None = None) -> JSONResponse:
    body = ErrorBody(code=code, message=message, stage=stage)
    return JSONResponse(status_code=status, content=body.model_dump())


def _store_years(store) -> list[int]:
    return sorted({t.o.value for t in store.match(None, kg.iri(CMO + "year"), None)})


def _store_municipalities(store) -> list[str]:
    return sorted({t.o.value for t in store.match(None, kg.iri(CMO + "municipality"), None)})


def create_app(ctx: AppContext) -> FastAPI:
    app = FastAPI(title="chronomap", version=__version__)
    cfg = ctx.config
    if cfg.server.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cfg.server.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def timing(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        log.info(
            "%s %s -> %d (%.1f ms)",
            request.method,
            request.url.path,
            response.status_code,
            (time.monotonic() - started) * 1000,
        )
        return response

    @app.exception_handler(ChronomapError)
    async def chronomap_error(_request: Request, exc: ChronomapError):
        return _error(500, exc.code or "internal", str(exc))

    @app.exception_handler(Exception)
    async def unexpected_error(_request: Request, exc: Exception):
        log.exception("unhandled error")
        return _error(500, "internal", "internal error")

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(
            status="ok",
            triples=len(ctx.store),
            years=_store_years(ctx.store),
            municipalities=_store_municipalities(ctx.store),
        )

    @app.post("/sparql")
    def sparql(body: SparqlRequest):
        try:
            query = parse(body.query)
        except QuerySyntaxError as exc:
            return _error(400, exc.code, str(exc))
        violations = validate_against_schema(query, ctx.store.schema)
        if violations:
            return _error(400, "schema_violation", "; ".join(violations))
        result = evaluate(query, ctx.store)
        return to_results_json(result, ctx.store)

    async def _run_with_timeout(fn, stage_holder: dict):
        loop = asyncio.get_running_loop()
        try:
            return await asyncio.wait_for(
                loop.run_in_executor(None, fn), timeout=cfg.server.qa_timeout_s
            )
        except asyncio.TimeoutError:
            return None

    @app.post("/qa/factual")
    async def qa_factual(body: FactualRequest):
        holder = {"stage": "generate"}
        result = await _run_with_timeout(
            lambda: answer_factual(body.question, ctx.bundle, ctx.gateways, ctx.store, cfg.qa),
            holder,
        )
        if result is None:
            return _error(504, "timeout", "factual pipeline timed out", stage=holder["stage"])
        return result.to_dict(ctx.store)

    @app.post("/qa/descriptive")
    async def qa_descriptive(body: DescriptiveRequest):
        holder = {"stage": "decompose"}
        result = await _run_with_timeout(
            lambda: answer_descriptive(
                body.question,
                ctx.bundle,
                ctx.gateways,
                ctx.store,
                cfg.qa,
                use_map_image=body.use_map_image,
                use_search=body.use_search,
                progress=lambda stage: holder.__setitem__("stage", stage),
            ),
            holder,
        )
        if result is None:
            return _error(504, "timeout", "descriptive pipeline timed out", stage=holder["stage"])
        return result.to_dict(ctx.store)

    @app.get("/features")
    def features(municipality: str | None = None, year: int | None = None, type: str | None = None):
        store = ctx.store
        out = []
        for t in store.match(None, kg.iri(CMO + "featureType"), None):
            subject = t.s
            ftype = t.o.value
            if type and ftype != type:
                continue
            years = [x.o.value for x in store.match(subject, kg.iri(CMO + "year"), None)]
            if year and year not in years:
                continue
            munis = [x.o.value for x in store.match(subject, kg.iri(CMO + "municipality"), None)]
            if municipality and municipality.lower() not in munis:
                continue
            try:
                geometry = store.geometry(subject.value)
            except ChronomapError:
                continue
            properties = {"iri": subject.value, "type": ftype, "year": years[0] if years else None}
            for prop, key in (("areaSqm", "areaSqm"), ("lengthM", "lengthM"), ("currentName", "currentName")):
                rows = store.match(subject, kg.iri(CMO + prop), None)
                if rows:
                    properties[key] = rows[0].o.value
            out.append(
                {
                    "type": "Feature",
                    "properties": properties,
                    "geometry": geo.to_geojson(geometry),
                }
            )
        return {"type": "FeatureCollection", "features": out}

    @app.get("/schema")
    def schema():
        return ctx.store.schema.to_json()

    @app.get("/tiles/{municipality}/{year}")
    def tile(municipality: str, year: int):
        if not cfg.tiles_dir:
            return _error(404, "not_found", "no tiles directory configured")
        path = Path(cfg.tiles_dir) / f"{municipality.lower()}_{year}.png"
        if not path.exists():
            return _error(404, "not_found", f"no tile for {municipality}/{year}")
        return FileResponse(path, media_type="image/png")

    return app
