"""Read-only HTTP query service over one immutable snapshot.

Every payload is a pure function of (snapshot, request): identical requests
produce byte-identical JSON bodies. Per-request timing therefore travels in
the X-Elapsed-Ms response header, never in the body. Error codes are
machine-readable: FIRM_NOT_FOUND (404), EMPTY_EMBEDDING (200 with an empty
result list), BAD_REQUEST (400), WORDS_UNAVAILABLE (503).
"""

from __future__ import annotations

import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import peers, semantics
from .errors import DomainError, EngineError
from .store import EngineSnapshot
from .wordvec import WordVectorTable

DEFAULT_N = 15
MAX_N = 1000
DEFAULT_PAGE_SIZE = 100
MAX_PAGE_SIZE = 1000


class PortfolioRequest(BaseModel):
    ids: list[str]
    n: int = DEFAULT_N


def _peer_payload(results: list[peers.PeerResult]) -> list[dict]:
    return [
        {"company_id": r.company_id, "name": r.name, "similarity": r.similarity}
        for r in results
    ]


def create_app(
    snapshot: EngineSnapshot,
    digest: str,
    word_table: WordVectorTable | None = None,
) -> FastAPI:
    app = FastAPI(title="firmvec query service", docs_url=None, redoc_url=None)
    matrix = snapshot.matrix

    semantic_ctx: semantics.SemanticQueryContext | None = None
    if word_table is not None and snapshot.pca is not None:
        semantic_ctx = semantics.SemanticQueryContext(
            table=word_table, pca=snapshot.pca, matrix=matrix
        )

    # the map is a pure function of the snapshot; build it once
    try:
        map_points = [
            {"company_id": cid, "name": matrix.names[matrix.row_index(cid)], "x": x, "y": y}
            for cid, x, y in semantics.project_2d(matrix)
        ]
    except EngineError:
        map_points = []

    def ok(data: dict, code: str | None = None) -> dict:
        return {"status": "ok", "code": code, "snapshot_digest": digest, "data": data}

    def error(code: str, message: str) -> dict:
        return {"status": "error", "code": code, "message": message, "snapshot_digest": digest}

    def clamp_n(n: int) -> int:
        if n < 1:
            raise ValueError("n must be >= 1")
        return min(n, MAX_N, matrix.size)

    @app.middleware("http")
    async def timing_header(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        response.headers["X-Elapsed-Ms"] = f"{(time.perf_counter() - start) * 1000.0:.3f}"
        return response

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content=error("BAD_REQUEST", str(exc.errors())))

    @app.get("/health")
    def health():
        return ok(
            {
                "firms": matrix.size,
                "dim": matrix.dim,
                "has_segmentation": snapshot.segmentation is not None,
                "has_words": semantic_ctx is not None,
                "strategy": snapshot.strategy,
            }
        )

    @app.get("/firms")
    def firms(offset: int = 0, limit: int = DEFAULT_PAGE_SIZE):
        if offset < 0 or limit < 1:
            return JSONResponse(
                status_code=400, content=error("BAD_REQUEST", "offset >= 0 and limit >= 1")
            )
        limit = min(limit, MAX_PAGE_SIZE)
        page = [
            {"company_id": cid, "name": matrix.names[i]}
            for i, cid in enumerate(matrix.company_ids)
        ][offset : offset + limit]
        return ok({"total": matrix.size, "offset": offset, "limit": limit, "firms": page})

    def _resolve(company_id: str) -> int | JSONResponse:
        if not matrix.has_id(company_id):
            return JSONResponse(
                status_code=404,
                content=error("FIRM_NOT_FOUND", f"no firm with id {company_id!r}"),
            )
        return matrix.row_index(company_id)

    @app.get("/peers/{company_id}")
    def firm_peers(company_id: str, n: int = DEFAULT_N):
        row = _resolve(company_id)
        if isinstance(row, JSONResponse):
            return row
        try:
            n = clamp_n(n)
        except ValueError as exc:
            return JSONResponse(status_code=400, content=error("BAD_REQUEST", str(exc)))
        try:
            results = peers.peers_for_firm_selective(matrix, row, n)
        except DomainError:
            results = []
        code = "EMPTY_EMBEDDING" if not results else None
        return ok({"peers": _peer_payload(results)}, code=code)

    @app.get("/segment-peers/{company_id}")
    def segment_peers(company_id: str):
        row = _resolve(company_id)
        if isinstance(row, JSONResponse):
            return row
        if snapshot.segmentation is None:
            return JSONResponse(
                status_code=503,
                content=error("SEGMENTATION_UNAVAILABLE", "snapshot has no segmentation model"),
            )
        try:
            results = peers.peers_in_segment(matrix, row, snapshot.segmentation)
        except DomainError:
            results = []
        code = "EMPTY_EMBEDDING" if not results else None
        return ok({"peers": _peer_payload(results)}, code=code)

    @app.post("/portfolio-peers")
    def portfolio_peers(body: PortfolioRequest):
        if not body.ids:
            return JSONResponse(
                status_code=400, content=error("BAD_REQUEST", "ids must be non-empty")
            )
        rows = []
        for cid in body.ids:
            row = _resolve(cid)
            if isinstance(row, JSONResponse):
                return row
            rows.append(row)
        try:
            n = clamp_n(body.n)
        except ValueError as exc:
            return JSONResponse(status_code=400, content=error("BAD_REQUEST", str(exc)))
        try:
            results = peers.peers_for_portfolio(matrix, rows, n)
        except DomainError:
            results = []
        code = "EMPTY_EMBEDDING" if not results else None
        return ok({"peers": _peer_payload(results)}, code=code)

    @app.get("/topwords/{company_id}")
    def topwords(company_id: str, n: int = 10):
        row = _resolve(company_id)
        if isinstance(row, JSONResponse):
            return row
        if semantic_ctx is None:
            return JSONResponse(
                status_code=503,
                content=error(
                    "WORDS_UNAVAILABLE",
                    "service was started without a word-vector file or the snapshot has no PCA",
                ),
            )
        if n < 1:
            return JSONResponse(status_code=400, content=error("BAD_REQUEST", "n must be >= 1"))
        words = semantics.top_n_words(semantic_ctx, company_id, n)
        code = "EMPTY_EMBEDDING" if not words else None
        return ok({"words": [{"word": w, "similarity": s} for w, s in words]}, code=code)

    @app.get("/map")
    def industry_map():
        return ok({"points": map_points})

    return app
