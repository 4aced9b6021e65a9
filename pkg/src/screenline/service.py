"""HTTP facade: store queries and analytics served as chart endpoints.

Every chart endpoint is a thin adapter over the analytics module — the
payload bytes are produced by the same canonical serializer the CLI
uses, so the two surfaces are byte-identical for identical parameters.
Error bodies are {error_code, message, detail} with stable codes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import analytics
from .aggregate import CoalesceParams, Timeline
from .analytics import CHART_TYPES, ChartSpec, WindowParams, chart_to_json_bytes
from .detstream import read_stream
from .errors import ScreenlineError, ValidationError
from .index import load_index
from .model import (
    AppearanceRecord,
    EpisodeMeta,
    check_unique_positions,
    validate_record,
)
from .pipeline import BatchConfig, run_episode
from .store import QueryFilter, Store, UnknownEpisode

DEFAULT_MAX_INGEST_BYTES = 64 * 1024 * 1024


class NotProcessed(ScreenlineError):
    pass


class UnknownScope(ScreenlineError):
    pass


class BadParams(ScreenlineError):
    pass


def _error(status: int, code: str, message: str, detail: Any = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error_code": code, "message": message, "detail": detail},
    )


# --- chart building (shared with the CLI for byte parity) ---------------------


def build_episode_chart(
    store: Store,
    episode_id: str,
    chart_type: str,
    window: WindowParams,
    coalesce: CoalesceParams,
) -> ChartSpec:
    """Chart for one processed episode; raises the scope/processed errors."""
    if chart_type not in CHART_TYPES:
        raise BadParams(f"unknown chart type {chart_type!r}")
    if chart_type == "seasonal_comparison":
        raise BadParams("seasonal_comparison needs series scope, not an episode")
    try:
        meta = store.get_meta(episode_id)
    except UnknownEpisode as e:
        raise UnknownScope(str(e)) from e
    if not meta.processed:
        raise NotProcessed(f"episode {episode_id!r} is not processed yet")
    timeline = store.get_timeline(episode_id)
    if chart_type == "per_minute_bars":
        return analytics.per_minute_counts(timeline, window.bucket_ms)[0]
    if chart_type == "total_counts":
        return analytics.total_counts(timeline)
    if chart_type == "total_durations":
        return analytics.total_durations(timeline, coalesce)
    if chart_type == "trend_lines":
        return analytics.trend_lines(timeline, window.bucket_ms)
    if chart_type == "distribution_pie":
        return analytics.distribution_pie(timeline)
    if chart_type == "coappearance_matrix":
        return analytics.coappearance_matrix(timeline, window.coappearance_window_ms)
    if chart_type == "coappearance_network":
        matrix = analytics.coappearance_matrix(timeline, window.coappearance_window_ms)
        return analytics.coappearance_network(matrix, window.min_edge_weight)
    if chart_type == "stacked_area":
        return analytics.stacked_area(timeline, window.bucket_ms, coalesce)
    return analytics.segment_heatmap(timeline, window.segment_ms)


def build_seasonal_chart(
    store: Store,
    series_id: str,
    seasons: Sequence[int] | None,
    coalesce: CoalesceParams,
) -> ChartSpec:
    """Seasonal comparison over the processed episodes of one series."""
    episodes = [m for m in store.list_episodes() if m.series_id == series_id]
    if not episodes:
        raise UnknownScope(f"series {series_id!r} has no registered episodes")
    if seasons is not None:
        episodes = [m for m in episodes if m.season in set(seasons)]
        if not episodes:
            raise UnknownScope(f"series {series_id!r} has no episodes in seasons {seasons}")
    processed = [m for m in episodes if m.processed]
    if not processed:
        raise NotProcessed(f"no processed episodes in scope for series {series_id!r}")
    timelines = [store.get_timeline(m.episode_id) for m in processed]
    return analytics.seasonal_comparison(timelines, coalesce)


def _window_from_query(
    bucket_ms: int | None,
    window_ms: int | None,
    segment_ms: int | None,
    min_edge_weight: int | None,
) -> WindowParams:
    base = WindowParams()
    try:
        return WindowParams(
            coappearance_window_ms=base.coappearance_window_ms if window_ms is None else window_ms,
            bucket_ms=base.bucket_ms if bucket_ms is None else bucket_ms,
            segment_ms=base.segment_ms if segment_ms is None else segment_ms,
            min_edge_weight=base.min_edge_weight if min_edge_weight is None else min_edge_weight,
        )
    except ValidationError as e:
        raise BadParams(str(e)) from e


def _coalesce_from_query(gap_ms: int | None, tail_ms: int | None) -> CoalesceParams:
    base = CoalesceParams()
    try:
        return CoalesceParams(
            gap_ms=base.gap_ms if gap_ms is None else gap_ms,
            tail_ms=base.tail_ms if tail_ms is None else tail_ms,
        )
    except ValidationError as e:
        raise BadParams(str(e)) from e


def create_app(
    store: Store,
    max_ingest_bytes: int = DEFAULT_MAX_INGEST_BYTES,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="screenline", version="0.1.0", openapi_url="/openapi.json")

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error(422, "BadParams", "invalid request parameters", exc.errors())

    @app.exception_handler(ScreenlineError)
    async def _on_domain_error(request: Request, exc: ScreenlineError) -> JSONResponse:
        if isinstance(exc, (UnknownScope, UnknownEpisode)):
            return _error(404, "UnknownScope", str(exc))
        if isinstance(exc, NotProcessed):
            return _error(409, "NotProcessed", str(exc))
        if isinstance(exc, (BadParams, analytics.EmptyTimeline, ValidationError)):
            return _error(422, "BadParams", str(exc))
        return _error(500, "Internal", str(exc))

    @app.get("/healthz")
    def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/episodes")
    def list_episodes() -> list[dict[str, Any]]:
        return [m.to_dict() for m in store.list_episodes()]

    @app.get("/episodes/{episode_id}")
    def get_episode(episode_id: str) -> dict[str, Any]:
        try:
            meta = store.get_meta(episode_id)
        except UnknownEpisode as e:
            raise UnknownScope(str(e)) from e
        body = meta.to_dict()
        body["record_count"] = len(store.get_timeline(episode_id).records)
        return body

    @app.get("/episodes/{episode_id}/appearances")
    def appearances(
        episode_id: str,
        celebrity: str | None = None,
        from_ms: int | None = None,
        to_ms: int | None = None,
    ) -> list[dict[str, Any]]:
        try:
            flt = QueryFilter(
                episode_id=episode_id,
                celebrity_ids=frozenset(celebrity.split(",")) if celebrity else None,
                from_ms=from_ms,
                to_ms=to_ms,
            )
        except ValidationError as e:
            raise BadParams(str(e)) from e
        try:
            records = store.query_appearances(flt)
        except UnknownEpisode as e:
            raise UnknownScope(str(e)) from e
        return [r.to_dict() for r in records]

    @app.get("/episodes/{episode_id}/charts/{chart_type}")
    def episode_chart(
        episode_id: str,
        chart_type: str,
        bucket_ms: int | None = None,
        window_ms: int | None = None,
        segment_ms: int | None = None,
        gap_ms: int | None = None,
        tail_ms: int | None = None,
        min_edge_weight: int | None = None,
    ) -> Response:
        spec = build_episode_chart(
            store,
            episode_id,
            chart_type,
            _window_from_query(bucket_ms, window_ms, segment_ms, min_edge_weight),
            _coalesce_from_query(gap_ms, tail_ms),
        )
        return Response(content=chart_to_json_bytes(spec), media_type="application/json")

    @app.get("/series/{series_id}/charts/seasonal_comparison")
    def seasonal_chart(
        series_id: str,
        seasons: str | None = None,
        gap_ms: int | None = None,
        tail_ms: int | None = None,
    ) -> Response:
        parsed: list[int] | None = None
        if seasons:
            try:
                parsed = [int(s) for s in seasons.split(",") if s]
            except ValueError as e:
                raise BadParams(f"seasons must be a comma list of integers: {e}") from e
        spec = build_seasonal_chart(store, series_id, parsed, _coalesce_from_query(gap_ms, tail_ms))
        return Response(content=chart_to_json_bytes(spec), media_type="application/json")

    @app.post("/episodes/{episode_id}/ingest")
    async def ingest(episode_id: str, request: Request) -> Any:
        raw = await request.body()
        if len(raw) > max_ingest_bytes:
            return _error(413, "TooLarge", f"body exceeds {max_ingest_bytes} bytes")
        try:
            body = json.loads(raw)
            meta = EpisodeMeta.from_dict({**body["meta"], "episode_id": episode_id})
            lines = body["records_jsonl"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            return _error(400, "ParseError", f"bad ingest body: {e}")
        records: list[AppearanceRecord] = []
        for lineno, line in enumerate(lines.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = validate_record(AppearanceRecord.from_dict(json.loads(line)), meta)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, ScreenlineError) as e:
                return _error(400, "ParseError", f"line {lineno}: {e}", {"line": lineno})
            records.append(rec)
        try:
            check_unique_positions(records)
            timeline = Timeline.build(meta, records)
        except ScreenlineError as e:
            return _error(400, "DuplicateKey", str(e))
        stored = store.put_timeline(timeline)
        return {"stored": stored, "episode_id": episode_id}

    @app.post("/episodes/{episode_id}/process")
    async def process(episode_id: str, request: Request) -> Any:
        try:
            meta = store.get_meta(episode_id)
        except UnknownEpisode as e:
            raise UnknownScope(str(e)) from e
        raw = await request.body()
        body = json.loads(raw) if raw else {}
        source = store.get_source(episode_id)
        detections = body.get("detections_path") or source.get("detections_path")
        index_path = body.get("index_path") or source.get("index_path")
        if not detections or not index_path:
            raise BadParams("episode has no registered detection file / gallery index")
        gallery = load_index(index_path)
        run = run_episode(
            meta,
            lambda a, b: read_stream(detections, a, b),
            gallery,
            BatchConfig(
                detect_batch=int(body.get("detect_batch", 64)),
                embed_batch=int(body.get("embed_batch", 128)),
            ),
            n_workers=int(body.get("workers", 1)),
            threshold=float(body.get("threshold", 0.5)),
        )
        store.put_timeline(run.timeline)
        return run.report.to_dict()

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
