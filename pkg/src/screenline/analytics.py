"""The ten chart transforms: pure functions from timelines to ChartSpec.

A ChartSpec is renderer-neutral data (schema version 1): exactly one of
series / matrix / graph is populated depending on the chart type, and
``meta`` echoes the parameters that produced it.  Counting semantics are
fixed per chart: count charts count records individually, co-appearance
uses once-per-window presence, stacked area uses fractional presence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .aggregate import CoalesceParams, Timeline, coalesce_all, total_duration
from .errors import ScreenlineError, ValidationError

SCHEMA_VERSION = 1

CHART_TYPES = (
    "per_minute_bars",
    "total_counts",
    "total_durations",
    "trend_lines",
    "distribution_pie",
    "coappearance_matrix",
    "coappearance_network",
    "stacked_area",
    "seasonal_comparison",
    "segment_heatmap",
)


class EmptyTimeline(ScreenlineError):
    pass


class AsymmetricInput(ScreenlineError):
    pass


class MixedSeries(ScreenlineError):
    pass


@dataclass(frozen=True)
class WindowParams:
    coappearance_window_ms: int = 1_000
    bucket_ms: int = 60_000
    segment_ms: int = 300_000
    min_edge_weight: int = 1

    def __post_init__(self) -> None:
        for name in ("coappearance_window_ms", "bucket_ms", "segment_ms", "min_edge_weight"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")


@dataclass(frozen=True)
class Axis:
    label: str
    kind: str  # time | category | segment


@dataclass(frozen=True)
class Series:
    name: str
    points: tuple[tuple[Any, float | int], ...]


@dataclass(frozen=True)
class Matrix:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    cells: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class GraphNode:
    id: str
    weight: float


@dataclass(frozen=True)
class GraphEdge:
    a: str
    b: str
    weight: float


@dataclass(frozen=True)
class Graph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]


@dataclass(frozen=True)
class ChartSpec:
    chart_type: str
    title: str
    x_axis: Axis
    series: tuple[Series, ...] | None = None
    matrix: Matrix | None = None
    graph: Graph | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.chart_type not in CHART_TYPES:
            raise ValidationError(f"unknown chart_type {self.chart_type!r}")
        populated = sum(x is not None for x in (self.series, self.matrix, self.graph))
        if populated != 1:
            raise ValidationError("exactly one of series/matrix/graph must be populated")
        if self.matrix is not None:
            for row in self.matrix.cells:
                for v in row:
                    if not math.isfinite(v) or v < 0:
                        raise ValidationError(f"matrix cell {v} not finite and >= 0")


def chart_to_dict(spec: ChartSpec) -> dict[str, Any]:
    """Stable key order; this dict defines the serialized schema."""
    return {
        "schema": SCHEMA_VERSION,
        "chart_type": spec.chart_type,
        "title": spec.title,
        "x_axis": {"label": spec.x_axis.label, "kind": spec.x_axis.kind},
        "series": None
        if spec.series is None
        else [{"name": s.name, "points": [list(p) for p in s.points]} for s in spec.series],
        "matrix": None
        if spec.matrix is None
        else {
            "row_labels": list(spec.matrix.row_labels),
            "col_labels": list(spec.matrix.col_labels),
            "cells": [list(row) for row in spec.matrix.cells],
        },
        "graph": None
        if spec.graph is None
        else {
            "nodes": [{"id": n.id, "weight": n.weight} for n in spec.graph.nodes],
            "edges": [{"a": e.a, "b": e.b, "weight": e.weight} for e in spec.graph.edges],
        },
        "meta": spec.meta,
    }


def chart_to_json_bytes(spec: ChartSpec) -> bytes:
    """Canonical serialization shared by the CLI and the HTTP service."""
    return (
        json.dumps(chart_to_dict(spec), separators=(",", ":"), ensure_ascii=False) + "\n"
    ).encode("utf-8")


# --- helpers ------------------------------------------------------------------


def _bucket_count(duration_ms: int, bucket_ms: int) -> int:
    return math.ceil(duration_ms / bucket_ms) if duration_ms > 0 else 0


def _bucket_of(t_ms: int, bucket_ms: int, n_buckets: int) -> int:
    # A record exactly at duration_ms lands in the final bucket.
    return min(t_ms // bucket_ms, n_buckets - 1)


def _count_matrix(timeline: Timeline, bucket_ms: int) -> tuple[int, dict[str, list[int]]]:
    """Per-celebrity record counts over all buckets of the episode."""
    if not timeline.records:
        return 0, {}
    n = max(1, _bucket_count(timeline.meta.duration_ms, bucket_ms))
    counts = {cid: [0] * n for cid in timeline.celebrity_ids()}
    for r in timeline.records:
        counts[r.celebrity_id][_bucket_of(r.t_ms, bucket_ms, n)] += 1
    return n, counts


def _totals(timeline: Timeline) -> dict[str, int]:
    totals: dict[str, int] = {}
    for r in timeline.records:
        totals[r.celebrity_id] = totals.get(r.celebrity_id, 0) + 1
    return totals


def _by_value_desc(values: dict[str, float | int]) -> list[str]:
    return sorted(values, key=lambda cid: (-values[cid], cid))


# --- the ten charts -----------------------------------------------------------


def per_minute_counts(
    timeline: Timeline, bucket_ms: int = 60_000
) -> tuple[ChartSpec, dict[str, list[int]]]:
    """Stacked per-bucket appearance counts; also returns the raw matrix."""
    if bucket_ms < 1:
        raise ValidationError("bucket_ms must be >= 1")
    n, counts = _count_matrix(timeline, bucket_ms)
    series = tuple(
        Series(name=cid, points=tuple((b, counts[cid][b]) for b in range(n)))
        for cid in sorted(counts)
    )
    spec = ChartSpec(
        chart_type="per_minute_bars",
        title="Appearances per minute",
        x_axis=Axis(label="bucket", kind="time"),
        series=series,
        meta={"bucket_ms": bucket_ms, "buckets": n, "semantics": "record-count"},
    )
    return spec, counts


def total_counts(timeline: Timeline) -> ChartSpec:
    """Appearance count per celebrity, most frequent first (ties by id)."""
    totals = _totals(timeline)
    points = tuple((cid, totals[cid]) for cid in _by_value_desc(totals))
    return ChartSpec(
        chart_type="total_counts",
        title="Total appearances",
        x_axis=Axis(label="celebrity", kind="category"),
        series=(Series(name="appearances", points=points),),
        meta={"semantics": "record-count"},
    )


def total_durations(timeline: Timeline, params: CoalesceParams | None = None) -> ChartSpec:
    """Coalesced on-screen milliseconds per celebrity, longest first."""
    p = params or CoalesceParams()
    durations = {
        cid: total_duration(ivs) for cid, ivs in coalesce_all(timeline, p).items() if ivs
    }
    points = tuple((cid, durations[cid]) for cid in _by_value_desc(durations))
    return ChartSpec(
        chart_type="total_durations",
        title="Total screen time",
        x_axis=Axis(label="celebrity", kind="category"),
        series=(Series(name="duration_ms", points=points),),
        meta={"gap_ms": p.gap_ms, "tail_ms": p.tail_ms, "unit": "ms"},
    )


def trend_lines(timeline: Timeline, bucket_ms: int = 60_000) -> ChartSpec:
    """per_minute matrix pivoted to one zero-filled line per celebrity."""
    if bucket_ms < 1:
        raise ValidationError("bucket_ms must be >= 1")
    n, counts = _count_matrix(timeline, bucket_ms)
    series = tuple(
        Series(name=cid, points=tuple((b, counts[cid][b]) for b in range(n)))
        for cid in sorted(counts)
    )
    return ChartSpec(
        chart_type="trend_lines",
        title="Appearance trend",
        x_axis=Axis(label="bucket", kind="time"),
        series=series,
        meta={"bucket_ms": bucket_ms, "buckets": n, "semantics": "record-count"},
    )


def distribution_pie(timeline: Timeline) -> ChartSpec:
    """Share of appearances per celebrity; shares sum to 1."""
    totals = _totals(timeline)
    if not totals:
        raise EmptyTimeline("cannot compute shares of an empty timeline")
    grand = sum(totals.values())
    points = tuple((cid, totals[cid] / grand) for cid in _by_value_desc(totals))
    return ChartSpec(
        chart_type="distribution_pie",
        title="Appearance share",
        x_axis=Axis(label="celebrity", kind="category"),
        series=(Series(name="share", points=points),),
        meta={"total_records": grand},
    )


def coappearance_matrix(timeline: Timeline, window_ms: int = 1_000) -> ChartSpec:
    """Symmetric bucket-co-presence counts; diagonal fixed at zero.

    With window_ms > 0 a bucket is floor(t / window_ms); window_ms = 0
    demands exact timestamp equality.  Multiple detections of one identity
    in a bucket count once (presence, not record count).
    """
    if window_ms < 0:
        raise ValidationError("window_ms must be >= 0")
    ids = timeline.celebrity_ids()
    pos = {cid: i for i, cid in enumerate(ids)}
    n = len(ids)
    cells = [[0.0] * n for _ in range(n)]
    present: dict[int, set[int]] = {}
    for r in timeline.records:
        bucket = r.t_ms // window_ms if window_ms > 0 else r.t_ms
        present.setdefault(bucket, set()).add(pos[r.celebrity_id])
    for members in present.values():
        ordered = sorted(members)
        for i_idx, a in enumerate(ordered):
            for b in ordered[i_idx + 1 :]:
                cells[a][b] += 1
                cells[b][a] += 1
    return ChartSpec(
        chart_type="coappearance_matrix",
        title="Co-appearance matrix",
        x_axis=Axis(label="celebrity", kind="category"),
        matrix=Matrix(
            row_labels=tuple(ids),
            col_labels=tuple(ids),
            cells=tuple(tuple(row) for row in cells),
        ),
        meta={"window_ms": window_ms, "semantics": "once-per-window presence"},
    )


def coappearance_network(matrix_spec: ChartSpec, min_edge_weight: int = 1) -> ChartSpec:
    """Graph view of a co-appearance matrix; edges below the threshold drop.

    Node weight is the row sum: how often the celebrity co-appears at all.
    """
    m = matrix_spec.matrix
    if m is None:
        raise ValidationError("coappearance_network needs a matrix chart as input")
    n = len(m.row_labels)
    for i in range(n):
        if m.cells[i][i] != 0:
            raise AsymmetricInput(f"diagonal cell ({i},{i}) is {m.cells[i][i]}, not 0")
        for j in range(i + 1, n):
            if m.cells[i][j] != m.cells[j][i]:
                raise AsymmetricInput(f"cell ({i},{j}) != cell ({j},{i})")
    nodes = tuple(
        GraphNode(id=m.row_labels[i], weight=sum(m.cells[i])) for i in range(n)
    )
    edges = [
        GraphEdge(a=m.row_labels[i], b=m.row_labels[j], weight=m.cells[i][j])
        for i in range(n)
        for j in range(i + 1, n)
        if m.cells[i][j] >= min_edge_weight
    ]
    edges.sort(key=lambda e: (-e.weight, e.a, e.b))
    return ChartSpec(
        chart_type="coappearance_network",
        title="Co-appearance network",
        x_axis=Axis(label="celebrity", kind="category"),
        graph=Graph(nodes=nodes, edges=tuple(edges)),
        meta={
            "min_edge_weight": min_edge_weight,
            "window_ms": matrix_spec.meta.get("window_ms"),
        },
    )


def stacked_area(
    timeline: Timeline, bucket_ms: int = 60_000, params: CoalesceParams | None = None
) -> ChartSpec:
    """Fractional presence per bucket per celebrity, heaviest layer first."""
    if bucket_ms < 1:
        raise ValidationError("bucket_ms must be >= 1")
    p = params or CoalesceParams()
    intervals = coalesce_all(timeline, p)
    n = max(1, _bucket_count(timeline.meta.duration_ms, bucket_ms)) if timeline.records else 0
    values: dict[str, list[float]] = {}
    durations: dict[str, int] = {}
    for cid, ivs in intervals.items():
        row = [0.0] * n
        for iv in ivs:
            b0 = iv.start_ms // bucket_ms
            b1 = (iv.end_ms - 1) // bucket_ms
            for b in range(b0, min(b1, n - 1) + 1):
                lo = max(iv.start_ms, b * bucket_ms)
                hi = min(iv.end_ms, (b + 1) * bucket_ms)
                row[b] += (hi - lo) / bucket_ms
        values[cid] = row
        durations[cid] = total_duration(ivs)
    order = _by_value_desc(durations)
    series = tuple(
        Series(name=cid, points=tuple((b, values[cid][b]) for b in range(n))) for cid in order
    )
    return ChartSpec(
        chart_type="stacked_area",
        title="Screen time over the episode",
        x_axis=Axis(label="bucket", kind="time"),
        series=series,
        meta={
            "bucket_ms": bucket_ms,
            "gap_ms": p.gap_ms,
            "tail_ms": p.tail_ms,
            "semantics": "fractional presence",
        },
    )


def seasonal_comparison(
    timelines: Sequence[Timeline], params: CoalesceParams | None = None
) -> ChartSpec:
    """Total screen minutes per celebrity per season, one series per season."""
    if not timelines:
        raise ValidationError("seasonal_comparison needs at least one timeline")
    series_ids = {t.meta.series_id for t in timelines}
    if len(series_ids) > 1:
        raise MixedSeries(f"timelines span multiple series: {sorted(series_ids)}")
    p = params or CoalesceParams()
    minutes: dict[int, dict[str, float]] = {}
    for t in timelines:
        per_season = minutes.setdefault(t.meta.season, {})
        for cid, ivs in coalesce_all(t, p).items():
            per_season[cid] = per_season.get(cid, 0.0) + total_duration(ivs) / 60_000.0
    seasons = sorted(minutes)
    all_ids = sorted({cid for per in minutes.values() for cid in per})
    grand = {cid: sum(minutes[s].get(cid, 0.0) for s in seasons) for cid in all_ids}
    order = _by_value_desc(grand)
    series = tuple(
        Series(
            name=f"season {s}",
            points=tuple((cid, minutes[s].get(cid, 0.0)) for cid in order),
        )
        for s in seasons
    )
    return ChartSpec(
        chart_type="seasonal_comparison",
        title="Screen time by season",
        x_axis=Axis(label="celebrity", kind="category"),
        series=series,
        meta={
            "series_id": next(iter(series_ids)),
            "seasons": seasons,
            "gap_ms": p.gap_ms,
            "tail_ms": p.tail_ms,
            "unit": "minutes",
        },
    )


def segment_heatmap(timeline: Timeline, segment_ms: int = 300_000) -> ChartSpec:
    """Record counts over ceil(duration / segment_ms) fixed-length segments."""
    if segment_ms < 1:
        raise ValidationError("segment_ms must be >= 1")
    n = _bucket_count(timeline.meta.duration_ms, segment_ms)
    if timeline.records:
        n = max(1, n)
    ids = timeline.celebrity_ids()
    pos = {cid: i for i, cid in enumerate(ids)}
    cells = [[0.0] * len(ids) for _ in range(n)]
    for r in timeline.records:
        cells[_bucket_of(r.t_ms, segment_ms, n)][pos[r.celebrity_id]] += 1
    return ChartSpec(
        chart_type="segment_heatmap",
        title="Appearance heatmap",
        x_axis=Axis(label="celebrity", kind="segment"),
        matrix=Matrix(
            row_labels=tuple(str(s) for s in range(n)),
            col_labels=tuple(ids),
            cells=tuple(tuple(row) for row in cells),
        ),
        meta={"segment_ms": segment_ms, "segments": n, "semantics": "record-count"},
    )
