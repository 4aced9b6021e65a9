"""Regenerate the committed fixtures: a 55-minute demo episode (two seasons)
and golden ChartSpec JSON for all ten chart types.

Run from the repo root:  python tests/make_fixtures.py
The dashboard's fixture copies are refreshed too when frontend/ exists.
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from screenline import analytics
from screenline.aggregate import CoalesceParams, Timeline
from screenline.analytics import WindowParams, chart_to_json_bytes
from screenline.detstream import read_stream, write_stream
from screenline.index import Metric, build_index
from screenline.model import EpisodeMeta, write_jsonl
from screenline.pipeline import BatchConfig, run_episode
from screenline.synth import emit_detections, events_to_frames, gen_gallery, gen_schedule

FIXTURES = Path(__file__).parent / "fixtures"
DURATION_MS = 3_300_000  # 55 minutes
FPS = 1.0

EPISODES = [
    # (episode_id, season, episode_number, schedule seed, emit seed)
    ("demo55-s01e01", 1, 1, 55, 550),
    ("demo55-s02e01", 2, 1, 56, 560),
]


def build_episode(episode_id: str, season: int, number: int, sched_seed: int, emit_seed: int) -> Timeline:
    gallery = gen_gallery(55, 8, 512)
    schedule = gen_schedule(sched_seed, gallery, DURATION_MS, 150_000, 2.5)
    index = build_index(list(gallery.ids), gallery.vectors, Metric.COSINE)
    meta = EpisodeMeta(episode_id, "demo-show", season, number, DURATION_MS)
    with tempfile.TemporaryDirectory() as d:
        dets = Path(d) / "ep.dets"
        write_stream(dets, events_to_frames(emit_detections(schedule, gallery, FPS, 0.1, emit_seed)))
        run = run_episode(meta, lambda a, b: read_stream(dets, a, b), index, BatchConfig(), n_workers=4)
    return run.timeline


def main() -> None:
    demo = FIXTURES / "demo55"
    charts = FIXTURES / "charts"
    demo.mkdir(parents=True, exist_ok=True)
    charts.mkdir(parents=True, exist_ok=True)

    timelines = []
    for episode_id, season, number, sched_seed, emit_seed in EPISODES:
        tl = build_episode(episode_id, season, number, sched_seed, emit_seed)
        timelines.append(tl)
        (demo / f"{episode_id}.jsonl").write_text(write_jsonl(tl.records), encoding="utf-8")
        meta_dict = {**tl.meta.to_dict(), "processed": True}
        (demo / f"{episode_id}.meta.json").write_text(json.dumps(meta_dict), encoding="utf-8")
        print(f"{episode_id}: {len(tl.records)} records")

    primary = timelines[0]
    window = WindowParams()
    coalesce = CoalesceParams.for_fps(FPS)
    matrix = analytics.coappearance_matrix(primary, window.coappearance_window_ms)
    specs = {
        "per_minute_bars": analytics.per_minute_counts(primary, window.bucket_ms)[0],
        "total_counts": analytics.total_counts(primary),
        "total_durations": analytics.total_durations(primary, coalesce),
        "trend_lines": analytics.trend_lines(primary, window.bucket_ms),
        "distribution_pie": analytics.distribution_pie(primary),
        "coappearance_matrix": matrix,
        "coappearance_network": analytics.coappearance_network(matrix, window.min_edge_weight),
        "stacked_area": analytics.stacked_area(primary, window.bucket_ms, coalesce),
        "seasonal_comparison": analytics.seasonal_comparison(timelines, coalesce),
        "segment_heatmap": analytics.segment_heatmap(primary, window.segment_ms),
    }
    for name, spec in specs.items():
        (charts / f"{name}.json").write_bytes(chart_to_json_bytes(spec))
        print(f"chart golden: {name}")

    frontend_fixtures = Path(__file__).parent.parent / "frontend" / "fixtures"
    if frontend_fixtures.parent.is_dir():
        frontend_fixtures.mkdir(exist_ok=True)
        for f in charts.glob("*.json"):
            shutil.copy(f, frontend_fixtures / f.name)
        print(f"copied chart fixtures to {frontend_fixtures}")


if __name__ == "__main__":
    main()
