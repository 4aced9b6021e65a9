"""Shared fixtures: a small synthetic episode written to disk once per session."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from screenline.aggregate import Timeline
from screenline.detstream import write_stream
from screenline.index import Metric, build_index
from screenline.model import AppearanceRecord, EpisodeMeta
from screenline.synth import emit_detections, events_to_frames, gen_gallery, gen_schedule


@pytest.fixture(scope="session")
def small_episode(tmp_path_factory):
    """5-minute episode, 4 identities, 2 fps, zero noise, on disk."""
    root = tmp_path_factory.mktemp("small_episode")
    gallery = gen_gallery(3, 4, 64)
    schedule = gen_schedule(3, gallery, 300_000, 60_000, 2.0)
    events = emit_detections(schedule, gallery, 2.0, 0.0, 3)
    dets = root / "ep.dets"
    write_stream(dets, events_to_frames(events))
    meta = EpisodeMeta("small-ep", "demo-show", 1, 1, 300_000)
    index = build_index(list(gallery.ids), gallery.vectors, Metric.COSINE)
    return {
        "meta": meta,
        "gallery": gallery,
        "schedule": schedule,
        "index": index,
        "dets_path": dets,
        "fps": 2.0,
    }


def make_timeline(points, duration_ms=600_000, episode_id="ep1", series_id="show", season=1):
    """points: iterable of (celebrity_id, t_ms); pos_index assigned in order."""
    records = [
        AppearanceRecord(episode_id, cid, t, i, (0.1, 0.1, 0.2, 0.2), 0.9)
        for i, (cid, t) in enumerate(points)
    ]
    meta = EpisodeMeta(episode_id, series_id, season, 1, duration_ms)
    return Timeline.build(meta, records)


@pytest.fixture
def timeline_factory():
    return make_timeline
