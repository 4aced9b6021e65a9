"""Synthetic source: determinism, separation, schedules, event emission."""

from __future__ import annotations

import numpy as np
import pytest

from screenline.errors import ValidationError
from screenline.synth import (
    DimTooSmall,
    EmptyGallery,
    IdentityGallery,
    emit_detections,
    events_to_frames,
    frame_times,
    gen_gallery,
    gen_schedule,
    ground_truth_counts,
)


class TestGenGallery:
    def test_deterministic_and_unit_norm(self):
        a = gen_gallery(7, 3, 512)
        b = gen_gallery(7, 3, 512)
        assert a.vectors.tobytes() == b.vectors.tobytes()
        assert a.ids == b.ids
        norms = np.linalg.norm(a.vectors.astype(np.float64), axis=1)
        assert np.all(np.abs(norms - 1.0) < 1e-6)

    def test_single_identity_small_dim(self):
        g = gen_gallery(7, 1, 2)
        assert g.vectors.shape == (1, 2)
        assert abs(np.linalg.norm(g.vectors[0]) - 1.0) < 1e-6

    def test_dim_too_small(self):
        with pytest.raises(DimTooSmall):
            gen_gallery(1, 2, 1)

    def test_separation_by_exhaustive_scan(self):
        # Oracle: full 64x64 dot-product scan over the generated rows.
        g = gen_gallery(11, 64, 512)
        m = g.vectors.astype(np.float64)
        sims = m @ m.T
        np.fill_diagonal(sims, -1.0)
        assert float(sims.max()) < 0.5

    def test_distinct_ids(self):
        g = gen_gallery(3, 100, 64)
        assert len(set(g.ids)) == 100


class TestGenSchedule:
    def test_single_scene_contains_all_ids(self):
        g = gen_gallery(7, 3, 64)
        sch = gen_schedule(1, g, 60_000, 60_000, 3.0)
        assert len(sch.spans) == 3
        assert {s.celebrity_id for s in sch.spans} == set(g.ids)
        assert all((s.start_ms, s.end_ms) == (0, 60_000) for s in sch.spans)

    def test_zero_mean_cast_floors_to_one(self):
        g = gen_gallery(7, 5, 64)
        sch = gen_schedule(1, g, 120_000, 10_000, 0.0)
        starts = sorted({s.start_ms for s in sch.spans})
        bounds = sorted({s.start_ms for s in sch.spans} | {s.end_ms for s in sch.spans})
        # every scene has at least one member: scene starts == span starts
        assert len(starts) == len(bounds) - 1

    def test_per_identity_spans_disjoint(self):
        g = gen_gallery(5, 8, 64)
        sch = gen_schedule(5, g, 30 * 60_000, 120_000, 2.5)
        by_id: dict[str, list[tuple[int, int]]] = {}
        for s in sch.spans:
            by_id.setdefault(s.celebrity_id, []).append((s.start_ms, s.end_ms))
        # Oracle: O(n^2) overlap scan.
        for spans in by_id.values():
            for i in range(len(spans)):
                for j in range(i + 1, len(spans)):
                    a, b = spans[i], spans[j]
                    assert a[1] <= b[0] or b[1] <= a[0]

    def test_scenes_partition_duration(self):
        g = gen_gallery(2, 4, 64)
        sch = gen_schedule(9, g, 600_000, 60_000, 2.0)
        bounds = sorted({s.start_ms for s in sch.spans} | {s.end_ms for s in sch.spans})
        assert bounds[0] == 0 and bounds[-1] == 600_000

    def test_empty_gallery_rejected(self):
        empty = IdentityGallery(ids=(), vectors=np.zeros((0, 8), np.float32), dim=8)
        with pytest.raises(EmptyGallery):
            gen_schedule(1, empty, 10_000, 1_000, 1.0)

    def test_precondition(self):
        g = gen_gallery(1, 2, 64)
        with pytest.raises(ValidationError):
            gen_schedule(1, g, 500, 1_000, 1.0)

    def test_deterministic(self):
        g = gen_gallery(2, 6, 64)
        assert gen_schedule(4, g, 300_000, 30_000, 2.0) == gen_schedule(4, g, 300_000, 30_000, 2.0)


class TestEmitDetections:
    def test_zero_noise_reproduces_gallery_rows(self):
        g = gen_gallery(7, 3, 64)
        sch = gen_schedule(1, g, 60_000, 60_000, 3.0)
        row = {cid: i for i, cid in enumerate(g.ids)}
        for ev in emit_detections(sch, g, 2.0, 0.0, 5):
            assert ev.embedding.tobytes() == g.vectors[row[ev.true_celebrity_id]].tobytes()

    def test_frame_grid_half_open(self):
        # Oracle: direct enumeration — fps=2 puts frames at 10000 and 10500
        # inside [10000, 11000); 11000 itself is excluded.
        g = gen_gallery(7, 1, 64)
        from screenline.synth import PresenceSpan, SceneSchedule

        sch = SceneSchedule(duration_ms=20_000, spans=(PresenceSpan(g.ids[0], 10_000, 11_000),))
        times = [ev.t_ms for ev in emit_detections(sch, g, 2.0, 0.0, 1)]
        assert times == [10_000, 10_500]

    def test_noise_regression_mean_cosine(self):
        # Oracle: empirical mean over the generated stream; value frozen.
        g = gen_gallery(11, 8, 512)
        sch = gen_schedule(11, g, 625_000, 625_000, 8.0)
        evs = list(emit_detections(sch, g, 2.0, 0.1, 99))
        assert len(evs) == 10_000
        row = {cid: i for i, cid in enumerate(g.ids)}
        cos = [
            float(e.embedding.astype(np.float64) @ g.vectors[row[e.true_celebrity_id]].astype(np.float64))
            for e in evs
        ]
        mean = float(np.mean(cos))
        assert mean >= 0.9
        assert mean == pytest.approx(0.9950474950526439, abs=1e-12)

    def test_event_count_conservation(self):
        g = gen_gallery(3, 6, 64)
        sch = gen_schedule(8, g, 240_000, 30_000, 2.0)
        fps = 3.0
        counts: dict[str, int] = {}
        for ev in emit_detections(sch, g, fps, 0.05, 2):
            counts[ev.true_celebrity_id] = counts.get(ev.true_celebrity_id, 0) + 1
        assert counts == ground_truth_counts(sch, fps)

    def test_ordering_nondecreasing_with_id_ties(self):
        g = gen_gallery(3, 4, 64)
        sch = gen_schedule(8, g, 120_000, 20_000, 3.0)
        evs = list(emit_detections(sch, g, 2.0, 0.0, 2))
        for a, b in zip(evs, evs[1:]):
            assert (a.t_ms, a.true_celebrity_id) <= (b.t_ms, b.true_celebrity_id)

    def test_byte_identical_streams(self):
        g = gen_gallery(2, 4, 64)
        sch = gen_schedule(3, g, 120_000, 30_000, 2.0)
        a = [(e.t_ms, e.embedding.tobytes(), e.bbox) for e in emit_detections(sch, g, 2, 0.1, 7)]
        b = [(e.t_ms, e.embedding.tobytes(), e.bbox) for e in emit_detections(sch, g, 2, 0.1, 7)]
        assert a == b

    def test_bboxes_always_valid(self):
        g = gen_gallery(2, 4, 64)
        sch = gen_schedule(3, g, 120_000, 30_000, 2.0)
        for ev in emit_detections(sch, g, 2.0, 0.0, 7):
            x, y, w, h = ev.bbox
            assert 0 <= x and 0 <= y and x + w <= 1 and y + h <= 1

    def test_empty_schedule_empty_stream(self):
        g = gen_gallery(2, 2, 64)
        from screenline.synth import SceneSchedule

        sch = SceneSchedule(duration_ms=10_000, spans=())
        assert list(emit_detections(sch, g, 2.0, 0.0, 1)) == []


class TestFrameTimes:
    def test_grid_rounding(self):
        times = frame_times(2_000, 3.0)
        assert times.tolist() == [0, 333, 667, 1000, 1333, 1667]

    def test_events_to_frames_groups_by_frame(self):
        g = gen_gallery(7, 3, 64)
        sch = gen_schedule(1, g, 60_000, 60_000, 3.0)
        frames = list(events_to_frames(emit_detections(sch, g, 1.0, 0.0, 5)))
        assert len(frames) == 60
        assert all(len(f.faces) == 3 for f in frames)
