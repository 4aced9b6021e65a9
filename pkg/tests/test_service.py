"""HTTP service: thin-adapter parity, error codes, ingest, process."""

from __future__ import annotations

import functools
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from screenline import analytics
from screenline.aggregate import CoalesceParams, Timeline
from screenline.analytics import WindowParams, chart_to_json_bytes
from screenline.model import AppearanceRecord, EpisodeMeta, read_jsonl, write_jsonl
from screenline.service import build_episode_chart, create_app
from screenline.store import Store
from screenline.synth import gen_gallery, gen_schedule, emit_detections, events_to_frames

FIXTURES = Path(__file__).parent / "fixtures"


@functools.lru_cache(maxsize=None)
def load_fixture_timeline(episode_id):
    meta = EpisodeMeta.from_dict(
        json.loads((FIXTURES / "demo55" / f"{episode_id}.meta.json").read_text())
    )
    records = list(read_jsonl((FIXTURES / "demo55" / f"{episode_id}.jsonl").read_text()))
    return Timeline.build(meta, records)


@pytest.fixture
def store(tmp_path):
    with Store(tmp_path / "data") as s:
        s.put_timeline(load_fixture_timeline("demo55-s01e01"))
        s.put_timeline(load_fixture_timeline("demo55-s02e01"))
        yield s


@pytest.fixture
def client(store):
    return TestClient(create_app(store))


class TestBasics:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200 and r.json() == {"status": "ok"}

    def test_list_episodes(self, client):
        r = client.get("/episodes")
        ids = [e["episode_id"] for e in r.json()]
        assert ids == ["demo55-s01e01", "demo55-s02e01"]

    def test_get_episode(self, client):
        r = client.get("/episodes/demo55-s01e01")
        body = r.json()
        assert body["duration_ms"] == 3_300_000
        assert body["record_count"] > 0

    def test_unknown_episode_404(self, client):
        r = client.get("/episodes/ghost")
        assert r.status_code == 404
        assert r.json()["error_code"] == "UnknownScope"

    def test_appearances_filtering(self, client, store):
        tl = store.get_timeline("demo55-s01e01")
        cid = tl.records[0].celebrity_id
        r = client.get(
            f"/episodes/demo55-s01e01/appearances",
            params={"celebrity": cid, "from_ms": 0, "to_ms": 60_000},
        )
        assert r.status_code == 200
        body = r.json()
        assert body and all(x["celebrity_id"] == cid and x["t_ms"] < 60_000 for x in body)


class TestCharts:
    @pytest.mark.parametrize("chart_type", [t for t in analytics.CHART_TYPES if t != "seasonal_comparison"])
    def test_byte_identical_to_in_process_analytics(self, client, store, chart_type):
        r = client.get(f"/episodes/demo55-s01e01/charts/{chart_type}")
        assert r.status_code == 200
        spec = build_episode_chart(
            store, "demo55-s01e01", chart_type, WindowParams(), CoalesceParams()
        )
        assert r.content == chart_to_json_bytes(spec)

    def test_segment_heatmap_has_11_segments(self, client):
        r = client.get("/episodes/demo55-s01e01/charts/segment_heatmap?segment_ms=300000")
        assert len(r.json()["matrix"]["row_labels"]) == 11

    def test_params_echoed_and_applied(self, client):
        r = client.get("/episodes/demo55-s01e01/charts/trend_lines?bucket_ms=30000")
        body = r.json()
        assert body["meta"]["bucket_ms"] == 30_000
        assert body["schema"] == 1

    def test_seasonal_comparison_over_series(self, client):
        r = client.get("/series/demo-show/charts/seasonal_comparison?seasons=1,2")
        body = r.json()
        assert [s["name"] for s in body["series"]] == ["season 1", "season 2"]

    def test_seasonal_single_season(self, client):
        r = client.get("/series/demo-show/charts/seasonal_comparison?seasons=2")
        assert [s["name"] for s in r.json()["series"]] == ["season 2"]

    def test_unknown_series_404(self, client):
        r = client.get("/series/nope/charts/seasonal_comparison")
        assert r.status_code == 404

    def test_unknown_chart_type_422(self, client):
        r = client.get("/episodes/demo55-s01e01/charts/wordcloud")
        assert r.status_code == 422
        assert r.json()["error_code"] == "BadParams"

    def test_bad_param_value_422(self, client):
        r = client.get("/episodes/demo55-s01e01/charts/trend_lines?bucket_ms=abc")
        assert r.status_code == 422
        assert r.json()["error_code"] == "BadParams"

    def test_seasonal_needs_series_scope(self, client):
        r = client.get("/episodes/demo55-s01e01/charts/seasonal_comparison")
        assert r.status_code == 422

    def test_not_processed_409(self, client, store):
        store.register_episode(EpisodeMeta("fresh", "demo-show", 1, 9, 60_000))
        r = client.get("/episodes/fresh/charts/total_counts")
        assert r.status_code == 409
        assert r.json()["error_code"] == "NotProcessed"

    def test_read_endpoints_are_repeatable(self, client):
        a = client.get("/episodes/demo55-s01e01/charts/total_counts").content
        b = client.get("/episodes/demo55-s01e01/charts/total_counts").content
        assert a == b


def ingest_body(meta, records):
    return {"meta": meta.to_dict(), "records_jsonl": write_jsonl(records)}


def make_records(ep, n):
    return [
        AppearanceRecord(ep, "A", i * 100, i, (0.1, 0.1, 0.2, 0.2), 0.9) for i in range(n)
    ]


class TestIngest:
    META = EpisodeMeta("new-ep", "demo-show", 1, 3, 60_000)

    def test_valid_body_stores_all(self, client):
        r = client.post("/episodes/new-ep/ingest", json=ingest_body(self.META, make_records("new-ep", 100)))
        assert r.status_code == 200
        assert r.json()["stored"] == 100
        assert client.get("/episodes/new-ep").json()["record_count"] == 100

    def test_malformed_line_cites_number_and_stores_nothing(self, client):
        lines = write_jsonl(make_records("new-ep", 10)).splitlines()
        lines[6] = '{"broken'
        body = {"meta": self.META.to_dict(), "records_jsonl": "\n".join(lines)}
        r = client.post("/episodes/new-ep/ingest", json=body)
        assert r.status_code == 400
        assert r.json()["error_code"] == "ParseError"
        assert "line 7" in r.json()["message"]
        assert client.get("/episodes/new-ep").status_code == 404

    def test_duplicate_position_rejected(self, client):
        recs = make_records("new-ep", 2)
        recs[1] = AppearanceRecord("new-ep", "B", recs[0].t_ms, recs[0].pos_index, (0, 0, 1, 1), 0.5)
        r = client.post("/episodes/new-ep/ingest", json=ingest_body(self.META, recs))
        assert r.status_code == 400
        assert r.json()["error_code"] == "DuplicateKey"

    def test_too_large_413(self, store):
        client = TestClient(create_app(store, max_ingest_bytes=100))
        r = client.post("/episodes/new-ep/ingest", json=ingest_body(self.META, make_records("new-ep", 50)))
        assert r.status_code == 413
        assert r.json()["error_code"] == "TooLarge"

    def test_out_of_range_record_rejected(self, client):
        recs = [AppearanceRecord("new-ep", "A", 99_999_999, 0, (0, 0, 1, 1), 0.5)]
        r = client.post("/episodes/new-ep/ingest", json=ingest_body(self.META, recs))
        assert r.status_code == 400


class TestProcess:
    def test_process_runs_pipeline_and_stores(self, tmp_path, store):
        from screenline.detstream import write_stream
        from screenline.index import Metric, build_index, save_index

        gallery = gen_gallery(5, 4, 64)
        schedule = gen_schedule(5, gallery, 120_000, 30_000, 2.0)
        dets = tmp_path / "p.dets"
        write_stream(dets, events_to_frames(emit_detections(schedule, gallery, 2.0, 0.0, 5)))
        keix = tmp_path / "p.keix"
        save_index(build_index(list(gallery.ids), gallery.vectors, Metric.COSINE), keix)
        store.register_episode(EpisodeMeta("proc-ep", "demo-show", 1, 4, 120_000))
        store.register_source("proc-ep", detections_path=str(dets), index_path=str(keix))

        client = TestClient(create_app(store))
        r = client.post("/episodes/proc-ep/process", json={"workers": 3})
        assert r.status_code == 200
        report = r.json()
        assert report["workers"] == 3
        assert report["accepted"] > 0
        assert store.get_meta("proc-ep").processed is True
        assert "proc-ep" not in store.list_unprocessed()

    def test_process_unknown_episode(self, client):
        assert client.post("/episodes/ghost/process", json={}).status_code == 404

    def test_process_without_source_422(self, client, store):
        store.register_episode(EpisodeMeta("nosource", "demo-show", 1, 5, 1_000))
        r = client.post("/episodes/nosource/process", json={})
        assert r.status_code == 422
