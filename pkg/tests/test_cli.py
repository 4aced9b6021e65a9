"""CLI: the synth/process/query/chart/export flow and exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from screenline.cli import run
from screenline.service import create_app
from screenline.store import Store


def cli(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("SCREENLINE_DATA_DIR", str(tmp_path / "data"))
    return tmp_path


def synth_episode(capsys, workdir, episode_id="demo", **overrides):
    args = {
        "--episode-id": episode_id,
        "--duration-ms": "240000",
        "--identities": "4",
        "--dim": "64",
        "--fps": "2",
        "--noise-sigma": "0",
        "--mean-scene-ms": "60000",
        "--mean-cast": "2.0",
        "--seed": "5",
        "--out-dir": str(workdir / "artifacts"),
    }
    args.update(overrides)
    argv = ["synth"]
    for k, v in args.items():
        argv += [k, v]
    code, out, err = cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestFlow:
    def test_synth_process_chart_export(self, capsys, workdir):
        info = synth_episode(capsys, workdir)
        assert Path(info["detections"]).exists()
        assert Path(info["index"]).exists()

        code, out, err = cli(capsys, "process", "--episode-id", "demo", "--workers", "2")
        assert code == 0, err
        report = json.loads(out)
        assert report["accepted"] == report["detections"] == info["faces"]

        code, out, _ = cli(capsys, "chart", "total_counts", "--episode-id", "demo")
        assert code == 0
        spec = json.loads(out)
        assert spec["chart_type"] == "total_counts" and spec["schema"] == 1

        code, out, _ = cli(capsys, "export", "--episode-id", "demo", "--out-dir", str(workdir / "exp"))
        assert code == 0
        assert (workdir / "exp" / "demo.jsonl").exists()
        meta = json.loads((workdir / "exp" / "demo.meta.json").read_text())
        assert meta["record_count"] == info["faces"]

    def test_query_outputs_jsonl(self, capsys, workdir):
        synth_episode(capsys, workdir)
        cli(capsys, "process", "--episode-id", "demo")
        code, out, _ = cli(capsys, "query", "--episode-id", "demo", "--from-ms", "0", "--to-ms", "1000")
        assert code == 0
        lines = [json.loads(l) for l in out.splitlines()]
        assert lines and all(l["t_ms"] < 1000 for l in lines)

    def test_worker_count_invariance_in_exports(self, capsys, workdir):
        synth_episode(capsys, workdir)
        exports = {}
        for n in ("1", "4"):
            cli(capsys, "process", "--episode-id", "demo", "--workers", n)
            cli(capsys, "export", "--episode-id", "demo", "--out-dir", str(workdir / f"exp{n}"))
            exports[n] = (workdir / f"exp{n}" / "demo.jsonl").read_bytes()
        assert exports["1"] == exports["4"]

    def test_chart_to_file(self, capsys, workdir):
        synth_episode(capsys, workdir)
        cli(capsys, "process", "--episode-id", "demo")
        out_file = workdir / "c.json"
        code, _, _ = cli(capsys, "chart", "segment_heatmap", "--episode-id", "demo",
                         "--segment-ms", "60000", "--out", str(out_file))
        assert code == 0
        spec = json.loads(out_file.read_text())
        assert len(spec["matrix"]["row_labels"]) == 4  # 240s / 60s


class TestFixtureEpisode:
    def test_chart_on_55_minute_fixture_has_11_segments(self, capsys, workdir):
        from pathlib import Path

        from screenline.aggregate import Timeline
        from screenline.model import EpisodeMeta, read_jsonl

        fixtures = Path(__file__).parent / "fixtures" / "demo55"
        meta = EpisodeMeta.from_dict(json.loads((fixtures / "demo55-s01e01.meta.json").read_text()))
        records = list(read_jsonl((fixtures / "demo55-s01e01.jsonl").read_text()))
        with Store(workdir / "data") as store:
            store.put_timeline(Timeline.build(meta, records))
        code, out, _ = cli(
            capsys, "chart", "segment_heatmap",
            "--episode-id", "demo55-s01e01", "--segment-ms", "300000",
        )
        assert code == 0
        assert len(json.loads(out)["matrix"]["row_labels"]) == 11


class TestParity:
    def test_cli_chart_bytes_equal_service_payload(self, capsys, workdir):
        synth_episode(capsys, workdir)
        cli(capsys, "process", "--episode-id", "demo")
        out_file = workdir / "cli.json"
        code, _, _ = cli(
            capsys, "chart", "coappearance_network", "--episode-id", "demo",
            "--window-ms", "1500", "--min-edge-weight", "2", "--out", str(out_file),
        )
        assert code == 0
        with Store(workdir / "data") as store:
            client = TestClient(create_app(store))
            resp = client.get(
                "/episodes/demo/charts/coappearance_network",
                params={"window_ms": 1500, "min_edge_weight": 2},
            )
        assert out_file.read_bytes() == resp.content


class TestExitCodes:
    def test_unknown_subcommand_is_usage(self, capsys, workdir):
        code, _, err = cli(capsys, "frobnicate")
        assert code == 1

    def test_no_subcommand_prints_usage(self, capsys, workdir):
        code, _, err = cli(capsys)
        assert code == 1
        assert "usage" in err.lower()

    def test_unknown_episode_is_data_error(self, capsys, workdir):
        code, _, err = cli(capsys, "export", "--episode-id", "ghost")
        assert code == 2
        assert "error" in err

    def test_chart_without_scope_is_data_error(self, capsys, workdir):
        code, _, err = cli(capsys, "chart", "total_counts")
        assert code == 2

    def test_help_exits_zero(self, capsys, workdir):
        assert cli(capsys, "--help")[0] == 0


class TestConfig:
    def test_config_defaults_flags_override(self, capsys, workdir):
        cfg = workdir / "screenline.conf"
        cfg.write_text("identities = 3\nseed = 9\n# comment line\n", encoding="utf-8")
        # synth honors config for flags not passed
        code, out, err = cli(
            capsys, "--config", str(cfg), "synth",
            "--episode-id", "cfg-ep", "--duration-ms", "60000", "--dim", "16",
            "--fps", "1", "--noise-sigma", "0", "--mean-scene-ms", "60000",
            "--mean-cast", "3", "--out-dir", str(workdir / "a"),
        )
        assert code == 0, err
        with Store(workdir / "data") as store:
            src = store.get_source("cfg-ep")
        index_path = src["index_path"]
        from screenline.index import load_index

        assert load_index(index_path).count == 3  # from config, not the default 8

    def test_bad_config_line(self, capsys, workdir):
        cfg = workdir / "bad.conf"
        cfg.write_text("this is not a pair\n")
        code, _, err = cli(capsys, "--config", str(cfg), "query")
        assert code == 2
