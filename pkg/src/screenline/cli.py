"""Command line entry point: synth, process, query, chart, export, serve.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal.  The store
location comes from --data-dir, the config file, or SCREENLINE_DATA_DIR.
Chart output bytes are identical to the HTTP chart endpoints.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from .aggregate import CoalesceParams
from .analytics import WindowParams, chart_to_json_bytes
from .detstream import read_stream, write_stream
from .errors import ScreenlineError, ValidationError
from .index import Metric, build_index, load_index, save_index
from .model import EpisodeMeta, write_jsonl
from .pipeline import BatchConfig, run_episode
from .store import QueryFilter, Store
from .synth import emit_detections, events_to_frames, gen_gallery, gen_schedule

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


def load_config(path: str | None) -> dict[str, str]:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    if not path:
        return {}
    cfg: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line without '=': {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip().replace("-", "_")] = value.strip().strip('"')
    return cfg


def default_data_dir() -> str:
    return os.environ.get("SCREENLINE_DATA_DIR", "./screenline_data")


def _build_parser(defaults: dict[str, Any] | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screenline", description="Episode appearance timelines and analytics"
    )
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--data-dir", help="store directory (default: $SCREENLINE_DATA_DIR)")
    sub = parser.add_subparsers(dest="command", metavar="command")
    subparsers: list[argparse.ArgumentParser] = []

    def track(sp: argparse.ArgumentParser) -> argparse.ArgumentParser:
        subparsers.append(sp)
        return sp

    p = track(sub.add_parser("synth", help="generate a synthetic episode, gallery, and schedule"))
    p.add_argument("--episode-id", required=True)
    p.add_argument("--series-id", default="synthetic")
    p.add_argument("--season", type=int, default=1)
    p.add_argument("--episode-number", type=int, default=1)
    p.add_argument("--duration-ms", type=int, default=1_800_000)
    p.add_argument("--identities", type=int, default=8)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--fps", type=float, default=2.0)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--mean-scene-ms", type=int, default=120_000)
    p.add_argument("--mean-cast", type=float, default=2.5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--metric", choices=["cosine", "l2"], default="cosine")
    p.add_argument("--out-dir", default=".", help="where .dets/.keix/.schedule.json land")
    p.add_argument("--no-register", action="store_true", help="skip store registration")

    p = track(sub.add_parser("process", help="run the pipeline on an episode's detection stream"))
    p.add_argument("--episode-id", required=True)
    p.add_argument("--detections", help="detection stream path (default: registered source)")
    p.add_argument("--index", help="gallery index path (default: registered source)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--detect-batch", type=int, default=64)
    p.add_argument("--embed-batch", type=int, default=128)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--k", type=int, default=5,
                   help="top-k retrieval depth reserved for experimentation; the accept rule uses the top match")

    p = track(sub.add_parser("query", help="filter appearance records to JSONL on stdout"))
    p.add_argument("--episode-id")
    p.add_argument("--series-id")
    p.add_argument("--season", type=int)
    p.add_argument("--celebrity", help="comma-separated celebrity ids")
    p.add_argument("--from-ms", type=int)
    p.add_argument("--to-ms", type=int)

    p = track(sub.add_parser("chart", help="compute one chart as ChartSpec JSON"))
    p.add_argument("chart_type")
    p.add_argument("--episode-id")
    p.add_argument("--series-id")
    p.add_argument("--seasons", help="comma list for seasonal_comparison")
    p.add_argument("--bucket-ms", type=int)
    p.add_argument("--window-ms", type=int)
    p.add_argument("--segment-ms", type=int)
    p.add_argument("--gap-ms", type=int)
    p.add_argument("--tail-ms", type=int)
    p.add_argument("--min-edge-weight", type=int)
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = track(sub.add_parser("export", help="export an episode as JSONL + meta sidecar"))
    p.add_argument("--episode-id", required=True)
    p.add_argument("--out-dir", default=".")

    p = track(sub.add_parser("serve", help="start the HTTP service"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--static-dir", help="optional dashboard bundle to serve at /ui")
    if defaults:
        # Subparsers parse into a fresh namespace, so config-provided
        # defaults must be installed on every one of them.
        parser.set_defaults(**defaults)
        for sp in subparsers:
            sp.set_defaults(**defaults)
    return parser


def _cmd_synth(store: Store, args: argparse.Namespace) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gallery = gen_gallery(args.seed, args.identities, args.dim)
    schedule = gen_schedule(
        args.seed, gallery, args.duration_ms, args.mean_scene_ms, args.mean_cast
    )
    events = emit_detections(schedule, gallery, args.fps, args.noise_sigma, args.seed)
    dets_path = out / f"{args.episode_id}.dets"
    faces = write_stream(dets_path, events_to_frames(events))
    index = build_index(list(gallery.ids), gallery.vectors, Metric(args.metric))
    index_path = out / f"{args.episode_id}.keix"
    save_index(index, index_path)
    (out / f"{args.episode_id}.schedule.json").write_text(schedule.to_json(), encoding="utf-8")
    meta = EpisodeMeta(
        episode_id=args.episode_id,
        series_id=args.series_id,
        season=args.season,
        episode_number=args.episode_number,
        duration_ms=args.duration_ms,
    )
    if not args.no_register:
        store.register_episode(meta)
        store.register_source(
            args.episode_id,
            detections_path=str(dets_path),
            index_path=str(index_path),
            fps=args.fps,
        )
    print(
        json.dumps(
            {
                "episode_id": args.episode_id,
                "faces": faces,
                "detections": str(dets_path),
                "index": str(index_path),
            }
        )
    )
    return EXIT_OK


def _cmd_process(store: Store, args: argparse.Namespace) -> int:
    meta = store.get_meta(args.episode_id)
    source = store.get_source(args.episode_id)
    detections = args.detections or source.get("detections_path")
    index_path = args.index or source.get("index_path")
    if not detections or not index_path:
        raise ValidationError("no detection stream / gallery index for this episode")
    gallery = load_index(index_path)
    run = run_episode(
        meta,
        lambda a, b: read_stream(detections, a, b),
        gallery,
        BatchConfig(detect_batch=args.detect_batch, embed_batch=args.embed_batch),
        n_workers=args.workers,
        threshold=args.threshold,
    )
    store.put_timeline(run.timeline)
    print(json.dumps(run.report.to_dict()))
    return EXIT_OK


def _cmd_query(store: Store, args: argparse.Namespace) -> int:
    flt = QueryFilter(
        episode_id=args.episode_id,
        series_id=args.series_id,
        season=args.season,
        celebrity_ids=frozenset(args.celebrity.split(",")) if args.celebrity else None,
        from_ms=args.from_ms,
        to_ms=args.to_ms,
    )
    sys.stdout.write(write_jsonl(store.query_appearances(flt)))
    return EXIT_OK


def _cmd_chart(store: Store, args: argparse.Namespace) -> int:
    from .service import build_episode_chart, build_seasonal_chart

    window = WindowParams(
        coappearance_window_ms=args.window_ms or WindowParams().coappearance_window_ms,
        bucket_ms=args.bucket_ms or WindowParams().bucket_ms,
        segment_ms=args.segment_ms or WindowParams().segment_ms,
        min_edge_weight=args.min_edge_weight or WindowParams().min_edge_weight,
    )
    coalesce = CoalesceParams(
        gap_ms=CoalesceParams().gap_ms if args.gap_ms is None else args.gap_ms,
        tail_ms=CoalesceParams().tail_ms if args.tail_ms is None else args.tail_ms,
    )
    if args.chart_type == "seasonal_comparison":
        if not args.series_id:
            raise ValidationError("seasonal_comparison needs --series-id")
        seasons = [int(s) for s in args.seasons.split(",")] if args.seasons else None
        spec = build_seasonal_chart(store, args.series_id, seasons, coalesce)
    else:
        if not args.episode_id:
            raise ValidationError(f"{args.chart_type} needs --episode-id")
        spec = build_episode_chart(store, args.episode_id, args.chart_type, window, coalesce)
    payload = chart_to_json_bytes(spec)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    return EXIT_OK


def _cmd_export(store: Store, args: argparse.Namespace) -> int:
    timeline = store.get_timeline(args.episode_id)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{args.episode_id}.jsonl").write_text(
        write_jsonl(timeline.records), encoding="utf-8"
    )
    (out / f"{args.episode_id}.meta.json").write_text(
        timeline.meta_sidecar(), encoding="utf-8"
    )
    print(json.dumps({"episode_id": args.episode_id, "records": len(timeline.records)}))
    return EXIT_OK


def _cmd_serve(store: Store, args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "process": _cmd_process,
    "query": _cmd_query,
    "chart": _cmd_chart,
    "export": _cmd_export,
    "serve": _cmd_serve,
}


def _cast(value: str) -> Any:
    for caster in (int, float):
        try:
            return caster(value)
        except ValueError:
            continue
    return value


def run(argv: Sequence[str] | None = None) -> int:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        cfg = {k: _cast(v) for k, v in load_config(known.config).items()}
    except (ScreenlineError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    # Config values become argparse defaults: they win over built-in
    # defaults but lose to flags actually passed on the command line.
    parser = _build_parser(cfg)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        data_dir = args.data_dir or cfg.get("data_dir") or default_data_dir()
        with Store(data_dir) as store:
            return _COMMANDS[args.command](store, args)
    except ScreenlineError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # anything else is a bug, not bad data
        print(f"internal error: {e!r}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
