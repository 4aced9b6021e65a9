"""Face-appearance timeline analytics: pipeline, gallery search, charts."""

from .aggregate import CoalesceParams, Timeline, coalesce_intervals, merge_outputs, total_duration
from .analytics import ChartSpec, WindowParams
from .index import KnownIdentityIndex, Match, Metric, build_index, classify, load_index, save_index, search_topk
from .model import AppearanceRecord, EpisodeMeta, Interval, canonical_sort, validate_record
from .pipeline import BatchConfig, ChunkPlan, WorkerOutput, plan_chunks, run_episode, run_worker
from .store import AggregateRequest, QueryFilter, Store
from .synth import IdentityGallery, SceneSchedule, emit_detections, gen_gallery, gen_schedule

__version__ = "0.1.0"

__all__ = [
    "AggregateRequest",
    "AppearanceRecord",
    "BatchConfig",
    "ChartSpec",
    "ChunkPlan",
    "CoalesceParams",
    "EpisodeMeta",
    "IdentityGallery",
    "Interval",
    "KnownIdentityIndex",
    "Match",
    "Metric",
    "QueryFilter",
    "SceneSchedule",
    "Store",
    "Timeline",
    "WindowParams",
    "WorkerOutput",
    "build_index",
    "canonical_sort",
    "classify",
    "coalesce_intervals",
    "emit_detections",
    "gen_gallery",
    "gen_schedule",
    "load_index",
    "merge_outputs",
    "plan_chunks",
    "run_episode",
    "run_worker",
    "save_index",
    "search_topk",
    "total_duration",
    "validate_record",
]
