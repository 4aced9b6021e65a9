"""Merge worker outputs into episode timelines; derive presence intervals.

Point detections become presence intervals by joining detections whose
gaps stay within ``gap_ms`` and extending the last detection by
``tail_ms`` (one sampling period, so k detections at period p cover
roughly k*p of wall time).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Protocol, Sequence

from .errors import ScreenlineError, ValidationError
from .model import (
    AppearanceRecord,
    EpisodeMeta,
    Interval,
    canonical_sort,
    check_unique_positions,
)

DEFAULT_GAP_MS = 2_000
DEFAULT_TAIL_MS = 500


class OverlappingChunks(ScreenlineError):
    pass


class MixedEpisodes(ScreenlineError):
    pass


class UnknownCelebrity(ScreenlineError):
    pass


@dataclass(frozen=True)
class CoalesceParams:
    gap_ms: int = DEFAULT_GAP_MS
    tail_ms: int = DEFAULT_TAIL_MS

    def __post_init__(self) -> None:
        if self.gap_ms < 0 or self.tail_ms < 0:
            raise ValidationError("gap_ms and tail_ms must be >= 0")

    @classmethod
    def for_fps(cls, fps: float, gap_ms: int = DEFAULT_GAP_MS) -> "CoalesceParams":
        """Tie the interval tail to the sampling period."""
        tail = int(round(1000.0 / fps)) if fps > 0 else DEFAULT_TAIL_MS
        return cls(gap_ms=gap_ms, tail_ms=tail)

    def to_dict(self) -> dict[str, int]:
        return {"gap_ms": self.gap_ms, "tail_ms": self.tail_ms}


@dataclass(frozen=True)
class Timeline:
    """Episode meta plus its canonically sorted appearance records."""

    meta: EpisodeMeta
    records: tuple[AppearanceRecord, ...]

    @classmethod
    def build(cls, meta: EpisodeMeta, records: Iterable[AppearanceRecord]) -> "Timeline":
        ordered = canonical_sort(records)
        for r in ordered:
            if r.episode_id != meta.episode_id:
                raise MixedEpisodes(
                    f"record for {r.episode_id!r} in timeline of {meta.episode_id!r}"
                )
        check_unique_positions(ordered)
        return cls(meta=meta, records=tuple(ordered))

    def celebrity_ids(self) -> list[str]:
        return sorted({r.celebrity_id for r in self.records})

    def meta_sidecar(self, params: CoalesceParams | None = None) -> str:
        payload: dict[str, Any] = {
            "episode_id": self.meta.episode_id,
            "duration_ms": self.meta.duration_ms,
            "record_count": len(self.records),
            "params": params.to_dict() if params else None,
        }
        return json.dumps(payload, separators=(",", ":"))


class _Spanned(Protocol):
    span: tuple[int, int]


def merge_outputs(
    meta: EpisodeMeta,
    outputs: Sequence[_Spanned],
    accepted_records: Iterable[AppearanceRecord],
) -> Timeline:
    """Validate chunk spans, then canonically sort the accepted records.

    The result is independent of the order outputs are listed in; a
    duplicated (t_ms, pos_index) is an upstream offsetting bug and raises
    rather than being absorbed.
    """
    spans = sorted(o.span for o in outputs)
    for (s1, e1), (s2, _) in zip(spans, spans[1:]):
        if s2 < e1:
            raise OverlappingChunks(f"chunk [{s2}, ...) overlaps chunk ending at {e1}")
    return Timeline.build(meta, accepted_records)


def coalesce_intervals(
    timeline: Timeline,
    celebrity_id: str,
    params: CoalesceParams | None = None,
    known_ids: Iterable[str] | None = None,
) -> list[Interval]:
    """Join the identity's detections into disjoint presence intervals.

    Detections with inter-detection gap <= gap_ms share an interval; each
    interval ends tail_ms after its last detection, clipped to the episode
    and to the next interval's start.  No records yields an empty list;
    an id outside ``known_ids`` (when a caller provides that context, e.g.
    the store's gallery roster) is an error rather than silence.
    """
    if known_ids is not None and celebrity_id not in set(known_ids):
        raise UnknownCelebrity(f"{celebrity_id!r} is not a known identity")
    p = params or CoalesceParams()
    times = sorted(r.t_ms for r in timeline.records if r.celebrity_id == celebrity_id)
    if not times:
        return []
    runs: list[tuple[int, int]] = []  # (first t, last t) per joined run
    run_start = times[0]
    last = times[0]
    for t in times[1:]:
        if t - last <= p.gap_ms:
            last = t
        else:
            runs.append((run_start, last))
            run_start = t
            last = t
    runs.append((run_start, last))

    intervals: list[Interval] = []
    duration = timeline.meta.duration_ms
    for i, (first, last) in enumerate(runs):
        start = max(0, first)
        end = min(last + p.tail_ms, duration)
        if i + 1 < len(runs):
            end = min(end, runs[i + 1][0])  # keep intervals disjoint when tail > gap
        if end > start:
            intervals.append(Interval(celebrity_id=celebrity_id, start_ms=start, end_ms=end))
    return intervals


def coalesce_all(
    timeline: Timeline, params: CoalesceParams | None = None
) -> dict[str, list[Interval]]:
    return {
        cid: coalesce_intervals(timeline, cid, params) for cid in timeline.celebrity_ids()
    }


def total_duration(intervals: Iterable[Interval]) -> int:
    """Sum of interval lengths in ms; callers guarantee disjointness."""
    return sum(iv.length_ms for iv in intervals)
