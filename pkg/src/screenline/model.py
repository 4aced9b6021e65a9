"""Shared domain types: episodes, appearance records, intervals.

Everything here is an immutable value.  Timestamps are integer
milliseconds from episode start; ``pos_index`` is the per-episode
detection ordinal, so ``(t_ms, pos_index)`` is a total order over an
episode's records and the canonical sort key used everywhere downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .errors import BadBBox, DuplicateKey, NegativeScore, OutOfRange, ValidationError

# JSONL field order is part of the wire format; exports must be byte-stable.
RECORD_FIELDS = ("episode_id", "celebrity_id", "t_ms", "pos_index", "bbox", "score")


@dataclass(frozen=True)
class EpisodeMeta:
    """Identity and bookkeeping for one episode."""

    episode_id: str
    series_id: str
    season: int
    episode_number: int
    duration_ms: int
    processed: bool = False

    def __post_init__(self) -> None:
        if self.season < 1 or self.episode_number < 1:
            raise ValidationError("season and episode_number must be >= 1")
        if self.duration_ms < 0:
            raise ValidationError("duration_ms must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "episode_id": self.episode_id,
            "series_id": self.series_id,
            "season": self.season,
            "episode_number": self.episode_number,
            "duration_ms": self.duration_ms,
            "processed": self.processed,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EpisodeMeta":
        return cls(
            episode_id=d["episode_id"],
            series_id=d["series_id"],
            season=int(d["season"]),
            episode_number=int(d["episode_number"]),
            duration_ms=int(d["duration_ms"]),
            processed=bool(d.get("processed", False)),
        )


@dataclass(frozen=True)
class AppearanceRecord:
    """One identity-resolved detection at a timestamp.

    ``bbox`` is (x, y, width, height) as fractions of the frame; ``score``
    is the accepted gallery match's similarity mapped into [0, 1].
    ``extra`` carries unknown JSONL fields so round-trips preserve them.
    """

    episode_id: str
    celebrity_id: str
    t_ms: int
    pos_index: int
    bbox: tuple[float, float, float, float]
    score: float
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def sort_key(self) -> tuple[int, int]:
        return (self.t_ms, self.pos_index)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "episode_id": self.episode_id,
            "celebrity_id": self.celebrity_id,
            "t_ms": self.t_ms,
            "pos_index": self.pos_index,
            "bbox": list(self.bbox),
            "score": self.score,
        }
        for k in sorted(self.extra):
            if k not in d:
                d[k] = self.extra[k]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AppearanceRecord":
        bbox = d["bbox"]
        if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
            raise BadBBox(f"bbox must have 4 components, got {bbox!r}")
        extra = {k: v for k, v in d.items() if k not in RECORD_FIELDS}
        return cls(
            episode_id=d["episode_id"],
            celebrity_id=d["celebrity_id"],
            t_ms=int(d["t_ms"]),
            pos_index=int(d["pos_index"]),
            bbox=tuple(float(v) for v in bbox),
            score=float(d["score"]),
            extra=extra,
        )


@dataclass(frozen=True)
class Interval:
    """Half-open presence span [start_ms, end_ms) for one celebrity."""

    celebrity_id: str
    start_ms: int
    end_ms: int

    def __post_init__(self) -> None:
        if self.start_ms >= self.end_ms:
            raise ValidationError(
                f"interval must have start < end, got [{self.start_ms}, {self.end_ms})"
            )

    @property
    def length_ms(self) -> int:
        return self.end_ms - self.start_ms


def canonical_sort(records: Iterable[AppearanceRecord]) -> list[AppearanceRecord]:
    """Sort records by (t_ms, pos_index); deterministic for any input order."""
    return sorted(records, key=AppearanceRecord.sort_key)


def check_unique_positions(records: Iterable[AppearanceRecord]) -> None:
    """Raise DuplicateKey if any (t_ms, pos_index) pair repeats."""
    seen: set[tuple[int, int]] = set()
    for r in records:
        key = r.sort_key()
        if key in seen:
            raise DuplicateKey(f"duplicate (t_ms, pos_index) = {key}")
        seen.add(key)


def validate_record(record: AppearanceRecord, meta: EpisodeMeta) -> AppearanceRecord:
    """Return ``record`` unchanged iff all invariants hold, else raise.

    Checks timestamp range against the episode duration, bbox geometry,
    and score range.  Idempotent: a record that validated once always
    validates again.
    """
    if record.t_ms < 0 or record.t_ms > meta.duration_ms:
        raise OutOfRange(
            f"t_ms={record.t_ms} outside [0, {meta.duration_ms}] for {meta.episode_id}"
        )
    x, y, w, h = record.bbox
    for name, v in zip("xywh", record.bbox):
        if not (0.0 <= v <= 1.0):
            raise BadBBox(f"bbox {name}={v} outside [0, 1]")
    if x + w > 1.0 + 1e-9:
        raise BadBBox(f"bbox overflows frame width: x+w = {x + w}")
    if y + h > 1.0 + 1e-9:
        raise BadBBox(f"bbox overflows frame height: y+h = {y + h}")
    if record.score < 0.0:
        raise NegativeScore(f"score={record.score} < 0")
    if record.score > 1.0:
        raise ValidationError(f"score={record.score} > 1")
    return record


# --- JSONL wire format -------------------------------------------------------


def record_to_json(record: AppearanceRecord) -> str:
    """One JSONL line, fixed field order, unknown fields appended."""
    return json.dumps(record.to_dict(), separators=(",", ":"), ensure_ascii=False)


def record_from_json(line: str) -> AppearanceRecord:
    try:
        d = json.loads(line)
    except json.JSONDecodeError as e:
        raise ValidationError(f"bad JSONL line: {e}") from e
    if not isinstance(d, dict):
        raise ValidationError("JSONL line is not an object")
    try:
        return AppearanceRecord.from_dict(d)
    except BadBBox:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"bad record fields: {e}") from e


def write_jsonl(records: Iterable[AppearanceRecord]) -> str:
    return "".join(record_to_json(r) + "\n" for r in records)


def read_jsonl(text: str) -> Iterator[AppearanceRecord]:
    """Parse JSONL; raises ValidationError carrying the 1-based line number."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield record_from_json(line)
        except ValidationError as e:
            raise ValidationError(f"line {lineno}: {e}") from e
