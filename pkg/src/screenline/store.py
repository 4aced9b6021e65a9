"""Embedded persistence: episode metadata, records, and the query families.

Layout on disk: an append-only operation log (``store.sldb``, magic
"SLDB") plus one JSONL snapshot file per put under ``segments/``.  The
log entry is the commit point — a put that dies before its entry is
appended leaves the previous episode version intact, and a torn tail
from a crashed append is dropped on reopen.  Readers work off immutable
in-memory tuples swapped under the single writer lock.
"""

from __future__ import annotations

import errno
import json
import os
import struct
import threading
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .aggregate import CoalesceParams, Timeline, coalesce_intervals, total_duration
from .checksum import crc32c
from .errors import BadMagic, ScreenlineError, ValidationError, VersionUnsupported
from .model import AppearanceRecord, EpisodeMeta, read_jsonl, validate_record, write_jsonl

LOG_MAGIC = b"SLDB"
LOG_VERSION = 1


class UnknownEpisode(ScreenlineError):
    pass


class StorageFull(ScreenlineError):
    pass


class CorruptSegment(ScreenlineError):
    pass


class MissingCoalesceParams(ScreenlineError):
    pass


@dataclass(frozen=True)
class QueryFilter:
    episode_id: str | None = None
    series_id: str | None = None
    season: int | None = None
    celebrity_ids: frozenset[str] | None = None
    from_ms: int | None = None
    to_ms: int | None = None

    def __post_init__(self) -> None:
        if self.from_ms is not None and self.to_ms is not None and self.from_ms >= self.to_ms:
            raise ValidationError(f"empty time range [{self.from_ms}, {self.to_ms})")


@dataclass(frozen=True)
class AggregateRequest:
    statistic: str  # count | duration | first_seen | last_seen
    group_by: str  # celebrity | episode | season
    filter: QueryFilter = field(default_factory=QueryFilter)
    coalesce: CoalesceParams | None = None

    def __post_init__(self) -> None:
        if self.statistic not in ("count", "duration", "first_seen", "last_seen"):
            raise ValidationError(f"unknown statistic {self.statistic!r}")
        if self.group_by not in ("celebrity", "episode", "season"):
            raise ValidationError(f"unknown group_by {self.group_by!r}")


@dataclass
class _Episode:
    meta: EpisodeMeta
    records: tuple[AppearanceRecord, ...] = ()
    t_values: list[int] = field(default_factory=list)
    by_celebrity: dict[str, tuple[AppearanceRecord, ...]] = field(default_factory=dict)
    snapshot: str | None = None
    source: dict[str, Any] = field(default_factory=dict)


def _wrap_disk_errors(e: OSError) -> ScreenlineError:
    if e.errno == errno.ENOSPC:
        return StorageFull(str(e))
    return ScreenlineError(f"store I/O failed: {e}")


class Store:
    """Single-writer, many-reader episode store rooted at a directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "segments").mkdir(exist_ok=True)
        self._log_path = self.root / "store.sldb"
        self._lock = threading.Lock()
        self._episodes: dict[str, _Episode] = {}
        self._snapshot_seq = 0
        self._replay()
        self._log = open(self._log_path, "ab")

    # --- log machinery --------------------------------------------------------

    def _replay(self) -> None:
        if not self._log_path.exists():
            with open(self._log_path, "wb") as f:
                f.write(LOG_MAGIC + struct.pack("<I", LOG_VERSION))
            return
        raw = self._log_path.read_bytes()
        if raw[:4] != LOG_MAGIC:
            raise BadMagic(f"{self._log_path}: not a store log")
        (version,) = struct.unpack_from("<I", raw, 4)
        if version != LOG_VERSION:
            raise VersionUnsupported(f"{self._log_path}: log version {version}")
        off = 8
        valid_end = off
        # Replaced snapshots are unlinked after commit, so record loading is
        # deferred until we know each episode's final (live) snapshot.
        pending: dict[str, tuple[str, int]] = {}
        while off < len(raw):
            if off + 4 > len(raw):
                break  # torn tail: length prefix incomplete
            (length,) = struct.unpack_from("<I", raw, off)
            if off + 4 + length + 4 > len(raw):
                break  # torn tail: entry incomplete
            payload = raw[off + 4 : off + 4 + length]
            (stored_crc,) = struct.unpack_from("<I", raw, off + 4 + length)
            if crc32c(payload) != stored_crc:
                raise CorruptSegment(f"{self._log_path}: bad entry checksum at {off}")
            self._apply(json.loads(payload.decode("utf-8")), pending)
            off += 4 + length + 4
            valid_end = off
        if valid_end < len(raw):
            with open(self._log_path, "r+b") as f:
                f.truncate(valid_end)
        for episode_id, (name, count) in pending.items():
            path = self.root / "segments" / name
            try:
                records = tuple(read_jsonl(path.read_text(encoding="utf-8")))
            except (OSError, ValidationError) as e:
                raise CorruptSegment(f"snapshot {name} unreadable: {e}") from e
            if len(records) != count:
                raise CorruptSegment(
                    f"snapshot {name} holds {len(records)} records, log says {count}"
                )
            self._install_records(self._episodes[episode_id], records)

    def _apply(self, entry: dict[str, Any], pending: dict[str, tuple[str, int]] | None = None) -> None:
        op = entry["op"]
        if op == "register":
            meta = EpisodeMeta.from_dict(entry["meta"])
            ep = self._episodes.get(meta.episode_id)
            if ep is None:
                self._episodes[meta.episode_id] = _Episode(meta=meta)
            else:
                ep.meta = meta
        elif op == "put":
            meta = EpisodeMeta.from_dict(entry["meta"])
            name = entry["snapshot"]
            self._snapshot_seq = max(self._snapshot_seq, int(name.split(".")[0]))
            ep = self._episodes.setdefault(meta.episode_id, _Episode(meta=meta))
            ep.meta = meta
            ep.snapshot = name
            if pending is not None:
                pending[meta.episode_id] = (name, entry["count"])
        elif op == "processed":
            ep = self._episodes.get(entry["episode_id"])
            if ep is not None:
                ep.meta = EpisodeMeta.from_dict({**ep.meta.to_dict(), "processed": True})
        elif op == "source":
            ep = self._episodes.get(entry["episode_id"])
            if ep is not None:
                ep.source = dict(entry.get("source", {}))
        else:
            raise CorruptSegment(f"unknown log op {op!r}")

    @staticmethod
    def _install_records(ep: _Episode, records: tuple[AppearanceRecord, ...]) -> None:
        ep.records = records
        ep.t_values = [r.t_ms for r in records]
        grouped: dict[str, list[AppearanceRecord]] = {}
        for r in records:
            grouped.setdefault(r.celebrity_id, []).append(r)
        ep.by_celebrity = {cid: tuple(rs) for cid, rs in grouped.items()}

    def _append(self, entry: dict[str, Any]) -> None:
        payload = json.dumps(entry, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
        try:
            self._log.write(struct.pack("<I", len(payload)))
            self._log.write(payload)
            self._log.write(struct.pack("<I", crc32c(payload)))
            self._log.flush()
            os.fsync(self._log.fileno())
        except OSError as e:
            raise _wrap_disk_errors(e) from e

    def close(self) -> None:
        self._log.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()

    # --- writes ---------------------------------------------------------------

    def register_episode(self, meta: EpisodeMeta) -> None:
        with self._lock:
            self._append({"op": "register", "meta": meta.to_dict()})
            self._apply({"op": "register", "meta": meta.to_dict()})

    def register_source(self, episode_id: str, **source: Any) -> None:
        """Attach pipeline inputs (detection stream, gallery path) to an episode."""
        with self._lock:
            self._require(episode_id)
            entry = {"op": "source", "episode_id": episode_id, "source": source}
            self._append(entry)
            self._apply(entry)

    def put_timeline(self, timeline: Timeline) -> int:
        """Store an episode's records; replaces atomically, marks processed."""
        meta = timeline.meta
        for r in timeline.records:
            validate_record(r, meta)
        with self._lock:
            self._snapshot_seq += 1
            name = f"{self._snapshot_seq:08d}.seg"
            tmp = self.root / "segments" / (name + ".tmp")
            final = self.root / "segments" / name
            try:
                with open(tmp, "w", encoding="utf-8") as f:
                    f.write(write_jsonl(timeline.records))
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp, final)
            except OSError as e:
                tmp.unlink(missing_ok=True)
                raise _wrap_disk_errors(e) from e
            stored_meta = EpisodeMeta.from_dict({**meta.to_dict(), "processed": True})
            old = self._episodes.get(meta.episode_id)
            old_snapshot = old.snapshot if old else None
            entry = {
                "op": "put",
                "meta": stored_meta.to_dict(),
                "snapshot": name,
                "count": len(timeline.records),
            }
            self._append(entry)
            fresh = _Episode(meta=stored_meta, snapshot=name, source=old.source if old else {})
            self._install_records(fresh, timeline.records)
            # Single dict assignment: readers see either the old or new episode.
            self._episodes[meta.episode_id] = fresh
            if old_snapshot and old_snapshot != name:
                (self.root / "segments" / old_snapshot).unlink(missing_ok=True)
            return len(timeline.records)

    def mark_processed(self, episode_id: str) -> None:
        with self._lock:
            self._require(episode_id)
            entry = {"op": "processed", "episode_id": episode_id}
            self._append(entry)
            self._apply(entry)

    # --- reads ----------------------------------------------------------------

    def _require(self, episode_id: str) -> _Episode:
        ep = self._episodes.get(episode_id)
        if ep is None:
            raise UnknownEpisode(f"episode {episode_id!r} is not registered")
        return ep

    def get_meta(self, episode_id: str) -> EpisodeMeta:
        return self._require(episode_id).meta

    def get_source(self, episode_id: str) -> dict[str, Any]:
        return dict(self._require(episode_id).source)

    def list_episodes(self) -> list[EpisodeMeta]:
        return [self._episodes[k].meta for k in sorted(self._episodes)]

    def list_unprocessed(self) -> list[str]:
        return [k for k in sorted(self._episodes) if not self._episodes[k].meta.processed]

    def get_timeline(self, episode_id: str) -> Timeline:
        ep = self._require(episode_id)
        return Timeline(meta=ep.meta, records=ep.records)

    def query_appearances(self, q: QueryFilter) -> list[AppearanceRecord]:
        """All records matching every present clause, in canonical order
        (grouped by episode id for multi-episode scopes)."""
        if q.episode_id is not None:
            episodes = [self._require(q.episode_id)]
        else:
            episodes = [self._episodes[k] for k in sorted(self._episodes)]
        out: list[AppearanceRecord] = []
        for ep in episodes:
            if q.series_id is not None and ep.meta.series_id != q.series_id:
                continue
            if q.season is not None and ep.meta.season != q.season:
                continue
            if q.celebrity_ids is not None:
                pools: Iterable[tuple[AppearanceRecord, ...]] = (
                    ep.by_celebrity.get(cid, ()) for cid in sorted(q.celebrity_ids)
                )
                rows = sorted(
                    (r for pool in pools for r in pool), key=AppearanceRecord.sort_key
                )
            else:
                rows = list(ep.records)
            out.extend(_slice_time_range(rows, q.from_ms, q.to_ms))
        return out

    def query_cooccurrence(
        self, q: QueryFilter, window_ms: int = 1_000
    ) -> dict[tuple[str, str], int]:
        """Pair counts, summed per episode so windows never span episodes."""
        records = self.query_appearances(q)
        by_episode: dict[str, list[AppearanceRecord]] = {}
        for r in records:
            by_episode.setdefault(r.episode_id, []).append(r)
        pairs: dict[tuple[str, str], int] = {}
        for ep_records in by_episode.values():
            present: dict[int, set[str]] = {}
            for r in ep_records:
                bucket = r.t_ms // window_ms if window_ms > 0 else r.t_ms
                present.setdefault(bucket, set()).add(r.celebrity_id)
            for members in present.values():
                ordered = sorted(members)
                for i, a in enumerate(ordered):
                    for b in ordered[i + 1 :]:
                        pairs[(a, b)] = pairs.get((a, b), 0) + 1
        return pairs

    def aggregate(self, req: AggregateRequest) -> dict[Any, Any]:
        """Grouped statistic over matching records; duration needs params."""
        if req.statistic == "duration" and req.coalesce is None:
            raise MissingCoalesceParams("duration aggregation needs coalesce params")
        records = self.query_appearances(req.filter)

        def group_key(r: AppearanceRecord) -> Any:
            if req.group_by == "celebrity":
                return r.celebrity_id
            if req.group_by == "episode":
                return r.episode_id
            return self._episodes[r.episode_id].meta.season

        if req.statistic == "duration":
            per_pair: dict[tuple[str, str], list[AppearanceRecord]] = {}
            for r in records:
                per_pair.setdefault((r.episode_id, r.celebrity_id), []).append(r)
            result: dict[Any, int] = {}
            for (ep_id, cid), rows in per_pair.items():
                tl = Timeline(meta=self._episodes[ep_id].meta, records=tuple(rows))
                dur = total_duration(coalesce_intervals(tl, cid, req.coalesce))
                key = group_key(rows[0])
                result[key] = result.get(key, 0) + dur
            return result

        result = {}
        for r in records:
            key = group_key(r)
            if req.statistic == "count":
                result[key] = result.get(key, 0) + 1
            elif req.statistic == "first_seen":
                result[key] = min(result.get(key, r.t_ms), r.t_ms)
            else:  # last_seen
                result[key] = max(result.get(key, r.t_ms), r.t_ms)
        return result


def _slice_time_range(
    rows: list[AppearanceRecord], from_ms: int | None, to_ms: int | None
) -> list[AppearanceRecord]:
    if from_ms is None and to_ms is None:
        return rows
    ts = [r.t_ms for r in rows]
    lo = 0 if from_ms is None else bisect_left(ts, from_ms)
    hi = len(rows) if to_ms is None else bisect_left(ts, to_ms)
    return rows[lo:hi]
