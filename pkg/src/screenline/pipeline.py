"""Chunked parallel inference: plan, per-worker staged batching, episode runs.

An episode is split into N contiguous time chunks, one worker per chunk.
Each worker runs detect -> position-encode -> embed with independent batch
sizes; provenance (t_ms, pos_index) rides along so re-batching between
stages can never silently reorder, drop, or duplicate a detection.
Workers share nothing and only return a value, so the merged result is
identical for any completion order.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable, NamedTuple, Protocol, Sequence

import numpy as np

from . import aggregate
from .detstream import PAYLOAD_EMBEDDING, FrameFaces
from .errors import ScreenlineError, ValidationError
from .index import KnownIdentityIndex, accept_mask, confidence, search_top1_batch
from .model import AppearanceRecord, EpisodeMeta

# Chunk i owns pos_index values [i * OFFSET_STRIDE, (i+1) * OFFSET_STRIDE):
# workers never coordinate yet indices stay globally unique and ordered.
OFFSET_STRIDE = 2**32

DEFAULT_DETECT_BATCH = 64
DEFAULT_EMBED_BATCH = 128


class ZeroDuration(ValidationError):
    pass


class OffsetOverflow(ScreenlineError):
    pass


class StageFailure(ScreenlineError):
    """A stage raised; carries which chunk and batch were in flight."""

    def __init__(self, message: str, chunk_ordinal: int, batch_ordinal: int):
        super().__init__(f"chunk {chunk_ordinal}, batch {batch_ordinal}: {message}")
        self.chunk_ordinal = chunk_ordinal
        self.batch_ordinal = batch_ordinal


class MisalignedStage(ScreenlineError):
    """A stage broke order preservation (count or shape sentinel tripped)."""


class GalleryDimMismatch(ScreenlineError):
    pass


@dataclass(frozen=True)
class ChunkPlan:
    episode_id: str
    n_workers: int
    chunks: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class BatchConfig:
    detect_batch: int = DEFAULT_DETECT_BATCH
    embed_batch: int = DEFAULT_EMBED_BATCH

    def __post_init__(self) -> None:
        if self.detect_batch < 1 or self.embed_batch < 1:
            raise ValidationError("batch sizes must be >= 1")


class Detection(NamedTuple):
    t_ms: int
    bbox: tuple[float, float, float, float]
    payload_type: int
    payload: bytes


class EncodedDetection(NamedTuple):
    t_ms: int
    pos_index: int
    bbox: tuple[float, float, float, float]
    payload_type: int
    payload: bytes


class DetectorStage(Protocol):
    def detect(self, frames: Sequence[FrameFaces]) -> list[Detection]: ...


class EmbedderStage(Protocol):
    def embed(self, batch: Sequence[EncodedDetection]) -> np.ndarray: ...


class PassthroughDetector:
    """Synthetic-mode detector: unpacks the faces already in the stream."""

    def detect(self, frames: Sequence[FrameFaces]) -> list[Detection]:
        out: list[Detection] = []
        for frame in frames:
            for face in frame.faces:
                out.append(Detection(frame.t_ms, face.bbox, face.payload_type, face.payload))
        return out


class PayloadEmbedder:
    """Synthetic-mode embedder: decodes float32 payloads, order preserved."""

    def embed(self, batch: Sequence[EncodedDetection]) -> np.ndarray:
        vecs = []
        for det in batch:
            if det.payload_type != PAYLOAD_EMBEDDING:
                raise ValueError(f"payload type {det.payload_type} has no embedding")
            vecs.append(np.frombuffer(det.payload, dtype="<f4"))
        if not vecs:
            return np.zeros((0, 0), dtype=np.float32)
        return np.vstack(vecs)


@dataclass(frozen=True)
class Stages:
    detector: DetectorStage
    embedder: EmbedderStage


def synthetic_stages() -> Stages:
    return Stages(detector=PassthroughDetector(), embedder=PayloadEmbedder())


@dataclass(frozen=True)
class WorkerOutput:
    """One worker's ordered slice: provenance arrays plus embeddings."""

    span: tuple[int, int]
    worker_ordinal: int
    t_ms: np.ndarray  # (n,) int64 non-decreasing
    pos_index: np.ndarray  # (n,) int64 strictly increasing
    bboxes: np.ndarray  # (n, 4) float64
    embeddings: np.ndarray  # (n, dim) float32

    @property
    def count(self) -> int:
        return int(self.t_ms.shape[0])


def plan_chunks(duration_ms: int, n_workers: int, episode_id: str = "") -> ChunkPlan:
    """Chunk i = [floor(i*D/N), floor((i+1)*D/N)); empty chunks are dropped."""
    if duration_ms < 1:
        raise ZeroDuration(f"duration_ms must be >= 1, got {duration_ms}")
    if n_workers < 1:
        raise ValidationError(f"n_workers must be >= 1, got {n_workers}")
    chunks = []
    for i in range(n_workers):
        start = i * duration_ms // n_workers
        end = (i + 1) * duration_ms // n_workers
        if end > start:
            chunks.append((start, end))
    return ChunkPlan(episode_id=episode_id, n_workers=n_workers, chunks=tuple(chunks))


def chunk_base_offset(chunk_ordinal: int) -> int:
    return chunk_ordinal * OFFSET_STRIDE


def encode_positions(
    detections: Iterable[Detection],
    chunk_ordinal: int,
    base_offset: int | None = None,
    first_arrival: int = 0,
) -> list[EncodedDetection]:
    """Attach pos_index = base + arrival ordinal, in arrival order."""
    base = chunk_base_offset(chunk_ordinal) if base_offset is None else base_offset
    out = []
    for arrival, det in enumerate(detections, start=first_arrival):
        if arrival >= OFFSET_STRIDE:
            raise OffsetOverflow(
                f"chunk {chunk_ordinal} exceeded its {OFFSET_STRIDE} index stride"
            )
        out.append(EncodedDetection(det.t_ms, base + arrival, det.bbox, det.payload_type, det.payload))
    return out


def run_worker(
    span: tuple[int, int],
    source: Iterable[FrameFaces],
    stages: Stages,
    batch_config: BatchConfig,
    worker_ordinal: int,
) -> WorkerOutput:
    """Run one chunk through detect -> encode -> embed with re-batching.

    Frames arrive in detect_batch groups; encoded detections are regrouped
    into embed_batch groups.  Sentinel checks fail loudly if a stage
    returns the wrong count or shape.
    """
    start, end = span
    base = chunk_base_offset(worker_ordinal)
    arrival = 0
    detect_ordinal = 0
    embed_ordinal = 0
    pending: list[EncodedDetection] = []
    out_t: list[int] = []
    out_pos: list[int] = []
    out_bbox: list[tuple[float, float, float, float]] = []
    out_vecs: list[np.ndarray] = []

    def run_detect(frames: list[FrameFaces]) -> list[Detection]:
        nonlocal detect_ordinal
        try:
            detections = stages.detector.detect(frames)
        except Exception as e:  # stage code is pluggable, wrap whatever it raises
            raise StageFailure(f"detector: {e}", worker_ordinal, detect_ordinal) from e
        detect_ordinal += 1
        return detections

    def run_embed(batch: list[EncodedDetection]) -> None:
        nonlocal embed_ordinal
        try:
            vecs = stages.embedder.embed(batch)
        except Exception as e:
            raise StageFailure(f"embedder: {e}", worker_ordinal, embed_ordinal) from e
        if vecs.ndim != 2 or vecs.shape[0] != len(batch):
            raise MisalignedStage(
                f"chunk {worker_ordinal}, embed batch {embed_ordinal}: "
                f"{len(batch)} detections in, shape {vecs.shape} out"
            )
        embed_ordinal += 1
        for det, vec in zip(batch, vecs):
            out_t.append(det.t_ms)
            out_pos.append(det.pos_index)
            out_bbox.append(det.bbox)
        out_vecs.append(np.ascontiguousarray(vecs, dtype=np.float32))

    def drain_pending(final: bool) -> None:
        while len(pending) >= batch_config.embed_batch:
            run_embed(pending[: batch_config.embed_batch])
            del pending[: batch_config.embed_batch]
        if final and pending:
            run_embed(pending[:])
            pending.clear()

    frame_buf: list[FrameFaces] = []
    last_t = start
    for frame in source:
        if not (start <= frame.t_ms < end):
            raise ValidationError(
                f"frame at t={frame.t_ms} outside worker span [{start}, {end})"
            )
        if frame.t_ms < last_t:
            raise ValidationError("detection stream is not time-ordered")
        last_t = frame.t_ms
        frame_buf.append(frame)
        if len(frame_buf) == batch_config.detect_batch:
            encoded = encode_positions(run_detect(frame_buf), worker_ordinal, base, arrival)
            arrival += len(encoded)
            pending.extend(encoded)
            frame_buf = []
            drain_pending(final=False)
    if frame_buf:
        encoded = encode_positions(run_detect(frame_buf), worker_ordinal, base, arrival)
        arrival += len(encoded)
        pending.extend(encoded)
    drain_pending(final=True)

    n = len(out_t)
    if n != arrival:
        raise MisalignedStage(
            f"chunk {worker_ordinal}: {arrival} detections in, {n} embeddings out"
        )
    dim = out_vecs[0].shape[1] if out_vecs else 0
    return WorkerOutput(
        span=span,
        worker_ordinal=worker_ordinal,
        t_ms=np.asarray(out_t, dtype=np.int64),
        pos_index=np.asarray(out_pos, dtype=np.int64),
        bboxes=np.asarray(out_bbox, dtype=np.float64).reshape(n, 4),
        embeddings=np.vstack(out_vecs) if out_vecs else np.zeros((0, dim), np.float32),
    )


@dataclass(frozen=True)
class RunReport:
    episode_id: str
    workers: int
    detections: int
    embeddings: int
    accepted: int
    rejected: int
    wall_ms: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "episode_id": self.episode_id,
            "workers": self.workers,
            "detections": self.detections,
            "embeddings": self.embeddings,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "wall_ms": self.wall_ms,
        }


@dataclass(frozen=True)
class EpisodeRun:
    outputs: list[WorkerOutput]
    records: list[AppearanceRecord]
    timeline: "aggregate.Timeline"
    report: RunReport


SourceFactory = Callable[[int, int], Iterable[FrameFaces]]

_SEARCH_BLOCK = 8192


def run_episode(
    meta: EpisodeMeta,
    source_factory: SourceFactory,
    gallery: KnownIdentityIndex,
    batch_config: BatchConfig | None = None,
    n_workers: int = 1,
    threshold: float = 0.5,
    stage_factory: Callable[[], Stages] = synthetic_stages,
) -> EpisodeRun:
    """Fan an episode out over worker chunks, search, classify, and merge.

    Final pos_index values are assigned globally, by renumbering the
    offset-ordered concatenation of all chunks, so the exported record set
    is identical no matter how many workers processed the episode.
    """
    t0 = time.monotonic()
    batch = batch_config or BatchConfig()
    plan = plan_chunks(meta.duration_ms, n_workers, episode_id=meta.episode_id)

    def job(ordinal: int, span: tuple[int, int]) -> WorkerOutput:
        return run_worker(span, source_factory(*span), stage_factory(), batch, ordinal)

    if len(plan.chunks) == 1:
        outputs = [job(0, plan.chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(plan.chunks)) as pool:
            futures = [pool.submit(job, i, span) for i, span in enumerate(plan.chunks)]
            outputs = [f.result() for f in futures]  # ordinal order, not completion

    detections = sum(o.count for o in outputs)
    for o in outputs:
        if o.count and o.embeddings.shape[1] != gallery.dim:
            raise GalleryDimMismatch(
                f"embedder produced dim {o.embeddings.shape[1]}, gallery dim {gallery.dim}"
            )

    # Renumber into one global, chunk-ordered view before searching: the
    # concatenated arrays are byte-identical for any worker count, and the
    # fixed search block size keeps BLAS shapes (hence float rounding)
    # identical too, so exports match bit-for-bit across N.
    nonempty = [o for o in outputs if o.count]
    if nonempty:
        all_emb = np.vstack([o.embeddings for o in nonempty])
        all_t = np.concatenate([o.t_ms for o in nonempty])
        all_bbox = np.vstack([o.bboxes for o in nonempty])
    else:
        all_emb = np.zeros((0, gallery.dim), np.float32)
        all_t = np.zeros(0, np.int64)
        all_bbox = np.zeros((0, 4), np.float64)

    records: list[AppearanceRecord] = []
    accepted = 0
    for lo in range(0, detections, _SEARCH_BLOCK):
        hi = min(lo + _SEARCH_BLOCK, detections)
        rows, raw = search_top1_batch(gallery, all_emb[lo:hi])
        ok = accept_mask(raw, threshold, gallery.metric)
        for j in range(hi - lo):
            if ok[j]:
                records.append(
                    AppearanceRecord(
                        episode_id=meta.episode_id,
                        celebrity_id=gallery.ids[int(rows[j])],
                        t_ms=int(all_t[lo + j]),
                        pos_index=lo + j,
                        bbox=tuple(float(v) for v in all_bbox[lo + j]),
                        score=confidence(float(raw[j]), gallery.metric),
                    )
                )
                accepted += 1

    timeline = aggregate.merge_outputs(meta, outputs, records)
    wall_ms = int((time.monotonic() - t0) * 1000)
    report = RunReport(
        episode_id=meta.episode_id,
        workers=len(plan.chunks),
        detections=detections,
        embeddings=detections,
        accepted=accepted,
        rejected=detections - accepted,
        wall_ms=wall_ms,
    )
    return EpisodeRun(outputs=outputs, records=records, timeline=timeline, report=report)
