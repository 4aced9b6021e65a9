"""Deterministic synthetic episodes: gallery, scene schedule, detections.

Stands in for the real detector/embedder models so the pipeline and
analytics can be verified against known ground truth.  All randomness
comes from numpy's PCG64 bit generator seeded with the caller's integer
seed, so identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .detstream import FrameFaces, embedding_face
from .errors import ScreenlineError, ValidationError

DEFAULT_DIM = 512

# Reject a freshly drawn gallery row whose cosine to any accepted row
# reaches this bound; random unit vectors at dim >= 64 virtually never do.
SEPARATION_COSINE = 0.5
_MAX_REDRAWS = 10_000


class DimTooSmall(ValidationError):
    pass


class EmptyGallery(ScreenlineError):
    pass


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class IdentityGallery:
    """Reference identities: unit-norm float32 rows, one per celebrity."""

    ids: tuple[str, ...]
    vectors: np.ndarray  # (count, dim) float32
    dim: int


@dataclass(frozen=True)
class PresenceSpan:
    celebrity_id: str
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class SceneSchedule:
    """Ground truth: who is on screen during which half-open span."""

    duration_ms: int
    spans: tuple[PresenceSpan, ...]

    def to_json(self) -> str:
        payload = {
            "duration_ms": self.duration_ms,
            "spans": [
                {"celebrity_id": s.celebrity_id, "start_ms": s.start_ms, "end_ms": s.end_ms}
                for s in self.spans
            ],
        }
        return json.dumps(payload, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "SceneSchedule":
        d = json.loads(text)
        spans = tuple(
            PresenceSpan(s["celebrity_id"], int(s["start_ms"]), int(s["end_ms"]))
            for s in d["spans"]
        )
        return cls(duration_ms=int(d["duration_ms"]), spans=spans)


@dataclass(frozen=True)
class DetectionEvent:
    """One synthetic face sighting; the true id never reaches the pipeline."""

    t_ms: int
    true_celebrity_id: str
    embedding: np.ndarray  # (dim,) float32
    bbox: tuple[float, float, float, float]
    frame_ordinal: int


def gen_gallery(seed: int, n_identities: int, dim: int = DEFAULT_DIM) -> IdentityGallery:
    """Draw ``n_identities`` unit vectors with pairwise cosine < 0.5.

    Violating rows are re-drawn; raises DimTooSmall when dim < 2 or when
    separation cannot be reached after many attempts.
    """
    if n_identities < 1:
        raise ValidationError("n_identities must be >= 1")
    if dim < 2:
        raise DimTooSmall(f"dim={dim}: separation is unachievable below 2 dimensions")
    rng = _rng(seed)
    rows = np.zeros((n_identities, dim), dtype=np.float32)
    for i in range(n_identities):
        for attempt in range(_MAX_REDRAWS):
            v = rng.normal(size=dim)
            norm = np.linalg.norm(v)
            if norm < 1e-9:
                continue
            v = v / norm
            if i == 0 or float(np.max(rows[:i].astype(np.float64) @ v)) < SEPARATION_COSINE:
                rows[i] = v.astype(np.float32)
                break
        else:
            raise DimTooSmall(
                f"could not separate {n_identities} identities at dim={dim}"
            )
    width = max(3, len(str(n_identities - 1)))
    ids = tuple(f"celeb_{i:0{width}d}" for i in range(n_identities))
    return IdentityGallery(ids=ids, vectors=rows, dim=dim)


def gen_schedule(
    seed: int,
    gallery: IdentityGallery,
    duration_ms: int,
    mean_scene_ms: int,
    mean_cast_per_scene: float,
) -> SceneSchedule:
    """Partition [0, duration_ms) into scenes and cast each one.

    Scene count is round(duration / mean_scene), floored at 1; boundaries
    get +/-30% jitter.  Cast size uses stochastic rounding of the mean
    (so the long-run average matches), floored at 1 and capped at the
    gallery size; members are drawn without replacement.
    """
    if not gallery.ids:
        raise EmptyGallery("schedule needs at least one identity")
    if not (duration_ms >= mean_scene_ms >= 1000):
        raise ValidationError(
            f"need duration_ms >= mean_scene_ms >= 1000, got {duration_ms}, {mean_scene_ms}"
        )
    if mean_cast_per_scene < 0:
        raise ValidationError("mean_cast_per_scene must be >= 0")
    rng = _rng(seed)
    n_scenes = max(1, int(round(duration_ms / mean_scene_ms)))
    bounds = [0]
    for i in range(1, n_scenes):
        jitter = rng.uniform(-0.3, 0.3) * duration_ms / n_scenes
        b = int(round(i * duration_ms / n_scenes + jitter))
        bounds.append(max(bounds[-1] + 1, min(b, duration_ms - (n_scenes - i))))
    bounds.append(duration_ms)

    n_ids = len(gallery.ids)
    base = int(np.floor(mean_cast_per_scene))
    frac = mean_cast_per_scene - base
    spans: list[PresenceSpan] = []
    for start, end in zip(bounds[:-1], bounds[1:]):
        size = base + (1 if rng.random() < frac else 0)
        size = min(n_ids, max(1, size))
        members = rng.choice(n_ids, size=size, replace=False)
        for m in sorted(int(j) for j in members):
            spans.append(PresenceSpan(gallery.ids[m], start, end))
    spans.sort(key=lambda s: (s.start_ms, s.celebrity_id))
    return SceneSchedule(duration_ms=duration_ms, spans=tuple(spans))


def frame_times(duration_ms: int, fps: float) -> np.ndarray:
    """Frame grid t_k = round(k * 1000 / fps) for all t_k < duration_ms."""
    if fps <= 0:
        raise ValidationError(f"fps must be > 0, got {fps}")
    n = int(np.ceil(duration_ms * fps / 1000.0)) + 1
    times = np.rint(np.arange(n, dtype=np.float64) * (1000.0 / fps)).astype(np.int64)
    return times[times < duration_ms]


def emit_detections(
    schedule: SceneSchedule,
    gallery: IdentityGallery,
    fps: float,
    noise_sigma: float,
    seed: int,
) -> Iterator[DetectionEvent]:
    """Yield events frame by frame, ties within a frame ordered by gallery id.

    Embeddings are the true gallery row plus gaussian noise whose expected
    norm is ``noise_sigma`` (per-component std sigma/sqrt(dim)), re-normalized
    onto the unit sphere.  noise_sigma=0 reproduces gallery rows bit-exactly.
    """
    if noise_sigma < 0:
        raise ValidationError("noise_sigma must be >= 0")
    rng = _rng(seed)
    times = frame_times(schedule.duration_ms, fps)
    row_of = {cid: i for i, cid in enumerate(gallery.ids)}
    # (frame k, gallery row) pairs for every span, then one global sort.
    pairs: list[tuple[int, int]] = []
    for span in schedule.spans:
        k0 = int(np.searchsorted(times, span.start_ms, side="left"))
        k1 = int(np.searchsorted(times, span.end_ms, side="left"))
        row = row_of[span.celebrity_id]
        pairs.extend((k, row) for k in range(k0, k1))
    pairs.sort()
    comp_sigma = noise_sigma / np.sqrt(gallery.dim)
    for k, row in pairs:
        x = rng.uniform(0.0, 0.8)
        y = rng.uniform(0.0, 0.8)
        w = rng.uniform(0.05, 0.2)
        h = rng.uniform(0.05, 0.2)
        true = gallery.vectors[row]
        if noise_sigma == 0:
            emb = true.copy()
        else:
            noisy = true.astype(np.float64) + rng.normal(0.0, comp_sigma, size=gallery.dim)
            emb = (noisy / np.linalg.norm(noisy)).astype(np.float32)
        yield DetectionEvent(
            t_ms=int(times[k]),
            true_celebrity_id=gallery.ids[row],
            embedding=emb,
            bbox=(float(x), float(y), float(w), float(h)),
            frame_ordinal=k,
        )


def events_to_frames(events: Iterable[DetectionEvent]) -> Iterator[FrameFaces]:
    """Group an ordered event stream into per-frame face lists."""
    current_k: int | None = None
    current_t = 0
    faces: list = []
    for ev in events:
        if current_k is not None and ev.frame_ordinal != current_k:
            yield FrameFaces(t_ms=current_t, faces=tuple(faces))
            faces = []
        current_k = ev.frame_ordinal
        current_t = ev.t_ms
        faces.append(embedding_face(ev.bbox, ev.embedding))
    if current_k is not None:
        yield FrameFaces(t_ms=current_t, faces=tuple(faces))


def ground_truth_counts(schedule: SceneSchedule, fps: float) -> dict[str, int]:
    """Events each identity should produce: sum of frame-grid hits per span."""
    times = frame_times(schedule.duration_ms, fps)
    counts: dict[str, int] = {}
    for span in schedule.spans:
        k0 = int(np.searchsorted(times, span.start_ms, side="left"))
        k1 = int(np.searchsorted(times, span.end_ms, side="left"))
        counts[span.celebrity_id] = counts.get(span.celebrity_id, 0) + (k1 - k0)
    return counts
