"""Exact gallery search over the known-identity index.

Full-scan top-k under cosine or L2 — no approximation, so results double
as their own contract: ordering is exact, ties always break toward the
lower gallery row.  The index persists to a little-endian binary file
("KEIX") with a CRC-32C footer and round-trips bit-exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .checksum import crc32c
from .errors import (
    BadMagic,
    ChecksumMismatch,
    ScreenlineError,
    TruncatedFile,
    ValidationError,
    VersionUnsupported,
)

MAGIC = b"KEIX"
FORMAT_VERSION = 1

_NORM_EPS = 1e-12


class Metric(str, Enum):
    COSINE = "cosine"
    L2 = "l2"

    @property
    def wire_code(self) -> int:
        return 0 if self is Metric.COSINE else 1

    @classmethod
    def from_wire(cls, code: int) -> "Metric":
        if code == 0:
            return cls.COSINE
        if code == 1:
            return cls.L2
        raise VersionUnsupported(f"unknown metric code {code}")


class DimMismatch(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


@dataclass(frozen=True)
class Match:
    """One ranked search hit. raw_score: similarity (cosine) or distance (L2)."""

    celebrity_id: str
    raw_score: float
    rank: int


@dataclass(frozen=True)
class KnownIdentityIndex:
    """Immutable gallery: ids + row-major float32 matrix + metric."""

    dim: int
    count: int
    vectors: np.ndarray  # (count, dim) float32, C-contiguous
    ids: tuple[str, ...]
    metric: Metric


def build_index(
    ids: Sequence[str], vectors: Sequence[Sequence[float]] | np.ndarray, metric: Metric
) -> KnownIdentityIndex:
    """Assemble an index; cosine rows are stored pre-normalized.

    Raises DimMismatch for ragged input, DuplicateId for repeated ids, and
    ZeroVector when a cosine row has norm < 1e-12.  Row order is preserved.
    """
    if len(set(ids)) != len(ids):
        raise DuplicateId("gallery ids must be distinct")
    try:
        mat = np.asarray(vectors, dtype=np.float64)
    except ValueError as e:
        raise DimMismatch(f"vectors are ragged: {e}") from e
    if mat.ndim == 1 and len(ids) == 0 and mat.size == 0:
        mat = mat.reshape(0, 0)
    if mat.ndim != 2:
        raise DimMismatch(f"expected a 2-D vector matrix, got ndim={mat.ndim}")
    if mat.shape[0] != len(ids):
        raise DimMismatch(f"{len(ids)} ids but {mat.shape[0]} vectors")
    if not np.all(np.isfinite(mat)):
        raise ValidationError("gallery vectors must be finite")
    if metric is Metric.COSINE and mat.shape[0] > 0:
        norms = np.linalg.norm(mat, axis=1)
        if np.any(norms < _NORM_EPS):
            bad = int(np.argmin(norms))
            raise ZeroVector(f"row {bad} has norm {norms[bad]:.3e}, cannot normalize")
        mat = mat / norms[:, None]
    stored = np.ascontiguousarray(mat, dtype=np.float32)
    return KnownIdentityIndex(
        dim=int(stored.shape[1]),
        count=int(stored.shape[0]),
        vectors=stored,
        ids=tuple(ids),
        metric=metric,
    )


def _scores(index: KnownIdentityIndex, queries: np.ndarray) -> np.ndarray:
    """(n_queries, count) score matrix: cosine similarity or L2 distance."""
    q = np.asarray(queries, dtype=np.float64)
    mat = index.vectors.astype(np.float64)
    if index.metric is Metric.COSINE:
        norms = np.linalg.norm(q, axis=1)
        norms = np.where(norms < _NORM_EPS, 1.0, norms)
        return (q @ mat.T) / norms[:, None]
    # ||q - v||^2 = ||q||^2 - 2 q.v + ||v||^2, clipped against float cancellation
    sq = (q * q).sum(axis=1)[:, None] - 2.0 * (q @ mat.T) + (mat * mat).sum(axis=1)[None, :]
    return np.sqrt(np.clip(sq, 0.0, None))


def _ranking(index: KnownIdentityIndex, scores_row: np.ndarray) -> np.ndarray:
    # Stable sort keeps equal scores in row order: the tie-break contract.
    key = -scores_row if index.metric is Metric.COSINE else scores_row
    return np.argsort(key, kind="stable")


def search_topk(index: KnownIdentityIndex, query: Sequence[float], k: int) -> list[Match]:
    """Exact top-k matches for one query; returns min(k, count) results."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if index.count == 0:
        return []
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != index.dim:
        raise DimMismatch(f"query dim {q.shape[0]} != index dim {index.dim}")
    scores = _scores(index, q[None, :])[0]
    order = _ranking(index, scores)[: min(k, index.count)]
    return [
        Match(celebrity_id=index.ids[row], raw_score=float(scores[row]), rank=rank)
        for rank, row in enumerate(order)
    ]


def full_ranking(index: KnownIdentityIndex, queries: np.ndarray) -> np.ndarray:
    """Complete (n_queries, count) ranking matrix, same ordering contract
    as search_topk but without per-hit object materialization."""
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != index.dim:
        raise DimMismatch(f"query batch shape {q.shape} incompatible with dim {index.dim}")
    scores = _scores(index, q)
    key = -scores if index.metric is Metric.COSINE else scores
    return np.argsort(key, axis=1, kind="stable")


def search_top1_batch(
    index: KnownIdentityIndex, queries: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized rank-0 search: (row indices, raw scores) per query.

    argmax/argmin return the first extreme, which is exactly the
    lowest-row tie-break search_topk uses.
    """
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != index.dim:
        raise DimMismatch(f"query batch shape {q.shape} incompatible with dim {index.dim}")
    if index.count == 0:
        raise ScreenlineError("cannot search an empty index")
    scores = _scores(index, q)
    if index.metric is Metric.COSINE:
        rows = np.argmax(scores, axis=1)
    else:
        rows = np.argmin(scores, axis=1)
    return rows, scores[np.arange(len(rows)), rows]


def classify(matches: Sequence[Match], threshold: float, metric: Metric) -> str | None:
    """Accept the rank-0 id iff it passes the threshold, else None."""
    if not matches:
        return None
    top = matches[0]
    if metric is Metric.COSINE:
        return top.celebrity_id if top.raw_score >= threshold else None
    return top.celebrity_id if top.raw_score <= threshold else None


def accept_mask(scores: np.ndarray, threshold: float, metric: Metric) -> np.ndarray:
    """Vectorized classify over rank-0 scores."""
    if metric is Metric.COSINE:
        return scores >= threshold
    return scores <= threshold


def confidence(raw_score: float, metric: Metric) -> float:
    """Map an accepted match's raw score onto [0, 1] for storage."""
    if metric is Metric.COSINE:
        return min(1.0, max(0.0, (raw_score + 1.0) / 2.0))
    return 1.0 / (1.0 + max(0.0, raw_score))


# --- persistence ("KEIX" little-endian, CRC-32C footer) ----------------------

_HEADER = struct.Struct("<4sIB3xII")  # magic, version, metric, pad, dim, count


def save_index(index: KnownIdentityIndex, path: str | Path) -> None:
    body = bytearray()
    body += _HEADER.pack(
        MAGIC, FORMAT_VERSION, index.metric.wire_code, index.dim, index.count
    )
    body += np.ascontiguousarray(index.vectors, dtype=np.float32).tobytes()
    ids_json = json.dumps(list(index.ids), separators=(",", ":"), ensure_ascii=False).encode()
    body += struct.pack("<I", len(ids_json))
    body += ids_json
    body += struct.pack("<I", crc32c(bytes(body)))
    Path(path).write_bytes(bytes(body))


def load_index(path: str | Path) -> KnownIdentityIndex:
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise TruncatedFile(f"{path}: {len(raw)} bytes is shorter than the magic")
    if raw[:4] != MAGIC:
        raise BadMagic(f"{path}: expected {MAGIC!r}, found {raw[:4]!r}")
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"{path}: incomplete header")
    _, version, metric_code, dim, count = _HEADER.unpack_from(raw, 0)
    if version != FORMAT_VERSION:
        raise VersionUnsupported(f"{path}: version {version} unsupported")
    metric = Metric.from_wire(metric_code)
    off = _HEADER.size
    vec_bytes = count * dim * 4
    if len(raw) < off + vec_bytes + 4:
        raise TruncatedFile(
            f"{path}: header promises {count}x{dim} rows but payload is short"
        )
    vectors = np.frombuffer(raw, dtype="<f4", count=count * dim, offset=off)
    off += vec_bytes
    (ids_len,) = struct.unpack_from("<I", raw, off)
    off += 4
    if len(raw) < off + ids_len + 4:
        raise TruncatedFile(f"{path}: id table runs past end of file")
    ids_json = raw[off : off + ids_len]
    off += ids_len
    (stored_crc,) = struct.unpack_from("<I", raw, off)
    if crc32c(raw[:off]) != stored_crc:
        raise ChecksumMismatch(f"{path}: CRC-32C footer does not match contents")
    ids = json.loads(ids_json.decode())
    if len(ids) != count:
        raise TruncatedFile(f"{path}: {len(ids)} ids for {count} rows")
    mat = vectors.reshape(count, dim).copy() if count else np.zeros((0, dim), np.float32)
    return KnownIdentityIndex(
        dim=int(dim), count=int(count), vectors=mat, ids=tuple(ids), metric=metric
    )
