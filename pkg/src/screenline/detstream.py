"""Binary detection stream ("DETS"): the pipeline's input format.

Little-endian layout: magic "DETS", version u32, then repeated frames of
t_ms u64, face_count u16, and per face bbox 4xf32 followed by a
payload-type byte, a u32 payload length, and the payload bytes.  Payload
type 0 carries a raw float32 embedding (synthetic mode); type 1 carries
opaque crop bytes for a real embedder stage.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .errors import BadMagic, TruncatedFile, VersionUnsupported

MAGIC = b"DETS"
FORMAT_VERSION = 1

PAYLOAD_EMBEDDING = 0
PAYLOAD_CROP = 1

_FRAME_HEAD = struct.Struct("<QH")
_FACE_HEAD = struct.Struct("<4fBI")


@dataclass(frozen=True)
class Face:
    bbox: tuple[float, float, float, float]
    payload_type: int
    payload: bytes

    def embedding(self) -> np.ndarray:
        if self.payload_type != PAYLOAD_EMBEDDING:
            raise ValueError(f"payload type {self.payload_type} is not an embedding")
        return np.frombuffer(self.payload, dtype="<f4")


@dataclass(frozen=True)
class FrameFaces:
    """All faces detected in one frame, at one timestamp."""

    t_ms: int
    faces: tuple[Face, ...]


def embedding_face(bbox: tuple[float, float, float, float], vector: np.ndarray) -> Face:
    payload = np.ascontiguousarray(vector, dtype="<f4").tobytes()
    return Face(bbox=bbox, payload_type=PAYLOAD_EMBEDDING, payload=payload)


def write_stream(path: str | Path, frames: Iterable[FrameFaces]) -> int:
    """Write frames to ``path``; returns the number of faces written."""
    faces = 0
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        for frame in frames:
            f.write(_FRAME_HEAD.pack(frame.t_ms, len(frame.faces)))
            for face in frame.faces:
                f.write(_FACE_HEAD.pack(*face.bbox, face.payload_type, len(face.payload)))
                f.write(face.payload)
                faces += 1
    return faces


def _read_exact(f: BinaryIO, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise TruncatedFile(f"stream ends inside {what}")
    return buf


def read_stream(
    path: str | Path, start_ms: int | None = None, end_ms: int | None = None
) -> Iterator[FrameFaces]:
    """Yield frames, optionally restricted to the half-open span [start_ms, end_ms)."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if len(magic) < 4 or magic != MAGIC:
            raise BadMagic(f"{path}: expected {MAGIC!r}, found {magic!r}")
        (version,) = struct.unpack("<I", _read_exact(f, 4, "version"))
        if version != FORMAT_VERSION:
            raise VersionUnsupported(f"{path}: stream version {version} unsupported")
        while True:
            head = f.read(_FRAME_HEAD.size)
            if not head:
                return
            if len(head) < _FRAME_HEAD.size:
                raise TruncatedFile(f"{path}: stream ends inside a frame header")
            t_ms, face_count = _FRAME_HEAD.unpack(head)
            faces = []
            for _ in range(face_count):
                fh = _read_exact(f, _FACE_HEAD.size, "a face header")
                x, y, w, h, ptype, plen = _FACE_HEAD.unpack(fh)
                payload = _read_exact(f, plen, "a face payload")
                faces.append(Face(bbox=(x, y, w, h), payload_type=ptype, payload=payload))
            if start_ms is not None and t_ms < start_ms:
                continue
            if end_ms is not None and t_ms >= end_ms:
                # Frames are time-ordered, so nothing past the span matters.
                return
            yield FrameFaces(t_ms=int(t_ms), faces=tuple(faces))
