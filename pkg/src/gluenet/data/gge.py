"""
GGE embedding stores.

Layout (little-endian):

    bytes 0-23   header: magic "GGEM", version, count, tokens, dim, flags
    [ids]        count x u64, present iff flags bit 0
    payload      count * tokens * dim float32, record-major, token-major

Stores are immutable once built; records are held as a C-contiguous
(count, tokens, dim) float32 array.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from gluenet.common.errors import (
    BadMagicError,
    DimensionError,
    FormatError,
    ShapeOverflowError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from gluenet.common.schema import (
    GGE_FLAG_IDS,
    GGE_ID_DTYPE,
    GGE_MAGIC,
    GGE_VALUE_DTYPE,
    GGE_VERSION,
    U32_MAX,
    get_schema,
)

log = logging.getLogger(__name__)

HEADER = get_schema("gge_header")
HEADER_BYTES = HEADER.itemsize
MAX_PAYLOAD_BYTES = np.iinfo(np.intp).max


@dataclass(frozen=True, eq=False)
class EmbeddingStore:
    """A set of equally shaped token sequences, optionally keyed by u64 ids."""

    records: np.ndarray
    ids: Optional[np.ndarray] = None

    def __post_init__(self):
        records = np.ascontiguousarray(self.records, dtype=np.float32)
        if records.ndim != 3:
            raise DimensionError(
                f"records must be (count, tokens, dim), got shape {records.shape}"
            )
        if records.shape[1] < 1 or records.shape[2] < 1:
            raise DimensionError(f"tokens and dim must be positive, got {records.shape[1:]}")
        records.setflags(write=False)
        object.__setattr__(self, "records", records)

        if self.ids is not None:
            ids = np.ascontiguousarray(self.ids, dtype=np.uint64)
            if ids.shape != (records.shape[0],):
                raise DimensionError(
                    f"ids must have one entry per record ({records.shape[0]}), got {ids.shape}"
                )
            if np.unique(ids).size != ids.size:
                raise FormatError("record ids must be unique")
            ids.setflags(write=False)
            object.__setattr__(self, "ids", ids)

    @classmethod
    def empty(cls, tokens: int, dim: int, with_ids: bool = False) -> "EmbeddingStore":
        ids = np.zeros(0, dtype=np.uint64) if with_ids else None
        return cls(np.zeros((0, tokens, dim), dtype=np.float32), ids)

    @property
    def count(self) -> int:
        return int(self.records.shape[0])

    @property
    def tokens(self) -> int:
        return int(self.records.shape[1])

    @property
    def dim(self) -> int:
        return int(self.records.shape[2])

    @property
    def shape(self) -> tuple[int, int]:
        """Per-record (tokens, dim)."""
        return self.tokens, self.dim

    @property
    def has_ids(self) -> bool:
        return self.ids is not None

    def __len__(self) -> int:
        return self.count

    def subset(self, indices) -> "EmbeddingStore":
        indices = np.asarray(indices, dtype=np.intp)
        ids = None if self.ids is None else self.ids[indices]
        return EmbeddingStore(self.records[indices], ids)

    def equals(self, other: "EmbeddingStore") -> bool:
        """Bitwise equality of shape, ids and record bytes."""
        if self.records.shape != other.records.shape or self.has_ids != other.has_ids:
            return False
        if self.has_ids and not np.array_equal(self.ids, other.ids):
            return False
        return self.records.tobytes() == other.records.tobytes()


@dataclass(frozen=True)
class GGEHeader:
    version: int
    count: int
    tokens: int
    dim: int
    flags: int

    @property
    def has_ids(self) -> bool:
        return bool(self.flags & GGE_FLAG_IDS)

    def expected_size(self) -> int:
        ids = self.count * GGE_ID_DTYPE.itemsize if self.has_ids else 0
        return HEADER_BYTES + ids + self.count * self.tokens * self.dim * GGE_VALUE_DTYPE.itemsize

    def to_dict(self) -> dict:
        return {
            "format": "GGE",
            "version": self.version,
            "count": self.count,
            "tokens": self.tokens,
            "dim": self.dim,
            "flags": self.flags,
            "ids": self.has_ids,
        }


def _parse_header(raw: bytes, path) -> GGEHeader:
    if len(raw) < HEADER_BYTES:
        raise TruncatedPayloadError(path, HEADER_BYTES, len(raw))
    h = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    if bytes(h["magic"]) != GGE_MAGIC:
        raise BadMagicError(f"{path}: bad magic {bytes(h['magic'])!r}, expected {GGE_MAGIC!r}")
    if int(h["version"]) != GGE_VERSION:
        raise VersionMismatchError(
            f"{path}: GGE version {int(h['version'])} is not supported (expected {GGE_VERSION})"
        )
    header = GGEHeader(
        version=int(h["version"]),
        count=int(h["count"]),
        tokens=int(h["tokens"]),
        dim=int(h["dim"]),
        flags=int(h["flags"]),
    )
    if header.flags & ~GGE_FLAG_IDS:
        raise FormatError(f"{path}: unknown flag bits 0x{header.flags:08x}")
    if header.tokens < 1 or header.dim < 1:
        raise FormatError(f"{path}: tokens and dim must be positive, got {header.tokens}x{header.dim}")
    if header.expected_size() > MAX_PAYLOAD_BYTES:
        raise ShapeOverflowError(
            f"{path}: {header.count}x{header.tokens}x{header.dim} records are not addressable"
        )
    return header


def read_header(path: Path) -> GGEHeader:
    """Read and validate only the fixed header of a GGE file."""
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read(HEADER_BYTES)
    return _parse_header(raw, path)


def read_gge(path: Path) -> EmbeddingStore:
    """Load an embedding store; every malformation is a distinct FormatError."""
    path = Path(path)
    raw = path.read_bytes()
    header = _parse_header(raw, path)

    expected = header.expected_size()
    if len(raw) < expected:
        raise TruncatedPayloadError(path, expected, len(raw))
    if len(raw) > expected:
        raise FormatError(f"{path}: {len(raw) - expected} trailing bytes after payload")

    offset = HEADER_BYTES
    ids = None
    if header.has_ids:
        ids = np.frombuffer(raw, dtype=GGE_ID_DTYPE, count=header.count, offset=offset)
        offset += header.count * GGE_ID_DTYPE.itemsize
    values = np.frombuffer(
        raw, dtype=GGE_VALUE_DTYPE, count=header.count * header.tokens * header.dim, offset=offset
    )
    records = values.astype(np.float32).reshape(header.count, header.tokens, header.dim)

    store = EmbeddingStore(records, None if ids is None else ids.astype(np.uint64))
    log.info(f"Read {path.name}: {store.count} records of {store.tokens}x{store.dim}"
             f"{' with ids' if store.has_ids else ''}")
    return store


def write_gge(store: EmbeddingStore, path: Path) -> None:
    path = Path(path)
    for name, value in (("count", store.count), ("tokens", store.tokens), ("dim", store.dim)):
        if value > U32_MAX:
            raise ShapeOverflowError(f"{name}={value} does not fit the GGE header")

    header = np.zeros(1, dtype=HEADER)
    header["magic"] = GGE_MAGIC
    header["version"] = GGE_VERSION
    header["count"] = store.count
    header["tokens"] = store.tokens
    header["dim"] = store.dim
    header["flags"] = GGE_FLAG_IDS if store.has_ids else 0

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        if store.has_ids:
            f.write(store.ids.astype(GGE_ID_DTYPE).tobytes())
        f.write(store.records.astype(GGE_VALUE_DTYPE).tobytes())
    log.info(f"Wrote {path.name}: {store.count} records of {store.tokens}x{store.dim}")
