"""
Binary layout definitions for GlueNet files.

GGE (embedding store) and GGCK (checkpoint) headers are fixed little-endian
numpy record dtypes; readers and writers look them up by name so that both
sides agree on one definition.
"""
from __future__ import annotations

import numpy as np

GGE_MAGIC = b"GGEM"
GGE_VERSION = 1
GGE_FLAG_IDS = 0x1

GGCK_MAGIC = b"GGCK"
GGCK_VERSION = 1
DIGEST_BYTES = 32


# ============================================================================
# Embedding store
# ============================================================================

gge_header = np.dtype([
    ("magic", "S4"),
    ("version", "<u4"),
    ("count", "<u4"),
    ("tokens", "<u4"),
    ("dim", "<u4"),
    ("flags", "<u4"),
])

GGE_ID_DTYPE = np.dtype("<u8")
GGE_VALUE_DTYPE = np.dtype("<f4")


# ============================================================================
# Checkpoint
# ============================================================================

ggck_header = np.dtype([
    ("magic", "S4"),
    ("version", "<u4"),
    ("digest", "u1", (DIGEST_BYTES,)),
])

# Length prefixes and tensor block fields
LENGTH_DTYPE = np.dtype("<u8")
NAME_LENGTH_DTYPE = np.dtype("<u4")
RANK_DTYPE = np.dtype("<u4")
EXTENT_DTYPE = np.dtype("<u4")
TENSOR_VALUE_DTYPE = np.dtype("<f4")

U32_MAX = np.iinfo(np.uint32).max


SCHEMAS = {
    "gge_header": gge_header,
    "ggck_header": ggck_header,
}


def get_schema(name: str) -> np.dtype:
    """Get a binary header layout by name."""
    if name not in SCHEMAS:
        raise ValueError(f"Unknown schema: {name}. Available: {list(SCHEMAS.keys())}")
    return SCHEMAS[name]


__all__ = [
    "GGE_MAGIC",
    "GGE_VERSION",
    "GGE_FLAG_IDS",
    "GGCK_MAGIC",
    "GGCK_VERSION",
    "DIGEST_BYTES",
    "GGE_ID_DTYPE",
    "GGE_VALUE_DTYPE",
    "LENGTH_DTYPE",
    "NAME_LENGTH_DTYPE",
    "RANK_DTYPE",
    "EXTENT_DTYPE",
    "TENSOR_VALUE_DTYPE",
    "U32_MAX",
    "get_schema",
]
