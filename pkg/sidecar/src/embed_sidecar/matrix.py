"""Writer for the pipeline's binary embedding-matrix format.

Layout (integers little-endian):

    magic "STOEMB01" (8 bytes)
    kind (1 byte: 0=document, 1=term)
    row count (u64)
    dim (u32)
    model-name length (u16) + UTF-8 name
    ids block: u64 per row for documents,
               u16 length + UTF-8 text per row for terms
    payload: rows * dim float32 values, row-major
    FNV-1a 64-bit checksum of the payload bytes (u64)

This module deliberately has no dependency on the consuming pipeline:
the byte layout is the contract.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"STOEMB01"
KIND_CODES = {"document": 0, "term": 1}

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def write_matrix(kind: str, ids: list, data: np.ndarray, model_name: str,
                 path) -> int:
    """Serialize a matrix; returns the payload checksum."""
    if kind not in KIND_CODES:
        raise ValueError(f"unknown matrix kind {kind!r}")
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 2 or data.shape[0] != len(ids):
        raise ValueError(f"{len(ids)} ids for data of shape {data.shape}")
    if not np.isfinite(data).all():
        raise ValueError("matrix contains non-finite values")
    payload = data.tobytes()
    checksum = fnv1a64(payload)
    name = model_name.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<B", KIND_CODES[kind]),
        struct.pack("<Q", len(ids)),
        struct.pack("<I", data.shape[1]),
        struct.pack("<H", len(name)),
        name,
    ]
    if kind == "term":
        for t in ids:
            b = str(t).encode("utf-8")
            parts.append(struct.pack("<H", len(b)))
            parts.append(b)
    else:
        parts.append(struct.pack(f"<{len(ids)}Q", *[int(i) for i in ids]))
    parts.append(payload)
    parts.append(struct.pack("<Q", checksum))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
    return checksum
