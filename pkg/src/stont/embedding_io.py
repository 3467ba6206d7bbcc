"""Binary embedding-matrix format, validation, and cosine similarity.

The on-disk layout (all integers little-endian):

    magic "STOEMB01" (8 bytes)
    kind (1 byte: 0=document, 1=term, 2=reduced)
    row count (u64)
    dim (u32)
    model-name length (u16) + UTF-8 name
    ids block: u64 per row for document/reduced kinds,
               u16 length + UTF-8 text per row for term kind
    payload: rows * dim float32 values, row-major
    FNV-1a 64-bit checksum of the payload bytes (u64)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numba
import numpy as np

from stont.errors import AlignmentError, MatrixFormatError

MAGIC = b"STOEMB01"

KIND_CODES = {"document": 0, "term": 1, "reduced": 2}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)


@numba.njit(cache=True)
def _fnv1a64_loop(data, h):
    prime = _FNV_PRIME
    for i in range(data.shape[0]):
        h = (h ^ np.uint64(data[i])) * prime
    return h


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    arr = np.frombuffer(data, dtype=np.uint8)
    return int(_fnv1a64_loop(arr, _FNV_OFFSET))


@dataclass
class EmbeddingMatrix:
    """Dense float32 matrix binding row index to a document or term id."""

    kind: str
    ids: list
    data: np.ndarray
    model_name: str = ""
    checksum: int = field(default=0)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.checksum == 0:
            self.checksum = fnv1a64(self.data.tobytes())

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.data.shape[0]

    def row(self, key) -> np.ndarray:
        return self.data[self.ids.index(key)]

    def validate(self) -> None:
        if self.kind not in KIND_CODES:
            raise MatrixFormatError(f"unknown matrix kind {self.kind!r}")
        if len(self.ids) != self.data.shape[0]:
            raise MatrixFormatError(
                f"{len(self.ids)} ids for {self.data.shape[0]} rows"
            )
        if len(set(self.ids)) != len(self.ids):
            seen, dups = set(), []
            for i in self.ids:
                if i in seen:
                    dups.append(i)
                seen.add(i)
            raise MatrixFormatError(f"duplicate ids: {dups[:5]}")
        if self.data.ndim != 2 or self.data.shape[1] < 1:
            raise MatrixFormatError("matrix must be 2-d with positive dim")
        finite = np.isfinite(self.data)
        if not finite.all():
            bad = int(np.argwhere(~finite)[0][0])
            raise MatrixFormatError(
                f"non-finite value in row id {self.ids[bad]!r}"
            )
        norms = np.abs(self.data).sum(axis=1)
        if (norms == 0).any():
            bad = int(np.argmax(norms == 0))
            raise MatrixFormatError(f"all-zero row for id {self.ids[bad]!r}")


def write_matrix(matrix: EmbeddingMatrix, path) -> None:
    """Serialize a validated matrix to the binary format."""
    matrix.validate()
    payload = np.ascontiguousarray(matrix.data, dtype="<f4").tobytes()
    name = matrix.model_name.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<B", KIND_CODES[matrix.kind]),
        struct.pack("<Q", len(matrix.ids)),
        struct.pack("<I", matrix.dim),
        struct.pack("<H", len(name)),
        name,
    ]
    if matrix.kind == "term":
        for t in matrix.ids:
            b = str(t).encode("utf-8")
            parts.append(struct.pack("<H", len(b)))
            parts.append(b)
    else:
        parts.append(struct.pack(f"<{len(matrix.ids)}Q", *[int(i) for i in matrix.ids]))
    parts.append(payload)
    parts.append(struct.pack("<Q", fnv1a64(payload)))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_matrix(path) -> EmbeddingMatrix:
    """Load and fully validate a matrix file; verifies the payload checksum."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic header")
    off = 8
    (kind_code,) = struct.unpack_from("<B", blob, off)
    off += 1
    if kind_code not in KIND_NAMES:
        raise MatrixFormatError(f"{path}: unknown kind byte {kind_code}")
    (rows,) = struct.unpack_from("<Q", blob, off)
    off += 8
    (dim,) = struct.unpack_from("<I", blob, off)
    off += 4
    (name_len,) = struct.unpack_from("<H", blob, off)
    off += 2
    model_name = blob[off : off + name_len].decode("utf-8")
    off += name_len

    kind = KIND_NAMES[kind_code]
    ids: list = []
    if kind == "term":
        for _ in range(rows):
            (tl,) = struct.unpack_from("<H", blob, off)
            off += 2
            ids.append(blob[off : off + tl].decode("utf-8"))
            off += tl
    else:
        ids = list(struct.unpack_from(f"<{rows}Q", blob, off))
        off += 8 * rows

    payload_len = rows * dim * 4
    payload = blob[off : off + payload_len]
    if len(payload) != payload_len:
        raise MatrixFormatError(f"{path}: truncated payload")
    off += payload_len
    (stored,) = struct.unpack_from("<Q", blob, off)
    actual = fnv1a64(payload)
    if stored != actual:
        raise MatrixFormatError(
            f"{path}: checksum mismatch (stored {stored:#x}, computed {actual:#x})"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, dim).astype(np.float32)
    matrix = EmbeddingMatrix(kind=kind, ids=ids, data=data, model_name=model_name,
                             checksum=actual)
    matrix.validate()
    return matrix


def cosine(u, v) -> float:
    """Cosine similarity with 64-bit accumulation; errors on zero-norm input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All-pairs cosine similarity between rows of a and rows of b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    an = a / np.linalg.norm(a, axis=1, keepdims=True)
    bn = b / np.linalg.norm(b, axis=1, keepdims=True)
    return np.clip(an @ bn.T, -1.0, 1.0)


def align(matrix: EmbeddingMatrix, corpus, skip_missing: bool = False):
    """Map corpus_ids to matrix row indices.

    Returns (mapping, report) where mapping is {corpus_id: row_index}.
    Missing ids are fatal unless skip_missing; extra matrix rows are
    reported but never fatal.
    """
    index = {cid: i for i, cid in enumerate(matrix.ids)}
    corpus_ids = [p.corpus_id for p in corpus.papers]
    missing = [cid for cid in corpus_ids if cid not in index]
    extra = sorted(set(index) - set(corpus_ids))
    if missing and not skip_missing:
        raise AlignmentError(
            f"{len(missing)} corpus ids lack embedding rows "
            f"(first: {missing[:5]})",
            missing=missing,
            extra=extra,
        )
    mapping = {cid: index[cid] for cid in corpus_ids if cid in index}
    report = {"mapped": len(mapping), "missing": missing, "extra": extra}
    return mapping, report
