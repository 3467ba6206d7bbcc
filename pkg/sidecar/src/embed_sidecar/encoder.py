"""Encode corpus documents and vocabulary terms with a sentence model."""

from __future__ import annotations

import json
import time

import numpy as np

from embed_sidecar.matrix import fnv1a64, write_matrix

DEFAULT_MODEL = "paraphrase-MiniLM-L12-v2"


def _load_model(model_name: str):
    import torch
    from sentence_transformers import SentenceTransformer

    torch.manual_seed(0)
    model = SentenceTransformer(model_name, device="cpu")
    model.eval()
    return model


def _read_corpus(corpus_path):
    """Yield (corpus_id, text) in file order; text is title + abstract."""
    docs = []
    with open(corpus_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                corpus_id = int(record["corpus_id"])
                title = str(record["title"]).strip()
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{corpus_path}:{line_no}: bad record "
                                 f"({exc})") from None
            if not title:
                raise ValueError(f"{corpus_path}:{line_no}: empty title")
            abstract = str(record.get("abstract") or "").strip()
            docs.append((corpus_id, f"{title} {abstract}".strip()))
    if not docs:
        raise ValueError(f"{corpus_path}: empty corpus")
    ids = [cid for cid, _ in docs]
    if len(set(ids)) != len(ids):
        raise ValueError(f"{corpus_path}: duplicate corpus_id")
    return docs


def _read_terms(terms_path):
    terms = []
    seen = set()
    with open(terms_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            term = line.rstrip("\n")
            if not term.strip():
                continue
            if term in seen:
                raise ValueError(f"{terms_path}:{line_no}: duplicate term "
                                 f"{term!r}")
            seen.add(term)
            terms.append(term)
    if not terms:
        raise ValueError(f"{terms_path}: empty term file")
    return terms


def _encode(model, texts: list, batch_size: int) -> np.ndarray:
    import torch

    with torch.no_grad():
        vectors = model.encode(texts, batch_size=batch_size,
                               convert_to_numpy=True,
                               show_progress_bar=False)
    return np.ascontiguousarray(vectors, dtype=np.float32)


def _manifest(model_name, model, input_blob, count, dim, checksum) -> dict:
    return {
        "model_name": model_name,
        "input_checksum": f"{fnv1a64(input_blob):016x}",
        "document_count": count,
        "dim": dim,
        "payload_checksum": f"{checksum:016x}",
        "max_seq_length": getattr(model, "max_seq_length", None),
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def _write_manifest(manifest: dict, matrix_path) -> str:
    path = f"{matrix_path}.manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def encode_documents(corpus_path, out_path, model_name: str = DEFAULT_MODEL,
                     batch_size: int = 32) -> dict:
    """Encode every corpus document (title + abstract) in file order."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    docs = _read_corpus(corpus_path)
    model = _load_model(model_name)
    vectors = _encode(model, [text for _, text in docs], batch_size)
    checksum = write_matrix("document", [cid for cid, _ in docs], vectors,
                            model_name, out_path)
    with open(corpus_path, "rb") as fh:
        input_blob = fh.read()
    manifest = _manifest(model_name, model, input_blob, len(docs),
                         vectors.shape[1], checksum)
    _write_manifest(manifest, out_path)
    return manifest


def encode_terms(terms_path, out_path, model_name: str = DEFAULT_MODEL,
                 batch_size: int = 32) -> dict:
    """Encode one term per input line into a term-kind matrix."""
    terms = _read_terms(terms_path)
    model = _load_model(model_name)
    vectors = _encode(model, terms, batch_size)
    checksum = write_matrix("term", terms, vectors, model_name, out_path)
    with open(terms_path, "rb") as fh:
        input_blob = fh.read()
    manifest = _manifest(model_name, model, input_blob, len(terms),
                         vectors.shape[1], checksum)
    _write_manifest(manifest, out_path)
    return manifest
