"""Batch sentence-embedding encoder for the topic-ontology pipeline.

Reads a JSONL paper corpus or a newline-delimited term list, encodes the
texts with a sentence-transformer model, and emits the pipeline's binary
matrix format plus a JSON manifest.
"""

from embed_sidecar.encoder import encode_documents, encode_terms
from embed_sidecar.matrix import fnv1a64, write_matrix

__all__ = ["encode_documents", "encode_terms", "write_matrix", "fnv1a64"]
