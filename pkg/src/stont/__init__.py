"""Topic-ontology construction toolkit.

Turns a corpus of scholarly records plus precomputed document embeddings
into a topic network: density-based clustering, class-based TF-IDF keyword
representation, semantic relations between topics, relational persistence,
and SKOS / graph-database exports.
"""

from stont.config import PipelineConfig
from stont.corpus import Corpus, PaperRecord, load_corpus
from stont.embedding_io import EmbeddingMatrix, cosine, read_matrix, write_matrix

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "EmbeddingMatrix",
    "PaperRecord",
    "PipelineConfig",
    "cosine",
    "load_corpus",
    "read_matrix",
    "write_matrix",
]
