import os

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer

VOCAB = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + [
    "the", "a", "of", "deep", "learning", "neural", "network", "networks",
    "protein", "folding", "graphene", "lattice", "quantum", "computing",
    "paper", "study", "model", "topic", "science", "data", "##s", "##ing",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized sentence model saved locally, so the
    tests never touch the network."""
    d = tmp_path_factory.mktemp("tiny-model")
    torch.manual_seed(7)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(d)
    vocab_file = os.path.join(d, "vocab.txt")
    with open(vocab_file, "w", encoding="utf-8") as fh:
        fh.write("\n".join(VOCAB) + "\n")
    BertTokenizer(vocab_file).save_pretrained(d)
    return str(d)


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text(
        '{"corpus_id": 1, "title": "deep learning", "abstract": "neural networks"}\n'
        '{"corpus_id": 2, "title": "protein folding", "abstract": ""}\n'
        '{"corpus_id": 3, "title": "graphene lattice", "abstract": "quantum computing"}\n'
        '{"corpus_id": 4, "title": "topic model", "abstract": "science data"}\n'
        '{"corpus_id": 5, "title": "a study", "abstract": "the paper"}\n'
    )
    return path
