import json

import numpy as np
import pytest

from embed_sidecar.cli import main
from embed_sidecar.encoder import encode_documents, encode_terms
from embed_sidecar.matrix import fnv1a64, write_matrix


def test_fnv1a64_reference_values():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


def test_write_matrix_layout(tmp_path):
    path = tmp_path / "m.stoemb"
    data = np.arange(6, dtype=np.float32).reshape(2, 3) + 1.0
    write_matrix("document", [7, 9], data, "test-model", path)
    blob = path.read_bytes()
    assert blob[:8] == b"STOEMB01"
    assert blob[8] == 0  # document kind
    assert int.from_bytes(blob[9:17], "little") == 2
    assert int.from_bytes(blob[17:21], "little") == 3


def test_write_matrix_rejects_nan(tmp_path):
    data = np.ones((2, 2), dtype=np.float32)
    data[0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        write_matrix("document", [1, 2], data, "m", tmp_path / "x")


def test_encode_documents_shape_and_order(tiny_model_dir, corpus_file,
                                          tmp_path):
    out = tmp_path / "docs.stoemb"
    manifest = encode_documents(corpus_file, out, tiny_model_dir)
    assert manifest["document_count"] == 5
    assert manifest["dim"] == 32  # the loaded model's configured width
    blob = out.read_bytes()
    rows = int.from_bytes(blob[9:17], "little")
    dim = int.from_bytes(blob[17:21], "little")
    assert (rows, dim) == (5, 32)
    # manifest written alongside
    side = json.loads((tmp_path / "docs.stoemb.manifest.json").read_text())
    assert side["payload_checksum"] == manifest["payload_checksum"]


def test_encode_documents_deterministic(tiny_model_dir, corpus_file,
                                        tmp_path):
    p1, p2 = tmp_path / "a.stoemb", tmp_path / "b.stoemb"
    encode_documents(corpus_file, p1, tiny_model_dir)
    encode_documents(corpus_file, p2, tiny_model_dir)
    assert p1.read_bytes() == p2.read_bytes()


def test_encode_documents_empty_abstract_uses_title(tiny_model_dir,
                                                    tmp_path):
    solo = tmp_path / "solo.jsonl"
    solo.write_text('{"corpus_id": 2, "title": "protein folding"}\n')
    out = tmp_path / "solo.stoemb"
    manifest = encode_documents(solo, out, tiny_model_dir)
    assert manifest["document_count"] == 1


def test_encode_documents_rejects_empty_corpus(tiny_model_dir, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty corpus"):
        encode_documents(empty, tmp_path / "o", tiny_model_dir)


def test_encode_documents_rejects_duplicate_ids(tiny_model_dir, tmp_path):
    dup = tmp_path / "dup.jsonl"
    dup.write_text('{"corpus_id": 1, "title": "a b"}\n'
                   '{"corpus_id": 1, "title": "c d"}\n')
    with pytest.raises(ValueError, match="duplicate corpus_id"):
        encode_documents(dup, tmp_path / "o", tiny_model_dir)


def test_encode_terms(tiny_model_dir, tmp_path):
    terms = tmp_path / "terms.txt"
    terms.write_text("deep learning\nprotein folding\ngraphene\n")
    out = tmp_path / "terms.stoemb"
    manifest = encode_terms(terms, out, tiny_model_dir)
    assert manifest["document_count"] == 3
    blob = out.read_bytes()
    assert blob[8] == 1  # term kind


def test_encode_terms_duplicate_named(tiny_model_dir, tmp_path):
    terms = tmp_path / "terms.txt"
    terms.write_text("graphene\ngraphene\n")
    with pytest.raises(ValueError, match="graphene"):
        encode_terms(terms, tmp_path / "o", tiny_model_dir)


def test_cli_docs_and_exit_codes(tiny_model_dir, corpus_file, tmp_path,
                                 capsys):
    out = tmp_path / "docs.stoemb"
    assert main(["docs", "--corpus", str(corpus_file),
                 "--model", tiny_model_dir, "--out", str(out),
                 "--batch-size", "2"]) == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["dim"] == 32
    assert out.exists()
    assert main(["docs", "--corpus", str(tmp_path / "nope.jsonl"),
                 "--model", tiny_model_dir, "--out", str(out)]) == 2


def test_cli_terms(tiny_model_dir, tmp_path):
    terms = tmp_path / "terms.txt"
    terms.write_text("deep\nlearning\n")
    out = tmp_path / "t.stoemb"
    assert main(["terms", "--terms", str(terms),
                 "--model", tiny_model_dir, "--out", str(out)]) == 0
    assert out.exists()


# --- conformance with the consuming pipeline (file-format contract) --------


def test_acceptance_sidecar_conformance(tiny_model_dir, corpus_file,
                                        tmp_path):
    """Emitted matrices load through the consumer's reader, match the
    model width, re-encode bit-identically, and embed near-duplicate
    texts almost identically."""
    stont = pytest.importorskip("stont")
    from stont.embedding_io import cosine, read_matrix

    out = tmp_path / "docs.stoemb"
    manifest = encode_documents(corpus_file, out, tiny_model_dir)
    matrix = read_matrix(out)  # validates checksum, ids, finiteness
    assert matrix.kind == "document"
    assert matrix.ids == [1, 2, 3, 4, 5]
    assert matrix.dim == manifest["dim"]

    again = tmp_path / "again.stoemb"
    encode_documents(corpus_file, again, tiny_model_dir)
    assert out.read_bytes() == again.read_bytes()

    # a term equal to a document's full text embeds near-identically
    terms = tmp_path / "terms.txt"
    terms.write_text("deep learning neural networks\n")
    tout = tmp_path / "terms.stoemb"
    encode_terms(terms, tout, tiny_model_dir)
    term_matrix = read_matrix(tout)
    sim = cosine(term_matrix.data[0], matrix.row(1))
    assert sim > 0.95
    print("[PASS] sidecar conformance: reader validation, dim, "
          "determinism, near-duplicate cosine")
