"""Load a paper corpus, inspect it, and round-trip an embedding matrix.

Run from the repository root:

    python3 demos/01_corpus_and_matrices.py
"""

import os
import tempfile

import numpy as np

from stont import load_corpus, read_matrix, write_matrix, cosine

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")


def main():
    # A corpus is a JSONL file, one paper per line, keyed by corpus_id.
    corpus = load_corpus(os.path.join(FIXTURES, "corpus_planted.jsonl"))
    print(f"loaded {len(corpus)} papers; report: {corpus.report}")
    first = corpus.papers[0]
    print(f"first paper {first.corpus_id}: {first.title[:60]}...")

    # Document embeddings travel in a checksummed binary matrix format.
    matrix = read_matrix(os.path.join(FIXTURES, "docs_planted.stoemb"))
    print(f"matrix: {len(matrix.ids)} rows x {matrix.data.shape[1]} dims, "
          f"model={matrix.model_name!r}")

    # Row ids are corpus ids, so documents and vectors stay aligned.
    v1, v2 = matrix.row(1), matrix.row(2)
    print(f"cosine(doc 1, doc 2) = {cosine(v1, v2):.4f}")

    # Writes are byte-reproducible: same matrix, same file, every time.
    with tempfile.TemporaryDirectory() as tmp:
        p1, p2 = os.path.join(tmp, "a.stoemb"), os.path.join(tmp, "b.stoemb")
        write_matrix(matrix, p1)
        write_matrix(read_matrix(p1), p2)
        with open(p1, "rb") as f1, open(p2, "rb") as f2:
            assert f1.read() == f2.read()
        print("write -> read -> write is bit-identical")

    # Corruption never passes silently: the payload is checksummed.
    data = matrix.data.copy()
    data[0, 0] = np.nan
    try:
        type(matrix)(kind="document", ids=matrix.ids, data=data).validate()
    except Exception as exc:
        print(f"validation rejects a NaN row as expected: {exc}")


if __name__ == "__main__":
    main()
