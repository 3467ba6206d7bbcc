import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stont.corpus import Corpus, PaperRecord
from stont.embedding_io import (
    EmbeddingMatrix,
    align,
    cosine,
    fnv1a64,
    read_matrix,
    write_matrix,
)
from stont.errors import AlignmentError, MatrixFormatError

from matrix_helpers import make_matrix


def test_fnv1a64_known_values():
    # reference values of the 64-bit FNV-1a parameters
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


def test_round_trip(tmp_path):
    m = make_matrix(np.arange(12).reshape(4, 3) + 1.0, ids=[5, 9, 12, 40])
    path = tmp_path / "m.stoemb"
    write_matrix(m, path)
    m2 = read_matrix(path)
    assert m2.ids == [5, 9, 12, 40]
    assert m2.kind == "document"
    assert np.array_equal(m.data, m2.data)
    # bit-exact: a second write produces identical bytes
    path2 = tmp_path / "m2.stoemb"
    write_matrix(m2, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_term_matrix_round_trip(tmp_path):
    m = make_matrix([[1, 2], [3, 4]], ids=["graphene", "deep learning"],
                    kind="term")
    path = tmp_path / "t.stoemb"
    write_matrix(m, path)
    m2 = read_matrix(path)
    assert m2.ids == ["graphene", "deep learning"]
    assert m2.kind == "term"


def test_corrupted_payload_detected(tmp_path):
    m = make_matrix(np.ones((4, 3)))
    path = tmp_path / "m.stoemb"
    write_matrix(m, path)
    blob = bytearray(path.read_bytes())
    blob[-12] ^= 0xFF  # a payload byte
    path.write_bytes(bytes(blob))
    with pytest.raises(MatrixFormatError, match="checksum"):
        read_matrix(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "m.stoemb"
    path.write_bytes(b"NOTMAGIC" + b"\0" * 32)
    with pytest.raises(MatrixFormatError, match="magic"):
        read_matrix(path)


def test_nan_rejected_naming_row():
    data = np.ones((3, 2), dtype="f4")
    data[1, 0] = np.nan
    m = EmbeddingMatrix(kind="document", ids=[1, 2, 3], data=data)
    with pytest.raises(MatrixFormatError, match="2"):
        m.validate()


def test_duplicate_ids_rejected():
    m = make_matrix(np.ones((3, 2)), ids=[1, 2, 2])
    with pytest.raises(MatrixFormatError, match="duplicate"):
        m.validate()


def test_zero_row_rejected():
    data = np.ones((3, 2))
    data[2] = 0.0
    m = make_matrix(data)
    with pytest.raises(MatrixFormatError, match="all-zero"):
        m.validate()


# --- cosine ---------------------------------------------------------------


def test_cosine_identical():
    assert cosine([2, 0, 1], [2, 0, 1]) == pytest.approx(1.0)


def test_cosine_orthogonal():
    assert cosine([1, 0], [0, 1]) == pytest.approx(0.0)


def test_cosine_hand_value():
    assert cosine([1, 0], [1, 1]) == pytest.approx(1 / np.sqrt(2), abs=1e-6)


def test_cosine_zero_norm_errors():
    with pytest.raises(ValueError, match="zero-norm"):
        cosine([0, 0], [1, 1])


@st.composite
def nonzero_vectors(draw, dim=4):
    vec = draw(st.lists(st.floats(-1e3, 1e3), min_size=dim, max_size=dim))
    if all(abs(x) < 1e-6 for x in vec):
        vec[0] = 1.0
    return vec


@given(u=nonzero_vectors(), v=nonzero_vectors(),
       alpha=st.floats(1e-3, 1e3))
@settings(max_examples=200)
def test_cosine_properties(u, v, alpha):
    c = cosine(u, v)
    assert -1.0 <= c <= 1.0
    assert cosine(v, u) == pytest.approx(c, abs=1e-12)
    scaled = [alpha * x for x in v]
    assert cosine(u, scaled) == pytest.approx(c, abs=1e-6)


# --- align ----------------------------------------------------------------


def _corpus(ids):
    return Corpus(papers=[PaperRecord(corpus_id=i, title=f"t{i}") for i in ids])


def test_align_identity():
    m = make_matrix(np.ones((3, 2)) + np.arange(3)[:, None], ids=[1, 2, 3])
    mapping, report = align(m, _corpus([1, 2, 3]))
    assert mapping == {1: 0, 2: 1, 3: 2}
    assert report["missing"] == [] and report["extra"] == []


def test_align_missing_fatal():
    m = make_matrix([[1.0], [2.0]], ids=[1, 2])
    with pytest.raises(AlignmentError) as err:
        align(m, _corpus([1, 2, 3]))
    assert err.value.missing == [3]


def test_align_skip_mode():
    m = make_matrix([[1.0], [2.0]], ids=[1, 2])
    mapping, report = align(m, _corpus([1, 2, 3]), skip_missing=True)
    assert len(mapping) == 2
    assert report["missing"] == [3]
