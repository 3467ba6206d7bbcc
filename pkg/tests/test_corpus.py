import json
from datetime import date

import pytest

from stont.corpus import (
    Corpus,
    PaperRecord,
    harvest,
    load_corpus,
    parse_date,
    save_corpus,
)
from stont.errors import CorpusError, HarvestError


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")


def test_dedup_and_sort(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [
        {"corpus_id": 7, "title": "seven"},
        {"corpus_id": 3, "title": "three-first"},
        {"corpus_id": 3, "title": "three-second"},
    ])
    corpus = load_corpus(path)
    assert [p.corpus_id for p in corpus.papers] == [3, 7]
    assert corpus.papers[0].title == "three-first"  # first wins
    assert corpus.report["dedup"] == 1


def test_empty_file_errors(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("")
    with pytest.raises(CorpusError, match="zero valid records"):
        load_corpus(path)


def test_window_filter(tmp_path):
    path = tmp_path / "c.jsonl"
    records = [{"corpus_id": i, "title": f"t{i}", "published": "2022-01"}
               for i in range(1, 9)]
    records += [{"corpus_id": 9, "title": "t9", "published": "2020-05"},
                {"corpus_id": 10, "title": "t10", "published": "2020-06"}]
    write_jsonl(path, records)
    window = (date(2021, 10, 1), date(2022, 8, 31))
    corpus = load_corpus(path, window=window)
    assert len(corpus) == 8
    assert corpus.report["dropped_window"] == 2


def test_malformed_line_skip_vs_strict(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"corpus_id": 1, "title": "ok"}\nnot json\n')
    corpus = load_corpus(path)
    assert len(corpus) == 1 and corpus.report["malformed"] == 1
    with pytest.raises(CorpusError, match=":2"):
        load_corpus(path, strict=True)


def test_missing_file(tmp_path):
    with pytest.raises(CorpusError, match="not found"):
        load_corpus(tmp_path / "nope.jsonl")


def test_empty_title_rejected():
    with pytest.raises(CorpusError, match="empty title"):
        PaperRecord(corpus_id=1, title="   ")


def test_document_text():
    p = PaperRecord(corpus_id=1, title="A title", abstract="")
    assert p.document_text() == "A title"
    q = PaperRecord(corpus_id=2, title="A", abstract="b")
    assert q.document_text() == "A b"


def test_load_deterministic(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [{"corpus_id": i, "title": f"t{i}"} for i in (5, 2, 9)])
    out1, out2 = tmp_path / "o1.jsonl", tmp_path / "o2.jsonl"
    save_corpus(load_corpus(path), out1)
    save_corpus(load_corpus(path), out2)
    assert out1.read_bytes() == out2.read_bytes()


def test_corpus_invariants_enforced():
    with pytest.raises(CorpusError, match="ordered"):
        Corpus(papers=[PaperRecord(2, "b"), PaperRecord(1, "a")])
    with pytest.raises(CorpusError, match="duplicate"):
        Corpus(papers=[PaperRecord(1, "a"), PaperRecord(1, "b")])


def test_parse_date_precision():
    assert parse_date("2022") == date(2022, 1, 1)
    assert parse_date("2022-03") == date(2022, 3, 1)
    assert parse_date("2022-03-15") == date(2022, 3, 15)


# --- harvest --------------------------------------------------------------


class FakeResponse:
    def __init__(self, status_code, body=None):
        self.status_code = status_code
        self._body = body or {}

    def json(self):
        return self._body

    def raise_for_status(self):
        pass


class FakeSession:
    """Serves `records` in offset/limit pages, optionally throttling first."""

    def __init__(self, records, throttle_first=0):
        self.records = records
        self.throttle_remaining = throttle_first
        self.requests = 0

    def get(self, url, params=None, headers=None):
        self.requests += 1
        if self.throttle_remaining > 0:
            self.throttle_remaining -= 1
            return FakeResponse(429)
        offset = params["offset"]
        limit = params["limit"]
        page = self.records[offset : offset + limit]
        return FakeResponse(200, {"total": len(self.records), "data": page})

    def close(self):
        pass


def s2ag_records(n):
    return [{"corpusId": i + 1, "title": f"paper {i + 1}",
             "abstract": "", "fieldsOfStudy": ["Physics"],
             "publicationDate": "2022-01-01"} for i in range(n)]


def test_harvest_pagination():
    session = FakeSession(s2ag_records(25))
    corpus = harvest("http://example/api", page_size=10, session=session)
    assert len(corpus) == 25
    assert session.requests == 3


def test_harvest_backoff_on_throttle():
    session = FakeSession(s2ag_records(5), throttle_first=2)
    sleeps = []
    corpus = harvest("http://example/api", page_size=10, session=session,
                     sleep=sleeps.append)
    assert len(corpus) == 5
    assert corpus.report["backoffs"] == 2
    assert len(sleeps) == 2 and sleeps[1] > sleeps[0]


def test_harvest_gives_up_after_retries():
    session = FakeSession(s2ag_records(5), throttle_first=99)
    with pytest.raises(HarvestError, match="gave up"):
        harvest("http://example/api", page_size=10, session=session,
                max_retries=3, sleep=lambda s: None)


def test_harvest_idempotent_merge(tmp_path):
    path = tmp_path / "c.jsonl"
    for _ in range(2):
        harvest("http://example/api", page_size=10,
                session=FakeSession(s2ag_records(25)), corpus_path=path)
    first = path.read_bytes()
    harvest("http://example/api", page_size=10,
            session=FakeSession(s2ag_records(25)), corpus_path=path)
    assert path.read_bytes() == first
    assert len(load_corpus(path)) == 25


def test_harvest_drops_invalid_records():
    records = s2ag_records(3)
    records[1] = {"corpusId": None, "title": "no id"}
    corpus = harvest("http://example/api", page_size=10,
                     session=FakeSession(records))
    assert len(corpus) == 2
    assert corpus.report["dropped"] == 1


def test_harvest_auth_rejection():
    class AuthSession(FakeSession):
        def get(self, url, params=None, headers=None):
            return FakeResponse(403)

    with pytest.raises(HarvestError, match="authentication"):
        harvest("http://example/api", session=AuthSession([]))
