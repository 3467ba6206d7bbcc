"""Paper-metadata corpus: JSONL loading, validation, dedup, and harvesting.

A corpus file is UTF-8 JSONL, one record per line, with fields
corpus_id, title, abstract, fields_of_study, published, source_url.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from datetime import date

import requests

from stont.errors import CorpusError, HarvestError

log = logging.getLogger(__name__)


def parse_date(text: str) -> date:
    """Parse YYYY, YYYY-MM, or YYYY-MM-DD into a date (missing parts -> 1)."""
    parts = str(text).split("-")
    year = int(parts[0])
    month = int(parts[1]) if len(parts) > 1 else 1
    day = int(parts[2]) if len(parts) > 2 else 1
    return date(year, month, day)


@dataclass(frozen=True)
class PaperRecord:
    """One scholarly article's metadata."""

    corpus_id: int
    title: str
    abstract: str = ""
    fields_of_study: tuple = ()
    published: date | None = None
    source_url: str = ""

    def __post_init__(self):
        if not str(self.title).strip():
            raise CorpusError(f"record {self.corpus_id}: empty title")

    def document_text(self) -> str:
        """Text unit consumed by embedding and vocabulary building."""
        return f"{self.title} {self.abstract}".strip()


@dataclass
class Corpus:
    """Immutable ordered collection of papers, sorted by corpus_id."""

    papers: list
    window: tuple | None = None
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [p.corpus_id for p in self.papers]
        if ids != sorted(ids):
            raise CorpusError("corpus not ordered by corpus_id")
        if len(set(ids)) != len(ids):
            raise CorpusError("duplicate corpus_id in corpus")
        if self.window is not None:
            lo, hi = self.window
            for p in self.papers:
                if p.published is not None and not (lo <= p.published <= hi):
                    raise CorpusError(
                        f"record {p.corpus_id} dated {p.published} "
                        f"outside window {lo}..{hi}"
                    )

    def __len__(self):
        return len(self.papers)

    def ids(self) -> list:
        return [p.corpus_id for p in self.papers]


def _record_from_json(obj: dict) -> PaperRecord:
    if "corpus_id" not in obj or "title" not in obj:
        raise CorpusError("missing mandatory field corpus_id or title")
    published = obj.get("published")
    return PaperRecord(
        corpus_id=int(obj["corpus_id"]),
        title=str(obj["title"]),
        abstract=str(obj.get("abstract") or ""),
        fields_of_study=tuple(obj.get("fields_of_study") or ()),
        published=parse_date(published) if published else None,
        source_url=str(obj.get("source_url") or ""),
    )


def load_corpus(path, window=None, strict: bool = False) -> Corpus:
    """Load a JSONL corpus file.

    Duplicates collapse first-wins; records outside ``window`` (a pair of
    inclusive dates) are dropped. Malformed lines are skipped with a log
    message unless ``strict``, in which case they abort with the line
    number. Raises on zero valid records.
    """
    if not os.path.exists(path):
        raise CorpusError(f"corpus file not found: {path}")
    seen: dict = {}
    malformed = dropped = dedup = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = _record_from_json(json.loads(line))
            except (json.JSONDecodeError, CorpusError, ValueError) as exc:
                if strict:
                    raise CorpusError(f"{path}:{lineno}: {exc}") from exc
                log.warning("%s:%d: skipping malformed line (%s)", path, lineno, exc)
                malformed += 1
                continue
            if window is not None and record.published is not None:
                lo, hi = window
                if not (lo <= record.published <= hi):
                    dropped += 1
                    continue
            if record.corpus_id in seen:
                dedup += 1
                continue
            seen[record.corpus_id] = record
    if not seen:
        raise CorpusError(f"{path}: zero valid records")
    papers = [seen[cid] for cid in sorted(seen)]
    report = {
        "kept": len(papers),
        "dropped_window": dropped,
        "dedup": dedup,
        "malformed": malformed,
    }
    return Corpus(papers=papers, window=window, report=report)


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus back to JSONL, deterministically ordered by corpus_id."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in corpus.papers:
            obj = {
                "corpus_id": p.corpus_id,
                "title": p.title,
                "abstract": p.abstract,
                "fields_of_study": list(p.fields_of_study),
                "published": p.published.isoformat() if p.published else None,
                "source_url": p.source_url,
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


API_KEY_ENV = "STONT_API_KEY"


def harvest(
    endpoint: str,
    fields_of_study: str = "",
    date_range: str = "",
    page_size: int = 100,
    corpus_path=None,
    session=None,
    max_records: int | None = None,
    max_retries: int = 5,
    min_interval: float = 0.0,
    backoff_base: float = 0.5,
    sleep=time.sleep,
) -> Corpus:
    """Paginate an S2AG-style REST endpoint into a Corpus.

    Merges idempotently into ``corpus_path`` when that file already exists
    (dedup by corpus_id, first-wins with on-disk records first). Throttle
    responses (HTTP 429) back off exponentially; persistent failures raise
    HarvestError. The API key, when needed, comes from the STONT_API_KEY
    environment variable.
    """
    if page_size < 1:
        raise HarvestError("page_size must be >= 1")
    own_session = session is None
    session = session or requests.Session()
    headers = {}
    api_key = os.environ.get(API_KEY_ENV)
    if api_key:
        headers["x-api-key"] = api_key

    records: list = []
    dropped = 0
    backoffs = 0
    offset = 0
    last_request = 0.0
    try:
        while True:
            params = {
                "fields": "corpusId,title,abstract,fieldsOfStudy,publicationDate,url",
                "offset": offset,
                "limit": page_size,
            }
            if fields_of_study:
                params["fieldsOfStudy"] = fields_of_study
            if date_range:
                params["publicationDateOrYear"] = date_range

            attempt = 0
            while True:
                if min_interval > 0:
                    wait = last_request + min_interval - time.monotonic()
                    if wait > 0:
                        sleep(wait)
                last_request = time.monotonic()
                try:
                    resp = session.get(endpoint, params=params, headers=headers)
                except requests.RequestException as exc:
                    attempt += 1
                    if attempt > max_retries:
                        raise HarvestError(f"network failure: {exc}") from exc
                    sleep(backoff_base * 2 ** (attempt - 1))
                    continue
                if resp.status_code in (401, 403):
                    raise HarvestError(f"authentication rejected ({resp.status_code})")
                if resp.status_code == 429 or resp.status_code >= 500:
                    attempt += 1
                    backoffs += 1
                    if attempt > max_retries:
                        raise HarvestError(
                            f"gave up after {max_retries} retries "
                            f"(last status {resp.status_code})"
                        )
                    delay = backoff_base * 2 ** (attempt - 1)
                    log.warning("throttled (%d); backing off %.2fs",
                                resp.status_code, delay)
                    sleep(delay)
                    continue
                resp.raise_for_status()
                break

            body = resp.json()
            page = body.get("data", [])
            for raw in page:
                try:
                    records.append(_normalize_s2ag(raw))
                except CorpusError as exc:
                    log.warning("dropping harvested record: %s", exc)
                    dropped += 1
            offset += len(page)
            if max_records is not None and offset >= max_records:
                break
            if len(page) < page_size:
                break
    finally:
        if own_session:
            session.close()

    merged: dict = {}
    if corpus_path and os.path.exists(corpus_path):
        for p in load_corpus(corpus_path).papers:
            merged[p.corpus_id] = p
    for r in records:
        merged.setdefault(r.corpus_id, r)
    if not merged:
        raise HarvestError("harvest produced zero valid records")
    corpus = Corpus(
        papers=[merged[cid] for cid in sorted(merged)],
        report={"harvested": len(records), "dropped": dropped,
                "backoffs": backoffs, "total": len(merged)},
    )
    if corpus_path:
        save_corpus(corpus, corpus_path)
    return corpus


def _normalize_s2ag(raw: dict) -> PaperRecord:
    if raw.get("corpusId") is None or not str(raw.get("title") or "").strip():
        raise CorpusError(f"missing corpusId/title in {raw!r}")
    published = raw.get("publicationDate") or raw.get("year")
    return PaperRecord(
        corpus_id=int(raw["corpusId"]),
        title=str(raw["title"]),
        abstract=str(raw.get("abstract") or ""),
        fields_of_study=tuple(raw.get("fieldsOfStudy") or ()),
        published=parse_date(published) if published else None,
        source_url=str(raw.get("url") or ""),
    )
