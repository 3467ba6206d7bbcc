"""Relational persistence of a topic net as CSV tables plus a manifest.

Files written into the snapshot directory:

    topic_nets.csv                     topic_net_id,created_on,status,year_month
    topic_nets_topics.csv              topic_id,topic_net_id,number,label,
                                       topic_weight,embedding,similar_topics
    topic_nets_topics_keywords.csv     topic_id,number,row,keyword,score
    papers_topics.csv                  corpus_id,topic_id,row,probability
    topic_nets_topics_edges.csv        topic_id1,topic_id2,edge_weight,str_of_col
    topic_nets_topics_similarities.csv topic_id1,topic_id2,similarity
    manifest.json                      row counts, FNV-1a checksums, hierarchy

Keyword and paper-topic rows are densely numbered per key, ordered by
increasing score / probability. The embedding cell is base64 of the
vector's float32 little-endian bytes; similar_topics is a JSON integer
array. Writes go to a temp directory first and move into place only after
every table serialized, so a failed persist leaves the target untouched.
"""

from __future__ import annotations

import base64
import csv
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from stont.embedding_io import fnv1a64
from stont.errors import StoreError
from stont.ontology import TopicEdge, TopicNet, TopicSimilarity
from stont.represent import Topic

TABLE_FILES = (
    "topic_nets.csv",
    "topic_nets_topics.csv",
    "topic_nets_topics_keywords.csv",
    "papers_topics.csv",
    "topic_nets_topics_edges.csv",
    "topic_nets_topics_similarities.csv",
)

HEADERS = {
    "topic_nets.csv": ["topic_net_id", "created_on", "status", "year_month"],
    "topic_nets_topics.csv": ["topic_id", "topic_net_id", "number", "label",
                              "topic_weight", "embedding", "similar_topics"],
    "topic_nets_topics_keywords.csv": ["topic_id", "number", "row", "keyword",
                                       "score"],
    "papers_topics.csv": ["corpus_id", "topic_id", "row", "probability"],
    "topic_nets_topics_edges.csv": ["topic_id1", "topic_id2", "edge_weight",
                                    "str_of_col"],
    "topic_nets_topics_similarities.csv": ["topic_id1", "topic_id2",
                                           "similarity"],
}


@dataclass
class RelationalSnapshot:
    tables: dict      # file name -> list of row dicts
    manifest: dict
    directory: str


def _encode_embedding(vec) -> str:
    return base64.b64encode(
        np.ascontiguousarray(vec, dtype="<f4").tobytes()
    ).decode("ascii")


def _decode_embedding(text: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype="<f4").astype(np.float32)


def _fmt(x: float) -> str:
    return repr(float(x))


def assign_main_topics(assignment, corpus) -> dict:
    """corpus_id -> topic_id of the paper's main topic (outlier pseudo-topic
    id 0 for outliers). Pure recomputation; deterministic."""
    out = {}
    for pid, label in zip(assignment.ids, assignment.labels):
        out[pid] = 0 if label == -1 else int(label) + 1
    for p in corpus.papers:
        if p.corpus_id not in out:
            raise StoreError(f"paper {p.corpus_id} has no cluster label")
    return out


def build_rows(net: TopicNet, memberships: dict) -> dict:
    """Materialize the six tables as lists of row dicts."""
    net.validate()
    number_to_id = {t.number: t.topic_id for t in net.topics}

    rows = {name: [] for name in TABLE_FILES}
    rows["topic_nets.csv"].append({
        "topic_net_id": net.topic_net_id,
        "created_on": net.created_on,
        "status": net.status,
        "year_month": net.year_month,
    })

    similar_of: dict = {t.topic_id: set() for t in net.topics}
    for s in net.similarities:
        similar_of[s.topic_id1].add(s.topic_id2)
        similar_of[s.topic_id2].add(s.topic_id1)

    for t in sorted(net.topics, key=lambda t: t.topic_id):
        rows["topic_nets_topics.csv"].append({
            "topic_id": t.topic_id,
            "topic_net_id": net.topic_net_id,
            "number": t.number,
            "label": t.label,
            "topic_weight": t.topic_weight,
            "embedding": _encode_embedding(t.embedding),
            "similar_topics": json.dumps(sorted(similar_of[t.topic_id])),
        })
        # keyword rows ordered by increasing score
        for row_no, (keyword, score) in enumerate(reversed(t.keywords), start=1):
            rows["topic_nets_topics_keywords.csv"].append({
                "topic_id": t.topic_id,
                "number": t.number,
                "row": row_no,
                "keyword": keyword,
                "score": _fmt(score),
            })

    for corpus_id in sorted(memberships):
        entries = memberships[corpus_id]
        ordered = sorted(entries, key=lambda e: (e[1], e[0]))
        for row_no, (number, prob) in enumerate(ordered, start=1):
            if number not in number_to_id:
                raise StoreError(f"membership references unknown topic "
                                 f"number {number}")
            rows["papers_topics.csv"].append({
                "corpus_id": corpus_id,
                "topic_id": number_to_id[number],
                "row": row_no,
                "probability": _fmt(prob),
            })

    for e in sorted(net.edges, key=lambda e: (e.topic_id1, e.topic_id2)):
        rows["topic_nets_topics_edges.csv"].append({
            "topic_id1": e.topic_id1,
            "topic_id2": e.topic_id2,
            "edge_weight": _fmt(e.edge_weight),
            "str_of_col": _fmt(e.str_of_col),
        })
    for s in sorted(net.similarities, key=lambda s: (s.topic_id1, s.topic_id2)):
        rows["topic_nets_topics_similarities.csv"].append({
            "topic_id1": s.topic_id1,
            "topic_id2": s.topic_id2,
            "similarity": _fmt(s.similarity),
        })
    return rows


def persist(net: TopicNet, memberships: dict, out_dir) -> RelationalSnapshot:
    """Write the snapshot atomically; net must be in status DONE."""
    if net.status != "DONE":
        raise StoreError(f"cannot persist net in status {net.status}")
    rows = build_rows(net, memberships)  # validates FKs before any write

    os.makedirs(out_dir, exist_ok=True)
    lock_path = os.path.join(out_dir, ".lock")
    try:
        lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StoreError(f"another writer holds {lock_path}") from None
    try:
        with tempfile.TemporaryDirectory(dir=out_dir) as tmp:
            manifest = {"tables": {}, "hierarchy": [
                [int(p), int(c)] for p, c in sorted(net.hierarchy)
            ]}
            for name in TABLE_FILES:
                path = os.path.join(tmp, name)
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    writer = csv.DictWriter(fh, fieldnames=HEADERS[name],
                                            lineterminator="\n")
                    writer.writeheader()
                    writer.writerows(rows[name])
                with open(path, "rb") as fh:
                    blob = fh.read()
                manifest["tables"][name] = {
                    "rows": len(rows[name]),
                    "checksum": f"{fnv1a64(blob):016x}",
                }
            with open(os.path.join(tmp, "manifest.json"), "w",
                      encoding="utf-8", newline="\n") as fh:
                json.dump(manifest, fh, indent=2, sort_keys=True)
                fh.write("\n")
            for name in list(TABLE_FILES) + ["manifest.json"]:
                os.replace(os.path.join(tmp, name), os.path.join(out_dir, name))
    finally:
        os.close(lock_fd)
        os.unlink(lock_path)
    return RelationalSnapshot(tables=rows, manifest=manifest,
                              directory=str(out_dir))


def load(directory):
    """Reload a snapshot: returns (TopicNet, memberships).

    Verifies the manifest checksums and foreign keys; memberships come
    back as corpus_id -> [(cluster number, probability)] in decreasing
    probability order.
    """
    manifest_path = os.path.join(directory, "manifest.json")
    if not os.path.exists(manifest_path):
        raise StoreError(f"missing manifest.json in {directory}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)

    tables = {}
    for name in TABLE_FILES:
        path = os.path.join(directory, name)
        if not os.path.exists(path):
            raise StoreError(f"missing table file {name}")
        with open(path, "rb") as fh:
            blob = fh.read()
        meta = manifest["tables"].get(name)
        if meta is None:
            raise StoreError(f"{name} absent from manifest")
        if f"{fnv1a64(blob):016x}" != meta["checksum"]:
            raise StoreError(f"checksum mismatch for {name}")
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != HEADERS[name]:
                raise StoreError(f"{name}: unexpected header {reader.fieldnames}")
            tables[name] = list(reader)
        if len(tables[name]) != meta["rows"]:
            raise StoreError(f"{name}: {len(tables[name])} rows, manifest "
                             f"says {meta['rows']}")

    net_row = tables["topic_nets.csv"][0]
    keywords_by_topic: dict = {}
    for row in tables["topic_nets_topics_keywords.csv"]:
        keywords_by_topic.setdefault(int(row["topic_id"]), []).append(
            (row["keyword"], float(row["score"]))
        )
    topics = []
    for row in tables["topic_nets_topics.csv"]:
        tid = int(row["topic_id"])
        kws = sorted(keywords_by_topic.get(tid, []),
                     key=lambda t: (-t[1], t[0]))
        topics.append(Topic(
            topic_id=tid,
            number=int(row["number"]),
            label=row["label"],
            topic_weight=int(row["topic_weight"]),
            embedding=_decode_embedding(row["embedding"]),
            keywords=kws,
        ))
    id_to_number = {t.topic_id: t.number for t in topics}

    edges = [TopicEdge(int(r["topic_id1"]), int(r["topic_id2"]),
                       float(r["edge_weight"]), float(r["str_of_col"]))
             for r in tables["topic_nets_topics_edges.csv"]]
    sims = [TopicSimilarity(int(r["topic_id1"]), int(r["topic_id2"]),
                            float(r["similarity"]))
            for r in tables["topic_nets_topics_similarities.csv"]]
    hierarchy = [(p, c) for p, c in manifest.get("hierarchy", [])]

    net = TopicNet(
        topic_net_id=int(net_row["topic_net_id"]),
        created_on=net_row["created_on"],
        year_month=net_row["year_month"],
        status=net_row["status"],
        topics=topics,
        edges=edges,
        similarities=sims,
        hierarchy=hierarchy,
    )
    net.validate()

    memberships: dict = {}
    for row in tables["papers_topics.csv"]:
        tid = int(row["topic_id"])
        if tid not in id_to_number:
            raise StoreError(f"papers_topics references unknown topic_id {tid}")
        memberships.setdefault(int(row["corpus_id"]), []).append(
            (id_to_number[tid], float(row["probability"]))
        )
    for pid in memberships:
        memberships[pid].sort(key=lambda e: (-e[1], e[0]))
    return net, memberships
