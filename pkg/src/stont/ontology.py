"""Topic-network construction: semantic relations, hierarchy, queries.

Four relation kinds: near-identical topics (cosine of topic embeddings at
a threshold), shared-article edges weighted by membership probabilities,
a super-topic hierarchy from agglomerative merging, and top-x similar
topics for a keyword (query only, never persisted).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from stont.embedding_io import EmbeddingMatrix, cosine, cosine_matrix
from stont.represent import CTfIdfModel, Topic

log = logging.getLogger(__name__)

STATUSES = ("NEW", "BUILDING", "DONE", "FAILED")
_TRANSITIONS = {"NEW": {"BUILDING"}, "BUILDING": {"DONE", "FAILED"},
                "DONE": set(), "FAILED": set()}


@dataclass(frozen=True)
class TopicEdge:
    topic_id1: int
    topic_id2: int
    edge_weight: float
    str_of_col: float

    def __post_init__(self):
        if not self.topic_id1 < self.topic_id2:
            raise ValueError("edge endpoints must satisfy topic_id1 < topic_id2")


@dataclass(frozen=True)
class TopicSimilarity:
    topic_id1: int
    topic_id2: int
    similarity: float

    def __post_init__(self):
        if not self.topic_id1 < self.topic_id2:
            raise ValueError("endpoints must satisfy topic_id1 < topic_id2")


@dataclass
class TopicNet:
    topic_net_id: int
    created_on: str          # RFC 3339 UTC
    year_month: str          # "YYYY-MM"
    status: str = "NEW"
    topics: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    similarities: list = field(default_factory=list)
    hierarchy: list = field(default_factory=list)  # (parent topic_id, child topic_id)

    def set_status(self, new: str) -> None:
        if new not in STATUSES:
            raise ValueError(f"unknown status {new!r}")
        if new not in _TRANSITIONS[self.status]:
            raise ValueError(f"illegal status transition {self.status} -> {new}")
        self.status = new

    def topic_by_id(self, topic_id: int) -> Topic:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise KeyError(topic_id)

    def validate(self) -> None:
        ids = [t.topic_id for t in self.topics]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate topic_id in net")
        known = set(ids)
        for e in self.edges:
            if e.topic_id1 not in known or e.topic_id2 not in known:
                raise ValueError(f"edge references unknown topic: {e}")
        for s in self.similarities:
            if s.topic_id1 not in known or s.topic_id2 not in known:
                raise ValueError(f"similarity references unknown topic: {s}")
        parents: dict = {}
        for parent, child in self.hierarchy:
            if parent not in known or child not in known:
                raise ValueError(f"hierarchy references unknown topic "
                                 f"({parent}, {child})")
            if child in parents:
                raise ValueError(f"topic {child} has two parents")
            parents[child] = parent
        # cycle check: walking up from any node must terminate
        for start in parents:
            seen = set()
            node = start
            while node in parents:
                if node in seen:
                    raise ValueError("hierarchy contains a cycle")
                seen.add(node)
                node = parents[node]


def real_topics(topics: list) -> list:
    return [t for t in topics if t.number >= 0]


def related_identical(topics: list, threshold: float) -> list:
    """All unordered pairs of topics whose embedding cosine reaches the
    threshold; the outlier pseudo-topic is excluded."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    reals = real_topics(topics)
    out = []
    if len(reals) < 2:
        return out
    emb = np.stack([t.embedding for t in reals])
    sims = cosine_matrix(emb, emb)
    for i in range(len(reals)):
        for j in range(i + 1, len(reals)):
            if sims[i, j] >= threshold:
                a, b = sorted((reals[i].topic_id, reals[j].topic_id))
                out.append(TopicSimilarity(a, b, float(sims[i, j])))
    return out


def strength_of_collaboration(edge_weight: float, weight1: int,
                              weight2: int) -> float:
    """Harmonic mean of the edge weight normalized by each topic weight;
    algebraically 2 * w / (t1 + t2)."""
    if weight1 + weight2 <= 0:
        return 0.0
    return 2.0 * edge_weight / (weight1 + weight2)


def common_article_edges(memberships: dict, topics: list) -> list:
    """Edges between topic pairs sharing papers in the membership table.

    edge_weight sums prob(paper, a) + prob(paper, b) over shared papers.
    Strength values outside [0, 1] are clamped and logged.
    """
    by_number = {t.number: t for t in real_topics(topics)}
    acc: dict = {}
    for pid, entries in memberships.items():
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                (na, pa), (nb, pb) = entries[i], entries[j]
                if na not in by_number or nb not in by_number:
                    raise ValueError(f"membership references unknown topic "
                                     f"number {na if na not in by_number else nb}")
                ta, tb = by_number[na].topic_id, by_number[nb].topic_id
                key = (min(ta, tb), max(ta, tb))
                acc[key] = acc.get(key, 0.0) + pa + pb
    edges = []
    by_id = {t.topic_id: t for t in real_topics(topics)}
    for (a, b) in sorted(acc):
        w = acc[(a, b)]
        s = strength_of_collaboration(w, by_id[a].topic_weight,
                                      by_id[b].topic_weight)
        if not 0.0 <= s <= 1.0:
            log.warning("str_of_col %.4f outside [0,1] for edge (%d,%d); "
                        "clamping", s, a, b)
            s = min(max(s, 0.0), 1.0)
        edges.append(TopicEdge(a, b, w, s))
    return edges


def super_topics(topics: list, hierarchy_floor: float = 0.5,
                 model: CTfIdfModel | None = None, top_n: int = 30):
    """Agglomerative super-topic hierarchy (average linkage, cosine).

    Merging stops when the closest pair's average cosine similarity drops
    below ``hierarchy_floor``. Each merge spawns a meta-topic whose
    keywords are the class-based TF-IDF of the union of member documents
    (when a model is supplied) and whose label follows the 4-keyword rule.
    Returns (meta_topics, hierarchy edges (parent_id, child_id)).
    """
    reals = real_topics(topics)
    if len(reals) < 2:
        return [], []
    next_id = max(t.topic_id for t in topics) + 1
    next_number = max(t.number for t in topics) + 1

    # active cluster: (representative topic_id, member base indices)
    active = {i: {"rep": t.topic_id, "members": [i]} for i, t in enumerate(reals)}
    emb = np.stack([t.embedding for t in reals])
    sims = cosine_matrix(emb, emb)
    meta, hierarchy = [], []
    next_key = len(reals)
    while len(active) > 1:
        best = None
        keys = sorted(active)
        for ai in range(len(keys)):
            for bi in range(ai + 1, len(keys)):
                a, b = keys[ai], keys[bi]
                pairs = [sims[i, j] for i in active[a]["members"]
                         for j in active[b]["members"]]
                link = float(np.mean(pairs))
                if best is None or link > best[0]:
                    best = (link, a, b)
        link, a, b = best
        if link < hierarchy_floor:
            break
        members = sorted(active[a]["members"] + active[b]["members"])
        weights = np.array([reals[i].topic_weight for i in members], dtype=float)
        if weights.sum() == 0:
            weights = np.ones(len(members))
        merged_emb = np.average(emb[members], axis=0, weights=weights)
        keywords = []
        if model is not None:
            counts: dict = {}
            for i in members:
                if reals[i].number not in model.classes:
                    continue
                col = model.classes.index(reals[i].number)
                for ti, term in enumerate(model.terms):
                    tf = model.tf[ti, col]
                    if tf:
                        counts[term] = counts.get(term, 0) + tf
            keywords = model.weights_for_counts(counts)[:top_n]
        topic = Topic(
            topic_id=next_id,
            number=next_number,
            label=Topic.make_label(next_number, keywords),
            topic_weight=int(sum(reals[i].topic_weight for i in members)),
            embedding=merged_emb,
            keywords=keywords,
        )
        meta.append(topic)
        hierarchy.append((next_id, active[a]["rep"]))
        hierarchy.append((next_id, active[b]["rep"]))
        del active[a], active[b]
        active[next_key] = {"rep": next_id, "members": members}
        next_key += 1
        next_id += 1
        next_number += 1
    return meta, hierarchy


def n_similar_topics(keyword: str, x: int, topics: list,
                     term_matrix: EmbeddingMatrix) -> list:
    """Top x topics by cosine between the keyword's embedding and topic
    embeddings; (topic_id, label, similarity), ties to the smaller id."""
    if x < 1:
        raise ValueError("x must be >= 1")
    if keyword not in term_matrix.ids:
        raise ValueError(f"keyword {keyword!r} has no embedding in the "
                         f"term matrix")
    vec = term_matrix.row(keyword)
    scored = []
    for t in real_topics(topics):
        scored.append((t.topic_id, t.label, cosine(vec, t.embedding)))
    scored.sort(key=lambda r: (-r[2], r[0]))
    return scored[:x]
