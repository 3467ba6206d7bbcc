"""Topic representation: vocabulary, class-based TF-IDF, keyword diversity.

The class-based weight for term x in class c is

    w[x, c] = tf[x, c] * ln(1 + A / f[x])

with tf the in-class frequency, f the term's total frequency across all
classes, and A the average kept-token count per class. Natural log.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from stont.embedding_io import EmbeddingMatrix, cosine

_TOKEN_RE = re.compile(r"\w{2,}", re.UNICODE)


def load_stopwords() -> frozenset:
    text = resources.files("stont.data").joinpath("stopwords_en.txt").read_text()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


_STOPWORDS = load_stopwords()


def tokenize(text: str) -> list:
    """Lowercased word tokens of length >= 2, stopwords removed."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in _STOPWORDS]


def ngrams(tokens: list, n_max: int = 2) -> list:
    """Unigrams and bigrams over the stopword-filtered token sequence."""
    out = list(tokens)
    for n in range(2, n_max + 1):
        out.extend(
            " ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
        )
    return out


@dataclass
class Vocabulary:
    terms: list
    doc_frequency: dict
    source: str  # "frequency" or "keyword_extraction"

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty vocabulary (min_df too high?)")


def build_vocabulary(corpus, config, doc_matrix: EmbeddingMatrix | None = None,
                     term_matrix: EmbeddingMatrix | None = None) -> Vocabulary:
    """Build the topic vocabulary from the corpus.

    frequency mode: all uni/bigrams with document frequency >= min_df.
    keyword_extraction mode: per document, candidate n-grams are scored by
    cosine against the document embedding; the top 5 per document are
    pooled, then filtered by min_df.
    """
    min_df = config.vectorizer.min_df
    source = config.vectorizer.vocabulary_source
    doc_terms = [set(ngrams(tokenize(p.document_text()))) for p in corpus.papers]
    df = Counter()
    for terms in doc_terms:
        df.update(terms)

    if source == "frequency":
        kept = sorted(t for t, c in df.items() if c >= min_df)
        if not kept:
            raise ValueError(f"no term reaches min_df={min_df}")
        return Vocabulary(terms=kept, doc_frequency={t: df[t] for t in kept},
                          source=source)

    if doc_matrix is None or term_matrix is None:
        raise ValueError("keyword_extraction mode needs document and term matrices")
    term_index = {t: i for i, t in enumerate(term_matrix.ids)}
    pooled = set()
    for paper, candidates in zip(corpus.papers, doc_terms):
        doc_vec = doc_matrix.row(paper.corpus_id)
        scored = []
        for term in candidates:
            idx = term_index.get(term)
            if idx is None:
                continue
            scored.append((cosine(term_matrix.data[idx], doc_vec), term))
        scored.sort(key=lambda t: (-t[0], t[1]))
        pooled.update(term for _, term in scored[:5])
    kept = sorted(t for t in pooled if df[t] >= min_df)
    if not kept:
        raise ValueError(f"no extracted keyword reaches min_df={min_df}")
    return Vocabulary(terms=kept, doc_frequency={t: df[t] for t in kept},
                      source=source)


@dataclass
class CTfIdfModel:
    terms: list
    classes: list
    tf: np.ndarray       # terms x classes
    f: np.ndarray        # per-term total frequency
    avg_class_tokens: float
    weights: np.ndarray  # terms x classes

    def top_terms(self, cls, limit: int) -> list:
        """(term, weight) for one class, descending weight, ties lexicographic."""
        col = self.classes.index(cls)
        w = self.weights[:, col]
        order = sorted(range(len(self.terms)),
                       key=lambda i: (-w[i], self.terms[i]))
        return [(self.terms[i], float(w[i])) for i in order[:limit] if w[i] > 0]

    def weights_for_counts(self, counts: dict) -> list:
        """Class weights for an arbitrary token bag under this model's A and f."""
        out = []
        for i, term in enumerate(self.terms):
            tf = counts.get(term, 0)
            if tf:
                out.append((term, tf * math.log(1.0 + self.avg_class_tokens
                                                / self.f[i])))
        out.sort(key=lambda t: (-t[1], t[0]))
        return out


def class_token_bags(corpus, labels: dict, vocab: Vocabulary) -> dict:
    """Per-class Counter of vocabulary-term occurrences.

    labels maps corpus_id -> class key; documents of the same class pool
    their tokens.
    """
    bags: dict = {}
    vocab_set = set(vocab.terms)
    for paper in corpus.papers:
        cls = labels[paper.corpus_id]
        bag = bags.setdefault(cls, Counter())
        for term in ngrams(tokenize(paper.document_text())):
            if term in vocab_set:
                bag[term] += 1
    return bags


def c_tf_idf(vocab: Vocabulary, bags: dict) -> CTfIdfModel:
    """Class-based TF-IDF over concatenated per-class token bags."""
    if not bags:
        raise ValueError("need at least one class")
    classes = sorted(bags)
    for cls in classes:
        if sum(bags[cls].values()) == 0:
            raise ValueError(f"class {cls!r} has zero tokens")
    terms = list(vocab.terms)
    tf = np.zeros((len(terms), len(classes)))
    for j, cls in enumerate(classes):
        bag = bags[cls]
        for i, term in enumerate(terms):
            tf[i, j] = bag.get(term, 0)
    f = tf.sum(axis=1)
    total = tf.sum()
    avg = total / len(classes)
    with np.errstate(divide="ignore"):
        idf = np.log1p(np.where(f > 0, avg / np.where(f > 0, f, 1), 0.0))
    weights = tf * idf[:, None]
    return CTfIdfModel(terms=terms, classes=classes, tf=tf, f=f,
                       avg_class_tokens=float(avg), weights=weights)


def diversify(candidates: list, term_vectors: dict, topic_embedding,
              diversity: float, top_n: int) -> list:
    """Maximal-marginal-relevance reranking of keyword candidates.

    Iteratively picks the candidate maximizing
    (1 - diversity) * cosine(term, topic) -
    diversity * max cosine(term, already selected).
    Returns (term, mmr_score) sorted by descending score, ties
    lexicographic.
    """
    missing = [t for t in candidates if t not in term_vectors]
    if missing:
        raise ValueError(f"missing term embedding for {missing[:3]}")
    relevance = {t: cosine(term_vectors[t], topic_embedding) for t in candidates}
    selected: list = []
    remaining = list(candidates)
    while remaining and len(selected) < top_n:
        best_term, best_score = None, -np.inf
        for term in remaining:
            penalty = max(
                (cosine(term_vectors[term], term_vectors[s]) for s, _ in selected),
                default=0.0,
            )
            score = (1.0 - diversity) * relevance[term] - diversity * penalty
            if score > best_score or (score == best_score and term < best_term):
                best_term, best_score = term, score
        selected.append((best_term, best_score))
        remaining.remove(best_term)
    selected.sort(key=lambda t: (-t[1], t[0]))
    return selected


@dataclass
class Topic:
    topic_id: int
    number: int
    label: str
    topic_weight: int
    embedding: np.ndarray
    keywords: list = field(default_factory=list)  # (term, score) descending

    @staticmethod
    def make_label(number: int, keywords: list) -> str:
        head = [term for term, _ in keywords[:4]]
        return "_".join([str(number)] + head)


OUTLIER_LABEL = "-1_outliers"


def build_topics(assignment, model: CTfIdfModel, doc_matrix: EmbeddingMatrix,
                 config, term_matrix: EmbeddingMatrix | None = None) -> list:
    """One Topic per cluster plus the outlier pseudo-topic (number -1).

    Keywords come from the top 2 * top_n_words class-based TF-IDF terms,
    diversity-reranked when term embeddings are available. The topic
    embedding is the mean of member documents' original embeddings.
    topic_id = number + 1 so ids stay non-negative with the outlier at 0.
    """
    top_n = config.ctfidf.top_n_words
    diversity = config.ctfidf.diversity
    row_of = {pid: i for i, pid in enumerate(doc_matrix.ids)}
    term_vectors = None
    if term_matrix is not None:
        term_vectors = {t: term_matrix.data[i]
                        for i, t in enumerate(term_matrix.ids)}

    topics = []
    labels = assignment.labels
    data = np.asarray(doc_matrix.data, dtype=np.float64)
    for number in range(assignment.cluster_count):
        member_ids = [pid for pid, lab in zip(assignment.ids, labels)
                      if lab == number]
        rows = [row_of[pid] for pid in member_ids]
        embedding = data[rows].mean(axis=0)
        pool = (model.top_terms(number, 2 * top_n)
                if number in model.classes else [])
        if term_vectors is not None:
            candidates = [t for t, _ in pool if t in term_vectors]
            keywords = diversify(candidates, term_vectors, embedding,
                                 diversity, top_n)
        else:
            keywords = pool[:top_n]
        topics.append(Topic(
            topic_id=number + 1,
            number=number,
            label=Topic.make_label(number, keywords),
            topic_weight=len(member_ids),
            embedding=embedding,
            keywords=keywords,
        ))

    outlier_rows = [row_of[pid] for pid, lab in zip(assignment.ids, labels)
                    if lab == -1]
    outlier_emb = (data[outlier_rows].mean(axis=0) if outlier_rows
                   else np.zeros(data.shape[1]))
    topics.insert(0, Topic(
        topic_id=0,
        number=-1,
        label=OUTLIER_LABEL,
        topic_weight=len(outlier_rows),
        embedding=outlier_emb,
        keywords=[],
    ))
    return topics
