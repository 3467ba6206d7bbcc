import math
from collections import Counter

import numpy as np
import pytest

from stont.config import PipelineConfig
from stont.corpus import Corpus, PaperRecord
from stont.represent import (
    Topic,
    build_topics,
    build_vocabulary,
    c_tf_idf,
    class_token_bags,
    diversify,
    ngrams,
    tokenize,
)
from stont.cluster import ClusterAssignment

from matrix_helpers import make_matrix


def corpus_of(titles):
    return Corpus(papers=[PaperRecord(corpus_id=i + 1, title=t)
                          for i, t in enumerate(titles)])


def config(min_df=1, source="frequency"):
    cfg = PipelineConfig()
    cfg.vectorizer.min_df = min_df
    cfg.vectorizer.vocabulary_source = source
    return cfg


# --- tokenization and vocabulary ------------------------------------------


def test_tokenize_drops_stopwords_and_short_tokens():
    assert tokenize("The deep learning of a protein!") == ["deep", "learning",
                                                           "protein"]


def test_ngrams_include_bigrams():
    assert ngrams(["deep", "learning", "protein"]) == [
        "deep", "learning", "protein", "deep learning", "learning protein",
    ]


def test_vocabulary_min_df_inclusion():
    titles = ["graphene lattice"] * 20
    vocab = build_vocabulary(corpus_of(titles), config(min_df=10))
    assert "graphene" in vocab.terms
    assert vocab.doc_frequency["graphene"] == 20


def test_vocabulary_min_df_exclusion():
    titles = ["graphene lattice"] * 9 + ["carbon fiber"] * 10
    vocab = build_vocabulary(corpus_of(titles), config(min_df=10))
    assert "graphene" not in vocab.terms
    assert "carbon" in vocab.terms


def test_vocabulary_empty_errors():
    with pytest.raises(ValueError, match="min_df"):
        build_vocabulary(corpus_of(["unique words here"]), config(min_df=5))


def test_keyword_mode_never_scores_stopwords():
    # "the" is filtered by tokenization before scoring, so it can never
    # outrank a content bigram no matter its embedding
    titles = ["deep learning for protein folding"] * 3
    corpus = corpus_of(titles)
    terms = ["deep learning", "protein folding", "deep", "learning",
             "protein", "folding"]
    rng = np.random.default_rng(0)
    doc_m = make_matrix(rng.normal(size=(3, 8)), ids=[1, 2, 3])
    term_m = make_matrix(rng.normal(size=(len(terms), 8)), ids=terms,
                         kind="term")
    vocab = build_vocabulary(corpus, config(min_df=1, source="keyword_extraction"),
                             doc_matrix=doc_m, term_matrix=term_m)
    assert "the" not in vocab.terms
    assert set(vocab.terms) <= set(terms)


# --- c-TF-IDF -------------------------------------------------------------


def toy_model():
    vocab_terms = ["apple", "car", "pear"]
    vocab = type("V", (), {"terms": vocab_terms})()
    bags = {
        "class1": Counter({"apple": 2, "pear": 1}),
        "class2": Counter({"apple": 1, "car": 2}),
    }
    return c_tf_idf(vocab, bags)


def test_ctfidf_worked_example_apple():
    model = toy_model()
    assert model.avg_class_tokens == pytest.approx(3.0)
    w = model.weights[model.terms.index("apple"), model.classes.index("class1")]
    assert w == pytest.approx(2 * math.log(2), abs=1e-9)


def test_ctfidf_worked_example_car():
    model = toy_model()
    w = model.weights[model.terms.index("car"), model.classes.index("class2")]
    assert w == pytest.approx(2 * math.log(2.5), abs=1e-9)


def test_ctfidf_zero_tf_gives_zero_weight():
    model = toy_model()
    assert model.weights[model.terms.index("car"),
                         model.classes.index("class1")] == 0.0
    assert model.weights[model.terms.index("pear"),
                         model.classes.index("class2")] == 0.0


def test_ctfidf_requires_nonempty_class():
    vocab = type("V", (), {"terms": ["apple"]})()
    with pytest.raises(ValueError, match="zero tokens"):
        c_tf_idf(vocab, {"c": Counter()})


def brute_force_ctfidf(bags, terms):
    """Independent oracle straight from the definition."""
    classes = sorted(bags)
    total = sum(sum(bag.values()) for bag in bags.values())
    # restrict to vocabulary terms
    total = sum(bags[c].get(t, 0) for c in classes for t in terms)
    avg = total / len(classes)
    weights = {}
    for t in terms:
        f = sum(bags[c].get(t, 0) for c in classes)
        for c in classes:
            tf = bags[c].get(t, 0)
            weights[(t, c)] = tf * math.log(1 + avg / f) if f else 0.0
    return weights


def random_bags(rng, n_classes, vocab_size):
    terms = [f"term{i}" for i in range(vocab_size)]
    bags = {}
    for c in range(n_classes):
        bag = Counter()
        for t in rng.choice(terms, size=rng.integers(5, 40)):
            bag[str(t)] += 1
        if not bag:
            bag[terms[0]] = 1
        bags[f"class{c}"] = bag
    return terms, bags


def test_ctfidf_matches_brute_force_oracle():
    rng = np.random.default_rng(21)
    for _ in range(25):
        terms, bags = random_bags(rng, int(rng.integers(1, 6)),
                                  int(rng.integers(5, 50)))
        vocab = type("V", (), {"terms": terms})()
        model = c_tf_idf(vocab, bags)
        oracle = brute_force_ctfidf(bags, terms)
        for i, t in enumerate(terms):
            for j, c in enumerate(model.classes):
                assert model.weights[i, j] == pytest.approx(
                    oracle[(t, c)], abs=1e-9)


def test_ctfidf_scaling_property():
    """Scaling every class bag by k scales every weight by exactly k."""
    rng = np.random.default_rng(22)
    terms, bags = random_bags(rng, 3, 20)
    vocab = type("V", (), {"terms": terms})()
    base = c_tf_idf(vocab, bags)
    k = 7
    scaled_bags = {c: Counter({t: n * k for t, n in bag.items()})
                   for c, bag in bags.items()}
    scaled = c_tf_idf(vocab, scaled_bags)
    assert np.allclose(scaled.weights, k * base.weights, atol=1e-9)


def test_class_token_bags_sum_matches_kept_tokens():
    corpus = corpus_of(["apple pear apple", "car apple", "pear pear"])
    cfg = config(min_df=1)
    vocab = build_vocabulary(corpus, cfg)
    labels = {1: 0, 2: 0, 3: 1}
    bags = class_token_bags(corpus, labels, vocab)
    for cls, bag in bags.items():
        docs = [p for p in corpus.papers if labels[p.corpus_id] == cls]
        kept = sum(1 for p in docs
                   for t in ngrams(tokenize(p.document_text()))
                   if t in set(vocab.terms))
        assert sum(bag.values()) == kept


# --- diversify (MMR) ------------------------------------------------------


def orthogonal_vectors():
    return {
        "alpha": [1, 0, 0, 0],
        "beta": [0, 1, 0, 0],
        "gamma": [0, 0, 1, 0],
        "delta": [0, 0, 0, 1],
    }


def test_mmr_zero_diversity_equals_relevance_ranking():
    vecs = orthogonal_vectors()
    topic = [0.9, 0.8, 0.7, 0.6]
    out = diversify(["alpha", "beta", "gamma", "delta"], vecs, topic,
                    diversity=1e-9, top_n=4)
    assert [t for t, _ in out] == ["alpha", "beta", "gamma", "delta"]


def test_mmr_duplicate_never_selected_second():
    vecs = {"first": [1.0, 0.0], "dup": [1.0, 0.0], "other": [0.6, 0.8]}
    topic = [1.0, 0.1]
    out = diversify(["first", "dup", "other"], vecs, topic,
                    diversity=0.7, top_n=2)
    assert [t for t, _ in out][1] != "dup"
    assert "other" in [t for t, _ in out]


def test_mmr_orthogonal_hand_computed():
    """With orthogonal embeddings the penalty term is always 0, so the MMR
    recurrence degenerates to 0.6 * relevance; hand-evaluated order."""
    vecs = orthogonal_vectors()
    topic = np.array([0.9, 0.8, 0.7, 0.6])
    topic = topic / np.linalg.norm(topic)
    out = diversify(["alpha", "beta", "gamma", "delta"], vecs, list(topic),
                    diversity=0.4, top_n=3)
    names = [t for t, _ in out]
    assert names == ["alpha", "beta", "gamma"]
    scores = [s for _, s in out]
    rel = topic  # cosine of each basis vector with the topic vector
    for got, expect in zip(scores, 0.6 * rel[:3]):
        assert got == pytest.approx(expect, abs=1e-9)


def test_mmr_missing_embedding_errors():
    with pytest.raises(ValueError, match="missing term embedding"):
        diversify(["known", "unknown"], {"known": [1, 0]}, [1, 0], 0.4, 2)


# --- topics ---------------------------------------------------------------


def simple_assignment(n, labels):
    labels = np.asarray(labels)
    return ClusterAssignment(
        ids=list(range(1, n + 1)),
        labels=labels,
        strengths=np.ones(n),
        cluster_count=int(labels.max()) + 1,
        outlier_fraction=float((labels == -1).sum()) / n,
    )


def test_topic_weight_and_embedding():
    titles = ["apple pear orchard"] * 30 + ["car engine piston"] * 30
    corpus = corpus_of(titles)
    cfg = config(min_df=2)
    vocab = build_vocabulary(corpus, cfg)
    labels_arr = [0] * 30 + [1] * 30
    asg = simple_assignment(60, labels_arr)
    bags = class_token_bags(corpus, dict(zip(asg.ids, labels_arr)), vocab)
    model = c_tf_idf(vocab, bags)
    vec = np.array([1.0, 2.0, 3.0])
    doc_m = make_matrix(np.tile(vec, (60, 1)), ids=asg.ids)
    topics = build_topics(asg, model, doc_m, cfg)
    by_number = {t.number: t for t in topics}
    assert by_number[0].topic_weight == 30
    assert np.allclose(by_number[0].embedding, vec, atol=1e-6)
    assert by_number[-1].label == "-1_outliers"
    assert by_number[-1].topic_weight == 0


def test_topic_label_shape():
    keywords = [("streaming", 4.0), ("rsi", 3.0), ("retrieval", 2.0),
                ("regression", 1.0), ("extra", 0.5)]
    assert Topic.make_label(7, keywords) == "7_streaming_rsi_retrieval_regression"


def test_topic_keywords_descend_before_diversification():
    model = toy_model()
    top = model.top_terms("class1", 10)
    scores = [s for _, s in top]
    assert scores == sorted(scores, reverse=True)
