"""Compute the four topic-relation kinds on a small hand-built network
and export it as SKOS Turtle and graph-database import files.

    python3 demos/05_relations_and_export.py
"""

import tempfile
from pathlib import Path

import numpy as np

from stont.ontology import (
    TopicNet,
    common_article_edges,
    n_similar_topics,
    related_identical,
    strength_of_collaboration,
    super_topics,
)
from stont.represent import Topic
from stont.export import export_graph, export_skos
from stont.embedding_io import EmbeddingMatrix


def topic(tid, number, label, weight, vec):
    return Topic(topic_id=tid, number=number, label=label,
                 topic_weight=weight, embedding=np.array(vec), keywords=[])


def main():
    topics = [
        topic(1, 0, "0_deep_learning", 40, [1.0, 0.05, 0.0]),
        topic(2, 1, "1_neural_networks", 60, [1.0, -0.05, 0.0]),
        topic(3, 2, "2_astronomy", 30, [0.0, 0.1, 1.0]),
    ]

    # Kind 1: near-identical topics by embedding cosine.
    sims = related_identical(topics, threshold=0.9)
    for s in sims:
        print(f"relatedIdentical {s.topic_id1} ~ {s.topic_id2} "
              f"(cos {s.similarity:.3f})")

    # Kind 2: shared-article edges from the membership probabilities.
    memberships = {
        101: [(0, 0.6), (1, 0.4)],
        102: [(0, 0.5), (1, 0.5)],
        103: [(1, 0.8), (2, 0.2)],
    }
    edges = common_article_edges(memberships, topics)
    for e in edges:
        print(f"commonArticles {e.topic_id1} - {e.topic_id2}: "
              f"weight {e.edge_weight:.2f}, strength {e.str_of_col:.4f}")
    # the strength is the harmonic mean of weight/topic_weight ratios:
    print(f"    check: 2*10/(40+60) = {strength_of_collaboration(10, 40, 60)}")

    # Kind 3: super-topic hierarchy by agglomerative merging.
    meta, hierarchy = super_topics(topics, hierarchy_floor=0.5)
    for m in meta:
        kids = [c for p, c in hierarchy if p == m.topic_id]
        print(f"superTopic {m.topic_id} covers {kids}, "
              f"weight {m.topic_weight}")

    net = TopicNet(topic_net_id=1, created_on="2024-06-01T00:00:00Z",
                   year_month="2024-05", status="DONE",
                   topics=topics + meta, edges=edges,
                   similarities=sims, hierarchy=hierarchy)

    # Kind 4: keyword query against topic embeddings (never persisted).
    terms = EmbeddingMatrix(kind="term", ids=["telescope"],
                            data=np.array([[0.0, 0.0, 1.0]], dtype="f4"))
    for tid, label, sim in n_similar_topics("telescope", 2, net.topics, terms):
        print(f"similar to 'telescope': topic {tid} ({label}) cos {sim:.3f}")

    with tempfile.TemporaryDirectory() as tmp:
        ttl = Path(tmp) / "ontology.ttl"
        export_skos(net, "https://example.org/onto", ttl)
        print("\n--- SKOS Turtle (first lines) ---")
        print("\n".join(ttl.read_text().splitlines()[:12]))

        graph_dir = Path(tmp) / "graph"
        export_graph(net, graph_dir)
        print("\n--- edges.csv ---")
        print((graph_dir / "edges.csv").read_text().rstrip())


if __name__ == "__main__":
    main()
