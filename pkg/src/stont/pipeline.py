"""End-to-end pipeline: reduce -> cluster -> represent -> relate -> persist."""

from __future__ import annotations

import json
import logging
import os
import time

import numpy as np

from stont import cluster as cluster_mod
from stont import export as export_mod
from stont import ontology as ontology_mod
from stont import represent as represent_mod
from stont import store as store_mod
from stont.config import PipelineConfig
from stont.corpus import load_corpus
from stont.embedding_io import align, read_matrix
from stont.errors import StontError
from stont.reduce import ReducedMatrix, reduce as reduce_op

log = logging.getLogger(__name__)


def apply_min_topic_size(assignment, min_topic_size: int):
    """Merge clusters smaller than min_topic_size into the outliers and
    renumber the survivors by decreasing size."""
    small = [num for num, size in assignment.cluster_sizes.items()
             if size < min_topic_size]
    if not small:
        return assignment
    labels = assignment.labels.copy()
    strengths = assignment.strengths.copy()
    for num in small:
        mask = labels == num
        labels[mask] = -1
        strengths[mask] = 0.0
    survivors = sorted(set(labels[labels >= 0]))
    order = []
    for num in survivors:
        members = np.where(labels == num)[0]
        order.append((-len(members), min(assignment.ids[m] for m in members),
                      num))
    order.sort()
    renumber = {old: new for new, (_, _, old) in enumerate(order)}
    final = np.full_like(labels, -1)
    for old, new in renumber.items():
        final[labels == old] = new
    exemplars = {renumber[old]: assignment.exemplars[old] for old in renumber}
    sizes = {renumber[old]: assignment.cluster_sizes[old] for old in renumber}
    n = len(labels)
    return cluster_mod.ClusterAssignment(
        ids=assignment.ids,
        labels=final,
        strengths=strengths,
        cluster_count=len(renumber),
        outlier_fraction=float((final == -1).sum()) / n,
        exemplars=exemplars,
        condensed=assignment.condensed,
        cluster_sizes=sizes,
    )


def run_pipeline(corpus_path, embeddings_path, config: PipelineConfig,
                 out_dir, net_id: int = 1, created_on: str | None = None,
                 year_month: str | None = None,
                 reduced_path=None) -> dict:
    """Run the full build and persist a relational snapshot plus reports.

    ``created_on`` defaults to the current UTC time; pass a fixed value
    for byte-reproducible snapshots. ``reduced_path``, when it names an
    existing file, resumes from that serialized reduced matrix.
    """
    timings = {}
    os.makedirs(out_dir, exist_ok=True)

    t0 = time.perf_counter()
    corpus = load_corpus(corpus_path)
    doc_matrix = read_matrix(embeddings_path)
    if doc_matrix.kind != "document":
        raise StontError(f"{embeddings_path} is a {doc_matrix.kind} matrix, "
                         f"expected document")
    align(doc_matrix, corpus)
    timings["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if reduced_path and os.path.exists(reduced_path):
        reduced = ReducedMatrix.from_matrix(read_matrix(reduced_path))
        if list(reduced.ids) != list(doc_matrix.ids):
            raise StontError("resumed reduced matrix does not match corpus")
    else:
        reduced = reduce_op(doc_matrix, config)
        if reduced_path:
            from stont.embedding_io import write_matrix
            write_matrix(reduced.to_matrix(), reduced_path)
    timings["reduce"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    assignment = cluster_mod.hdbscan(reduced, config)
    assignment = apply_min_topic_size(assignment, config.ctfidf.min_topic_size)
    memberships = cluster_mod.soft_memberships(
        reduced, assignment,
        top_k=config.ontology.membership_top_k,
        floor=config.ontology.membership_floor,
    )
    timings["cluster"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    vocab = represent_mod.build_vocabulary(corpus, config)
    labels = {pid: int(lab) for pid, lab in zip(assignment.ids,
                                                assignment.labels)}
    bags = represent_mod.class_token_bags(
        corpus, labels, vocab)
    bags = {cls: bag for cls, bag in bags.items() if cls >= 0 and bag}
    model = represent_mod.c_tf_idf(vocab, bags)
    topics = represent_mod.build_topics(assignment, model, doc_matrix, config)
    timings["represent"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    similarities = ontology_mod.related_identical(
        topics, config.ontology.similarity_threshold)
    edges = ontology_mod.common_article_edges(memberships, topics)
    meta, hierarchy = ontology_mod.super_topics(
        topics, config.ontology.hierarchy_floor, model,
        top_n=config.ctfidf.top_n_words)
    timings["relate"] = time.perf_counter() - t0

    if created_on is None:
        created_on = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    if year_month is None:
        year_month = created_on[:7]
    net = ontology_mod.TopicNet(
        topic_net_id=net_id,
        created_on=created_on,
        year_month=year_month,
        topics=topics + meta,
        edges=edges,
        similarities=similarities,
        hierarchy=hierarchy,
    )
    net.set_status("BUILDING")
    net.set_status("DONE")

    t0 = time.perf_counter()
    snapshot = store_mod.persist(net, memberships, out_dir)
    report = export_mod.write_stats(
        net,
        os.path.join(out_dir, "stats.json"),
        os.path.join(out_dir, "stats.txt"),
    )
    timings["persist"] = time.perf_counter() - t0

    run_log = {
        "config": config.as_dict(),
        "timings": timings,
        "corpus": corpus.report,
        "cluster_count": assignment.cluster_count,
        "outlier_fraction": assignment.outlier_fraction,
    }
    with open(os.path.join(out_dir, "run_log.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(run_log, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("pipeline done: %d topics, %.1f%% outliers",
             assignment.cluster_count, 100 * assignment.outlier_fraction)
    return {"snapshot": snapshot, "net": net, "assignment": assignment,
            "memberships": memberships, "stats": report}
