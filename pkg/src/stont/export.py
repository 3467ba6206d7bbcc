"""Ontology exports: SKOS Turtle, graph-database import files, statistics."""

from __future__ import annotations

import json
import os
from statistics import pvariance

from stont.ontology import TopicNet

SKOS = "http://www.w3.org/2004/02/skos/core#"

_PREAMBLE = """\
@prefix skos: <http://www.w3.org/2004/02/skos/core#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
"""


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def concept_iri(base_iri: str, topic_id: int) -> str:
    return f"{base_iri}/topic/{topic_id}"


def export_skos(net: TopicNet, base_iri: str, path) -> None:
    """Serialize the net as Turtle: property declarations, concepts, then
    relation triples, all deterministically ordered.

    relatedIdentical is emitted once per pair in canonical (id1 -> id2)
    direction and declared symmetric; superTopicOf goes parent -> child.
    """
    net.validate()
    base = base_iri.rstrip("/")
    related = f"{base}/prop/relatedIdentical"
    super_of = f"{base}/prop/superTopicOf"
    lines = [_PREAMBLE]
    lines.append(f"<{related}> a owl:SymmetricProperty ;\n"
                 f"    rdfs:subPropertyOf skos:related .\n")
    lines.append(f"<{super_of}> rdfs:subPropertyOf skos:narrower .\n")
    for t in sorted(net.topics, key=lambda t: t.topic_id):
        lines.append(
            f"<{concept_iri(base, t.topic_id)}> a skos:Concept ;\n"
            f'    skos:prefLabel "{_escape(t.label)}" ;\n'
            f'    skos:notation "{t.number}" .\n'
        )
    for s in sorted(net.similarities, key=lambda s: (s.topic_id1, s.topic_id2)):
        lines.append(f"<{concept_iri(base, s.topic_id1)}> <{related}> "
                     f"<{concept_iri(base, s.topic_id2)}> .\n")
    for parent, child in sorted(net.hierarchy):
        lines.append(f"<{concept_iri(base, parent)}> <{super_of}> "
                     f"<{concept_iri(base, child)}> .\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))


def export_graph(net: TopicNet, directory) -> None:
    """Bulk-import files: nodes.csv, edges.csv, statements.cypher.

    Edge types: RELATED_IDENTICAL (strength = cosine similarity),
    COMMON_ARTICLES (weight = summed shared probability, strength =
    collaboration strength), SUPER_TOPIC_OF.
    """
    net.validate()
    os.makedirs(directory, exist_ok=True)
    nodes_path = os.path.join(directory, "nodes.csv")
    edges_path = os.path.join(directory, "edges.csv")
    cypher_path = os.path.join(directory, "statements.cypher")

    topics = sorted(net.topics, key=lambda t: t.topic_id)
    with open(nodes_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("topic_id,label,number,topic_weight\n")
        for t in topics:
            label = t.label.replace('"', '""')
            fh.write(f'{t.topic_id},"{label}",{t.number},{t.topic_weight}\n')

    rows = []
    for s in sorted(net.similarities, key=lambda s: (s.topic_id1, s.topic_id2)):
        rows.append((s.topic_id1, s.topic_id2, "RELATED_IDENTICAL", "",
                     repr(s.similarity)))
    for e in sorted(net.edges, key=lambda e: (e.topic_id1, e.topic_id2)):
        rows.append((e.topic_id1, e.topic_id2, "COMMON_ARTICLES",
                     repr(e.edge_weight), repr(e.str_of_col)))
    for parent, child in sorted(net.hierarchy):
        rows.append((parent, child, "SUPER_TOPIC_OF", "", ""))
    with open(edges_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("source,target,type,weight,strength\n")
        for src, dst, kind, weight, strength in rows:
            fh.write(f"{src},{dst},{kind},{weight},{strength}\n")

    with open(cypher_path, "w", encoding="utf-8", newline="\n") as fh:
        for t in topics:
            label = _escape(t.label)
            fh.write(
                f"CREATE (:Topic {{topic_id: {t.topic_id}, "
                f'label: "{label}", number: {t.number}, '
                f"topic_weight: {t.topic_weight}}});\n"
            )
        for src, dst, kind, weight, strength in rows:
            props = []
            if weight:
                props.append(f"weight: {weight}")
            if strength:
                props.append(f"strength: {strength}")
            prop_str = f" {{{', '.join(props)}}}" if props else ""
            fh.write(
                f"MATCH (a:Topic {{topic_id: {src}}}), "
                f"(b:Topic {{topic_id: {dst}}}) "
                f"CREATE (a)-[:{kind}{prop_str}]->(b);\n"
            )


def hierarchy_depths(hierarchy: list) -> list:
    """Depth (edge count from root) of every leaf in the hierarchy forest."""
    if not hierarchy:
        return []
    children: dict = {}
    child_set = set()
    for parent, child in hierarchy:
        children.setdefault(parent, []).append(child)
        child_set.add(child)
    roots = sorted(set(children) - child_set)
    depths = []
    for root in roots:
        stack = [(root, 0)]
        while stack:
            node, depth = stack.pop()
            kids = children.get(node)
            if not kids:
                depths.append(depth)
            else:
                stack.extend((k, depth + 1) for k in kids)
    return depths


def stats(net: TopicNet) -> dict:
    """Structural report: topic and relation counts, outlier fraction,
    hierarchy depth statistics, keyword count."""
    real = [t for t in net.topics if t.number >= 0]
    outlier = [t for t in net.topics if t.number == -1]
    outlier_count = outlier[0].topic_weight if outlier else 0
    paper_total = sum(t.topic_weight for t in real if _is_base_topic(t, net)) \
        + outlier_count
    depths = hierarchy_depths(net.hierarchy)
    by_kind = {
        "cosine_similarity": len(net.similarities),
        "probability_distribution": len(net.edges),
    }
    return {
        "topic_net_id": net.topic_net_id,
        "topics": len(real),
        "outlier_count": outlier_count,
        "outlier_fraction": (outlier_count / paper_total) if paper_total else 0.0,
        "relations": {
            "by_kind": by_kind,
            "total": sum(by_kind.values()),
        },
        "hierarchy_links": len(net.hierarchy),
        "hierarchy_depth": {
            "max": max(depths) if depths else 0,
            "min": min(depths) if depths else 0,
            "variance": pvariance(depths) if len(depths) > 1 else 0.0,
        },
        "keyword_count": sum(len(t.keywords) for t in net.topics),
    }


def _is_base_topic(topic, net: TopicNet) -> bool:
    parents = {p for p, _ in net.hierarchy}
    return topic.topic_id not in parents


def stats_text(report: dict) -> str:
    by_kind = report["relations"]["by_kind"]
    lines = [
        f"topic net {report['topic_net_id']}",
        f"  topics:               {report['topics']}",
        f"  outliers:             {report['outlier_count']} "
        f"({report['outlier_fraction']:.2%})",
        f"  relations (cosine):   {by_kind['cosine_similarity']}",
        f"  relations (probability): {by_kind['probability_distribution']}",
        f"  relations total:      {report['relations']['total']}",
        f"  hierarchy links:      {report['hierarchy_links']}",
        f"  hierarchy depth:      max {report['hierarchy_depth']['max']}, "
        f"min {report['hierarchy_depth']['min']}, "
        f"variance {report['hierarchy_depth']['variance']:.3f}",
        f"  keywords:             {report['keyword_count']}",
    ]
    return "\n".join(lines)


def write_stats(net: TopicNet, json_path, text_path=None) -> dict:
    report = stats(net)
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if text_path:
        with open(text_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(stats_text(report) + "\n")
    return report
