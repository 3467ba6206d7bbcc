"""Reduce document embeddings to a low-dimensional layout, then cluster
them by density. Shows the determinism guarantee and the soft-membership
table.

    python3 demos/02_reduce_and_cluster.py
"""

import os

import numpy as np

from stont import PipelineConfig, read_matrix
from stont.cluster import hdbscan, soft_memberships
from stont.reduce import reduce

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")


def main():
    matrix = read_matrix(os.path.join(FIXTURES, "docs_planted.stoemb"))

    config = PipelineConfig()
    config.umap.n_neighbors = 10  # the default (2) suits far larger corpora

    reduced = reduce(matrix, config)
    print(f"reduced {matrix.data.shape} -> {reduced.data.shape} "
          f"(seed {config.umap.seed})")

    # Same seed, same layout — down to the last bit.
    again = reduce(matrix, config)
    assert np.array_equal(reduced.data, again.data)
    print("layout is bit-reproducible for a fixed seed")

    assignment = hdbscan(reduced, config)
    print(f"found {assignment.cluster_count} clusters, "
          f"{assignment.outlier_fraction:.1%} outliers")
    sizes = sorted(assignment.cluster_sizes.items())
    print("cluster sizes:", {num: size for num, size in sizes})

    # Each paper also gets a probability distribution over all clusters,
    # not just its hard label; this powers the shared-article relations.
    table = soft_memberships(reduced, assignment,
                             top_k=config.ontology.membership_top_k,
                             floor=config.ontology.membership_floor)
    pid = reduced.ids[0]
    print(f"paper {pid} label={assignment.labels[0]} memberships:")
    for number, prob in table[pid][:3]:
        print(f"    cluster {number}: {prob:.3f}")


if __name__ == "__main__":
    main()
