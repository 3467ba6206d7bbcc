"""Run the whole pipeline — reduce, cluster, represent, relate, persist —
on the bundled 1000-document synthetic corpus and inspect the snapshot.

    python3 demos/04_full_pipeline.py
"""

import os
import tempfile

from stont import PipelineConfig
from stont.pipeline import run_pipeline
from stont.store import load

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")


def main():
    config = PipelineConfig()
    config.umap.n_neighbors = 10
    config.vectorizer.min_df = 5

    with tempfile.TemporaryDirectory() as out:
        result = run_pipeline(
            os.path.join(FIXTURES, "corpus_planted.jsonl"),
            os.path.join(FIXTURES, "docs_planted.stoemb"),
            config, out,
            created_on="2024-06-01T00:00:00Z",  # fix for reproducible bytes
        )
        print(f"snapshot written to {out}:")
        for name in sorted(os.listdir(out)):
            print(f"    {name}")

        stats = result["stats"]
        print(f"\n{stats['topics']} topics, "
              f"{stats['outlier_fraction']:.1%} outliers, "
              f"{stats['relations']['total']} relations, "
              f"{stats['hierarchy_links']} hierarchy links")

        # The snapshot reloads into the same in-memory shapes.
        net, memberships = load(out)
        for topic in net.topics[:4]:
            print(f"topic {topic.topic_id:>3} ({topic.label}): "
                  f"{topic.topic_weight} papers")
        print(f"... plus memberships for {len(memberships)} papers")


if __name__ == "__main__":
    main()
