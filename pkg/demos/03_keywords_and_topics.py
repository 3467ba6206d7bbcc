"""Score keywords per topic with class-based TF-IDF and diversify them
with maximal marginal relevance.

    python3 demos/03_keywords_and_topics.py
"""

from collections import Counter

from stont.represent import c_tf_idf, diversify


def main():
    # Token bags per class: the tiny worked example from the docs.
    bags = {
        "fruit": Counter({"apple": 2, "pear": 1}),
        "cars": Counter({"apple": 1, "car": 2}),
    }
    vocab = type("V", (), {"terms": ["apple", "car", "pear"]})()
    model = c_tf_idf(vocab, bags)
    print(f"average class size A = {model.avg_class_tokens}")
    for cls in model.classes:
        top = model.top_terms(cls, 3)
        print(f"class {cls!r}: " +
              ", ".join(f"{t} ({w:.3f})" for t, w in top))
    # "apple" appears everywhere, so it is discounted; "car" and "pear"
    # are distinctive and rank first in their own classes.

    # MMR keeps keyword lists from filling up with near-synonyms.
    vectors = {
        "neural network": [1.0, 0.0],
        "neural networks": [0.999, 0.04],  # near-duplicate
        "optimization": [0.5, 0.87],
    }
    topic_vec = [0.9, 0.44]
    picked = diversify(list(vectors), vectors, topic_vec,
                       diversity=0.7, top_n=2)
    print("diversified keywords:", [term for term, _ in picked])
    # the duplicate is skipped in favor of the complementary term


if __name__ == "__main__":
    main()
