import os

import numpy as np
import pytest

from stont.config import PipelineConfig

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def default_config():
    return PipelineConfig()


@pytest.fixture
def pipeline_config():
    """Config tuned for the small synthetic corpora used in tests."""
    cfg = PipelineConfig()
    cfg.umap.n_neighbors = 10
    cfg.vectorizer.min_df = 5
    cfg.ctfidf.top_n_words = 10
    return cfg


@pytest.fixture
def two_blob_points():
    rng = np.random.default_rng(2)
    a = rng.normal(0, 0.05, size=(50, 2))
    b = rng.normal(0, 0.05, size=(50, 2)) + [10.0, 0.0]
    labels = [0] * 50 + [1] * 50
    return np.vstack([a, b]), labels
