"""Pipeline configuration: every tunable parameter with defaults and validation.

The on-disk format is a flat INI-style file with one section per parameter
block (embedding, umap, hdbscan, vectorizer, ctfidf, ontology). Unknown
sections or keys are errors so that typos never silently fall back to a
default.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

from stont.errors import ConfigError


@dataclass
class EmbeddingConfig:
    model_name: str = "paraphrase-MiniLM-L12-v2"


@dataclass
class UmapConfig:
    n_neighbors: int = 2
    n_components: int = 5
    low_memory: bool = True
    seed: int = 42
    min_dist: float = 0.1
    n_epochs: int = 200
    negative_sample_rate: int = 5


@dataclass
class HdbscanConfig:
    min_cluster_size: int = 10
    metric: str = "euclidean"
    cluster_selection_method: str = "eom"
    prediction_data: bool = True
    min_samples: int = 1


@dataclass
class VectorizerConfig:
    min_df: int = 10
    vocabulary_source: str = "frequency"  # or "keyword_extraction"


@dataclass
class CtfidfConfig:
    top_n_words: int = 30
    min_topic_size: int = 20
    diversity: float = 0.4
    calculate_probabilities: bool = False
    low_memory: bool = True


@dataclass
class OntologyConfig:
    similarity_threshold: float = 0.9
    membership_top_k: int = 10
    membership_floor: float = 0.01
    hierarchy_floor: float = 0.5


@dataclass
class PipelineConfig:
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    umap: UmapConfig = field(default_factory=UmapConfig)
    hdbscan: HdbscanConfig = field(default_factory=HdbscanConfig)
    vectorizer: VectorizerConfig = field(default_factory=VectorizerConfig)
    ctfidf: CtfidfConfig = field(default_factory=CtfidfConfig)
    ontology: OntologyConfig = field(default_factory=OntologyConfig)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("n_neighbors", "n_components", "n_epochs",
                     "negative_sample_rate"):
            if getattr(self.umap, name) < 1:
                raise ConfigError(f"umap.{name} must be >= 1")
        for name in ("min_cluster_size", "min_samples"):
            if getattr(self.hdbscan, name) < 1:
                raise ConfigError(f"hdbscan.{name} must be >= 1")
        if self.vectorizer.min_df < 1:
            raise ConfigError("vectorizer.min_df must be >= 1")
        if self.vectorizer.vocabulary_source not in ("frequency",
                                                     "keyword_extraction"):
            raise ConfigError(
                f"unknown vocabulary_source "
                f"{self.vectorizer.vocabulary_source!r}"
            )
        for name in ("top_n_words", "min_topic_size"):
            if getattr(self.ctfidf, name) < 1:
                raise ConfigError(f"ctfidf.{name} must be >= 1")
        if not 0.0 < self.ctfidf.diversity <= 1.0:
            raise ConfigError("ctfidf.diversity must be in (0, 1]")
        if not 0.0 < self.ontology.similarity_threshold <= 1.0:
            raise ConfigError("ontology.similarity_threshold must be in (0, 1]")
        if self.ontology.membership_top_k < 1:
            raise ConfigError("ontology.membership_top_k must be >= 1")
        if not 0.0 <= self.ontology.membership_floor < 1.0:
            raise ConfigError("ontology.membership_floor must be in [0, 1)")
        if self.hdbscan.cluster_selection_method != "eom":
            raise ConfigError("only eom cluster selection is supported")
        if self.hdbscan.metric != "euclidean":
            raise ConfigError("only euclidean metric is supported")

    def as_dict(self) -> dict:
        return {s: dataclasses.asdict(getattr(self, s)) for s in _SECTIONS}

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        cfg = cls()
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section [{section}]")
            block = getattr(cfg, section)
            valid = {f.name: f.type for f in dataclasses.fields(block)}
            for key, raw in parser.items(section):
                if key not in valid:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                current = getattr(block, key)
                if isinstance(current, bool):
                    value = raw.strip().lower() in ("1", "true", "yes", "on")
                elif isinstance(current, int):
                    value = int(raw)
                elif isinstance(current, float):
                    value = float(raw)
                else:
                    value = raw.strip()
                setattr(block, key, value)
        cfg.validate()
        return cfg


_SECTIONS = ("embedding", "umap", "hdbscan", "vectorizer", "ctfidf", "ontology")

# Alternative parameterizations reported as plausible operating points:
# the appendix-scale cluster size and the smaller keyword budgets.
PRESETS = {
    "default": {},
    "clusters-20": {"hdbscan": {"min_cluster_size": 20}},
    "clusters-50": {"hdbscan": {"min_cluster_size": 50}},
    "keywords-10": {"ctfidf": {"top_n_words": 10}},
    "keywords-20": {"ctfidf": {"top_n_words": 20}},
}


def apply_preset(config: PipelineConfig, name: str) -> PipelineConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    for section, overrides in PRESETS[name].items():
        block = getattr(config, section)
        for key, value in overrides.items():
            setattr(block, key, value)
    config.validate()
    return config
