"""VGG16 painting embedder: produces the manifest + embedding files
consumed by the ``vlink`` retrieval pipeline."""

from .export import export_corpus, slugify
from .features import (
    FEATURE_DIM,
    INPUT_SIZE,
    FeatureExtractor,
    PreprocessedImage,
    preprocess,
)

__all__ = [
    "FEATURE_DIM",
    "INPUT_SIZE",
    "FeatureExtractor",
    "PreprocessedImage",
    "export_corpus",
    "preprocess",
    "slugify",
]

__version__ = "0.1.0"
