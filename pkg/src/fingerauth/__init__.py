"""Offline fingerprint-photograph authentication toolkit.

Turns finger photos into compact minutiae-plus-descriptor templates and
matches them entirely on the local machine: no server, no network, no
dedicated sensor.
"""

from .config import MatchConfig, PipelineConfig, RansacConfig, load_config
from .descriptor import Descriptor256, Template, TestPattern, extract_template, generate_pattern, run_pipeline
from .errors import (
    BadMagicError,
    BadVersionError,
    NoFeaturesError,
    NoFingerError,
    PipelineError,
    TemplateFormatError,
    TruncatedTemplateError,
)
from .matcher import Correspondence, MatchResult, SimilarityTransform, hamming, match_score, ransac_similarity, ratio_match
from .minutiae import Minutia, MinutiaKind
from .segmentation import Ellipse, HsvRange
from .store import TemplateDb, deserialize, serialize
from .synth import Pose, render_finger

__version__ = "0.1.0"

__all__ = [
    "Correspondence",
    "Descriptor256",
    "Ellipse",
    "HsvRange",
    "MatchConfig",
    "MatchResult",
    "Minutia",
    "MinutiaKind",
    "NoFeaturesError",
    "NoFingerError",
    "PipelineConfig",
    "PipelineError",
    "Pose",
    "RansacConfig",
    "SimilarityTransform",
    "Template",
    "TemplateDb",
    "TemplateFormatError",
    "TestPattern",
    "TruncatedTemplateError",
    "BadMagicError",
    "BadVersionError",
    "deserialize",
    "extract_template",
    "generate_pattern",
    "hamming",
    "load_config",
    "match_score",
    "ransac_similarity",
    "ratio_match",
    "render_finger",
    "run_pipeline",
    "serialize",
]
