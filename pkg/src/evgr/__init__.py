"""Automated concept scoring for open-ended assessment responses.

Per-concept linear SVMs trained by SMO over bag-of-words features, plus the
agreement statistics used to compare machine scores with human consensus.
"""

from .rubric import CONCEPTS, KEY_CONCEPTS, NAIVE_IDEAS, Concept, ConceptClass, Corpus, Phase, RaterRecord, Response, ScoreVector

__version__ = "0.1.0"

__all__ = [
    "CONCEPTS",
    "KEY_CONCEPTS",
    "NAIVE_IDEAS",
    "Concept",
    "ConceptClass",
    "Corpus",
    "Phase",
    "RaterRecord",
    "Response",
    "ScoreVector",
]
