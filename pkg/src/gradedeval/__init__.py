"""Graded-relevance evaluation for ranked and diversified retrieval."""

from .adhoc import ScoredList, UndefinedTopicError, build_scored_list
from .corpus import (
    TOPIC_LEVEL,
    CorpusError,
    EquivalenceClasses,
    GradedQrels,
    IntentSet,
    ParseError,
    RankedRun,
    ValidationError,
    parse_classes,
    parse_intents,
    parse_qrels,
    parse_run,
)
from .gains import GainScheme, gains_linear, gains_quadratic

__version__ = "0.1.0"
