"""Entailment scorers: trainable toy model, mock table, external endpoint."""

from .base import Scorer
from .external import ExternalScorer
from .mock import MockScorer, mock_score
from .toy import (
    HashingFeaturizer,
    ToyCache,
    ToyGrads,
    ToyScorer,
    ToyScorerParams,
    load_checkpoint,
    save_checkpoint,
    token_bucket,
    toy_backward,
    toy_forward,
    toy_init,
)

__all__ = [
    "Scorer",
    "ExternalScorer",
    "MockScorer",
    "mock_score",
    "HashingFeaturizer",
    "ToyCache",
    "ToyGrads",
    "ToyScorer",
    "ToyScorerParams",
    "load_checkpoint",
    "save_checkpoint",
    "token_bucket",
    "toy_backward",
    "toy_forward",
    "toy_init",
]
