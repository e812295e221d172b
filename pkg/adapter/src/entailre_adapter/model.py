"""Model loading and batch scoring.

The model is any transformers sequence-classification checkpoint whose head
includes an entailment class. Scores are that class's raw logits: the
consumer ranks and differences them, so the monotone softmax adds nothing
and would only compress the gaps.
"""

from __future__ import annotations

from typing import Sequence

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from .config import AdapterConfig, AdapterError

# A pair any entailment-trained model must order correctly: the first
# hypothesis follows from the premise, the second contradicts it.
SANITY_PREMISE = "A dog runs."
SANITY_ENTAILED = "An animal moves."
SANITY_CONTRADICTED = "No animal moves."


class NliModel:
    """An eval-mode checkpoint plus tokenizer behind one scoring call."""

    def __init__(self, config: AdapterConfig):
        self.config = config
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        try:
            model = AutoModelForSequenceClassification.from_pretrained(
                config.model, dtype="auto"
            )
        except TypeError:  # older transformers spell the argument torch_dtype
            model = AutoModelForSequenceClassification.from_pretrained(
                config.model, torch_dtype="auto"
            )
        self.model = model.to(config.device).eval()
        width = int(self.model.config.num_labels)
        if not 0 <= config.entailment_index < width:
            raise AdapterError(
                f"entailment_index {config.entailment_index} out of range for "
                f"a {width}-way classification head"
            )

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        """Raw entailment logits, one per (premise, hypothesis), in order."""
        scores: list[float] = []
        step = self.config.batch_size
        for start in range(0, len(pairs), step):
            chunk = pairs[start : start + step]
            encoded = self.tokenizer(
                [premise for premise, _ in chunk],
                [hypothesis for _, hypothesis in chunk],
                padding=True,
                truncation=True,
                return_tensors="pt",
            ).to(self.config.device)
            with torch.no_grad():
                logits = self.model(**encoded).logits
            column = logits[:, self.config.entailment_index]
            scores.extend(float(value) for value in column.tolist())
        return scores

    def sanity_ordering(self) -> tuple[float, float]:
        """Scores for the (entailed, contradicted) reference pair."""
        entailed, contradicted = self.score_pairs(
            [
                (SANITY_PREMISE, SANITY_ENTAILED),
                (SANITY_PREMISE, SANITY_CONTRADICTED),
            ]
        )
        return entailed, contradicted
