"""Worker configuration."""

from __future__ import annotations

from dataclasses import dataclass


class AdapterError(ValueError):
    """An unusable configuration or a model the configuration does not fit."""


@dataclass(frozen=True)
class AdapterConfig:
    """How to load and drive the scoring model.

    model: checkpoint directory or hub identifier accepted by the
        transformers Auto classes.
    batch_size: maximum number of pairs encoded and forwarded together.
    device: torch device string for the forward pass.
    entailment_index: column of the classification head holding the
        entailment class (2 under the common contradiction/neutral/entailment
        ordering); validated against the loaded head's width at load time.
    """

    model: str
    batch_size: int = 16
    device: str = "cpu"
    entailment_index: int = 2

    def __post_init__(self) -> None:
        if not self.model:
            raise AdapterError("model identifier must be non-empty")
        if self.batch_size < 1:
            raise AdapterError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.device:
            raise AdapterError("device must be non-empty")
        if self.entailment_index < 0:
            raise AdapterError(
                f"entailment_index must be >= 0, got {self.entailment_index}"
            )
