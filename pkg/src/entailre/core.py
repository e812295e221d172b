"""Core domain types: labels, label spaces, instances, scores, loss config.

Labels are referenced by their string id everywhere downstream (files,
score vectors, predictions); RelationLabel objects live inside a
LabelSpace and carry the abstain flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyCandidates, MissingMask, UnknownLabel

# Canonical id used for "no relation holds" across shipped datasets.
ABSTAIN_DEFAULT_ID = "0"


@dataclass(frozen=True)
class RelationLabel:
    """One candidate relation; is_abstain marks the no-relation option."""

    label_id: str
    is_abstain: bool = False

    def __post_init__(self) -> None:
        if not self.label_id:
            raise UnknownLabel("label_id must be non-empty")


@dataclass(frozen=True)
class LabelSpace:
    """Ordered candidate set for one dataset, with at most one abstain label.

    Order is meaningful: prediction breaks score ties by position, so
    shipped spaces put the abstain label first (abstain wins exact ties).
    """

    dataset_id: str
    labels: tuple[RelationLabel, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise EmptyCandidates(f"label space {self.dataset_id!r} has no labels")
        ids = [lab.label_id for lab in self.labels]
        if len(set(ids)) != len(ids):
            raise UnknownLabel(f"duplicate label ids in space {self.dataset_id!r}")
        n_abstain = sum(lab.is_abstain for lab in self.labels)
        if n_abstain > 1:
            raise UnknownLabel(
                f"label space {self.dataset_id!r} has {n_abstain} abstain labels; at most one allowed"
            )

    @property
    def has_abstain(self) -> bool:
        return any(lab.is_abstain for lab in self.labels)

    @property
    def abstain_id(self) -> str | None:
        for lab in self.labels:
            if lab.is_abstain:
                return lab.label_id
        return None

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(lab.label_id for lab in self.labels)

    @property
    def non_abstain_ids(self) -> tuple[str, ...]:
        return tuple(lab.label_id for lab in self.labels if not lab.is_abstain)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label_id: object) -> bool:
        return any(lab.label_id == label_id for lab in self.labels)

    def index(self, label_id: str) -> int:
        for i, lab in enumerate(self.labels):
            if lab.label_id == label_id:
                return i
        raise UnknownLabel(f"label {label_id!r} not in space {self.dataset_id!r}")

    def get(self, label_id: str) -> RelationLabel:
        return self.labels[self.index(label_id)]

    def is_abstain(self, label_id: str) -> bool:
        return self.get(label_id).is_abstain


@dataclass(frozen=True)
class Instance:
    """One masked sentence with its gold label id."""

    instance_id: str
    sentence: str
    gold: str


@dataclass(frozen=True)
class ScoreVector:
    """Entailment scores for every candidate label of one instance."""

    instance_id: str
    entries: dict[str, float]


@dataclass(frozen=True)
class Prediction:
    """Predicted label id plus the full candidate scores it came from."""

    instance_id: str
    predicted: str
    scores: dict[str, float]


@dataclass(frozen=True)
class LossConfig:
    """Hyperparameters of the combined training objective.

    tau scales the contrastive term, gamma is the ranking margin,
    lam weights the abstention-calibration term, negatives is how many
    negative candidates each instance contributes ("all" or a count).
    """

    tau: float = 0.01
    gamma: float = 0.7
    lam: float = 1.0
    negatives: int | str = "all"

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if isinstance(self.negatives, str):
            if self.negatives != "all":
                raise ValueError(f'negatives must be a positive int or "all", got {self.negatives!r}')
        elif not (isinstance(self.negatives, int) and self.negatives > 0):
            raise ValueError(f'negatives must be a positive int or "all", got {self.negatives!r}')


@dataclass(frozen=True)
class LossValue:
    """Loss breakdown and the gradient of total w.r.t. each candidate score."""

    total: float
    nce: float
    ac: float
    dscore: dict[str, float] = field(repr=False)


def validate_instance(instance: Instance, space: LabelSpace, mask_tokens: tuple[str, ...] | None = None) -> None:
    """Check one instance against a space: known gold, required masks present.

    mask_tokens defaults to the registered masks of space.dataset_id; for
    unregistered datasets with no explicit masks the mask check is skipped.
    """
    if instance.gold not in space:
        raise UnknownLabel(
            f"instance {instance.instance_id!r}: gold {instance.gold!r} not in space {space.dataset_id!r}"
        )
    if mask_tokens is None:
        from .datasets import get_dataset_spec

        spec = get_dataset_spec(space.dataset_id, strict=False)
        mask_tokens = spec.mask_tokens if spec is not None else ()
    for tok in mask_tokens:
        if tok not in instance.sentence:
            raise MissingMask(
                f"instance {instance.instance_id!r}: sentence lacks required mask {tok!r}"
            )
