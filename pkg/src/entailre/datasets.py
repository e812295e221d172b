"""Registry of dataset descriptors: labels, masks, aliases, split sizes.

A descriptor carries everything ingest and verbalization need to know
about a dataset that is not derivable from a single file: the ordered
label set, which label means "no relation", the entity mask tokens the
sentences must contain, raw-label aliases seen in distributed files, and
the published split sizes used for sanity warnings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import RelationLabel, LabelSpace
from .errors import UnknownLabel


@dataclass(frozen=True)
class DatasetSpec:
    """Static description of one dataset family."""

    dataset_id: str
    label_ids: tuple[str, ...]
    abstain_id: str | None
    mask_tokens: tuple[str, ...]
    # Mask pair used to instantiate the generic binary "a relation holds"
    # hypothesis; equals (mask, mask) for single-mask datasets.
    mask_pair: tuple[str, str]
    aliases: dict[str, str] = field(default_factory=dict)
    expected_counts: dict[str, int] = field(default_factory=dict)
    families: tuple[str, ...] = ()

    def label_space(self) -> LabelSpace:
        labels = tuple(
            RelationLabel(lid, is_abstain=(lid == self.abstain_id)) for lid in self.label_ids
        )
        return LabelSpace(dataset_id=self.dataset_id, labels=labels)

    def resolve_label(self, raw: str) -> str:
        lid = self.aliases.get(raw, raw)
        if lid not in self.label_ids:
            raise UnknownLabel(f"label {raw!r} not in dataset {self.dataset_id!r}")
        return lid


_REGISTRY: dict[str, DatasetSpec] = {}


def register_dataset(spec: DatasetSpec) -> DatasetSpec:
    _REGISTRY[spec.dataset_id] = spec
    return spec


def get_dataset_spec(dataset_id: str, strict: bool = True) -> DatasetSpec | None:
    spec = _REGISTRY.get(dataset_id)
    if spec is None and strict:
        raise UnknownLabel(
            f"unknown dataset {dataset_id!r}; registered: {sorted(_REGISTRY)}"
        )
    return spec


def registered_datasets() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def label_space(dataset_id: str) -> LabelSpace:
    spec = get_dataset_spec(dataset_id)
    assert spec is not None
    return spec.label_space()


CHEMPROT = register_dataset(
    DatasetSpec(
        dataset_id="chemprot",
        label_ids=("0", "CPR:3", "CPR:4", "CPR:5", "CPR:6", "CPR:9"),
        abstain_id="0",
        mask_tokens=("@CHEMICAL$", "@GENE$"),
        mask_pair=("@CHEMICAL$", "@GENE$"),
        aliases={"false": "0", "False": "0"},
        expected_counts={"train": 18305, "dev": 11268, "test": 15745},
        families=("simple", "descriptive", "demonstration", "descriptive+demonstration", "learned"),
    )
)

DDI = register_dataset(
    DatasetSpec(
        dataset_id="ddi",
        label_ids=("0", "DDI-advise", "DDI-effect", "DDI-int", "DDI-mechanism"),
        abstain_id="0",
        mask_tokens=("@DRUG$",),
        mask_pair=("@DRUG$", "@DRUG$"),
        aliases={"DDI-false": "0", "false": "0", "False": "0"},
        expected_counts={"train": 25296, "dev": 2496, "test": 5716},
        families=("simple", "descriptive", "demonstration", "descriptive+demonstration"),
    )
)

# GAD is binary: "0" is a regular class here, not an abstention, so
# micro-F1 counts it and the calibration loss term is inert.
GAD = register_dataset(
    DatasetSpec(
        dataset_id="gad",
        label_ids=("0", "1"),
        abstain_id=None,
        mask_tokens=("@GENE$", "@DISEASE$"),
        mask_pair=("@GENE$", "@DISEASE$"),
        aliases={},
        expected_counts={"train": 4261, "dev": 535, "test": 534},
        families=("descriptive",),
    )
)

# Small built-in corpus used by the end-to-end demo and the test suite;
# see entailre.synthetic for the generator.
SYNTHETIC = register_dataset(
    DatasetSpec(
        dataset_id="synthetic",
        label_ids=("0", "R1", "R2", "R3", "R4"),
        abstain_id="0",
        mask_tokens=("@HEAD$", "@TAIL$"),
        mask_pair=("@HEAD$", "@TAIL$"),
        aliases={},
        expected_counts={},
        families=("descriptive",),
    )
)
