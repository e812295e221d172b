"""Turn candidate relations into natural-language hypotheses.

A template bank maps (family, label) to a pattern. Patterns keep entity
mask tokens literal (the scorer sees masked text on both sides) and may
contain one exemplar slot filled either by the bank's default exemplar
or by a sentence sampled from training data. Shipped banks reproduce
their source tables byte for byte, including typos; do not "fix" them.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .core import Instance, LabelSpace
from .datasets import get_dataset_spec
from .errors import BadSlot, MissingMask, MissingTemplate, ParseError

# Slot literal inside patterns that take a demonstration sentence.
EXEMPLAR_SLOT = "<example sentence>"

# Family used in bank files for templates valid under any family
# (the shipped no-relation hypotheses are family-independent).
ANY_FAMILY = "any"

FAMILIES = (
    "simple",
    "descriptive",
    "demonstration",
    "descriptive+demonstration",
    "learned",
)

# Binary label ids used by the abstention detector.
BINARY_NO = "no-relation"
BINARY_HAS = "has-relation"
BINARY_FAMILY = "binary"
_BINARY_HAS_PATTERN = "Relation exists between {m1} and {m2}."


@dataclass(frozen=True)
class Template:
    """One verbalization pattern for one label."""

    label_id: str
    family: str
    pattern: str
    exemplar: str | None = None

    @property
    def has_slot(self) -> bool:
        return EXEMPLAR_SLOT in self.pattern

    def assemble(self, exemplar: str | None = None) -> str:
        """Fill the exemplar slot if present; extra exemplars are ignored."""
        if not self.has_slot:
            return self.pattern
        filler = exemplar if exemplar is not None else self.exemplar
        if filler is None:
            raise BadSlot(
                f"template ({self.family!r}, {self.label_id!r}) needs an exemplar and has no default"
            )
        return self.pattern.replace(EXEMPLAR_SLOT, filler)


@dataclass(frozen=True)
class NliQuery:
    """One premise-hypothesis pair to score; query_id is instance_id::label_id."""

    query_id: str
    instance_id: str
    label_id: str
    premise: str
    hypothesis: str


def query_id_for(instance_id: str, label_id: str) -> str:
    return f"{instance_id}::{label_id}"


@dataclass(frozen=True)
class TemplateBank:
    """Templates for one dataset, keyed by (family, label_id)."""

    dataset_id: str
    templates: dict[tuple[str, str], Template]
    mask_tokens: tuple[str, ...] = ()

    def get(self, family: str, label_id: str) -> Template:
        tpl = self.templates.get((family, label_id))
        if tpl is None:
            tpl = self.templates.get((ANY_FAMILY, label_id))
        if tpl is None:
            raise MissingTemplate(f"no template for ({family!r}, {label_id!r}) in bank {self.dataset_id!r}")
        return tpl

    def families(self) -> tuple[str, ...]:
        fams = {fam for fam, _ in self.templates if fam != ANY_FAMILY}
        return tuple(sorted(fams, key=lambda f: FAMILIES.index(f) if f in FAMILIES else len(FAMILIES)))

    def labels_for(self, family: str) -> tuple[str, ...]:
        return tuple(sorted(lid for fam, lid in self.templates if fam in (family, ANY_FAMILY)))

    def missing_labels(self, family: str, space: LabelSpace) -> tuple[str, ...]:
        have = set(self.labels_for(family))
        return tuple(lid for lid in space.ids if lid not in have)


def verbalize(
    label_id: str,
    bank: TemplateBank,
    family: str,
    exemplar: str | None = None,
    validate_masks: bool = True,
) -> str:
    """Return the hypothesis string for one candidate label.

    The assembled string (pattern plus exemplar) must contain every mask
    token the bank requires; the check runs after assembly because some
    shipped patterns only regain a mask through their exemplar.
    """
    hyp = bank.get(family, label_id).assemble(exemplar)
    if validate_masks:
        for tok in bank.mask_tokens:
            if tok not in hyp:
                raise MissingMask(
                    f"hypothesis for ({family!r}, {label_id!r}) lacks required mask {tok!r}: {hyp!r}"
                )
    return hyp


def build_queries(
    instances: list[Instance],
    space: LabelSpace,
    bank: TemplateBank,
    family: str,
    exemplars: dict[str, str] | None = None,
) -> list[NliQuery]:
    """Cross every instance with every candidate label of the space.

    Output order is instances-major, label order within an instance
    following the space. exemplars optionally overrides the bank default
    per label id (used for sampled demonstrations).
    """
    missing = bank.missing_labels(family, space)
    if missing:
        raise MissingTemplate(
            f"bank {bank.dataset_id!r} lacks {family!r} templates for labels {sorted(missing)}"
        )
    exemplars = exemplars or {}
    hyps = {
        lid: verbalize(lid, bank, family, exemplar=exemplars.get(lid))
        for lid in space.ids
    }
    return [
        NliQuery(
            query_id=query_id_for(inst.instance_id, lid),
            instance_id=inst.instance_id,
            label_id=lid,
            premise=inst.sentence,
            hypothesis=hyps[lid],
        )
        for inst in instances
        for lid in space.ids
    ]


def sample_exemplars(
    instances: list[Instance], space: LabelSpace, seed: int
) -> dict[str, str]:
    """Pick one training sentence per label as its demonstration exemplar.

    Deterministic in (instances order, seed); labels with no support are
    left out so the bank default applies.
    """
    rng = np.random.default_rng(seed)
    out: dict[str, str] = {}
    for lid in space.ids:
        pool = [inst.sentence for inst in instances if inst.gold == lid]
        if pool:
            out[lid] = pool[int(rng.integers(len(pool)))]
    return out


def parse_template_bank(
    text: str, dataset_id: str, mask_tokens: tuple[str, ...] | None = None
) -> TemplateBank:
    """Parse bank TSV: label_id, family, pattern, optional exemplar.

    Blank lines and lines starting with '#' are skipped. Later duplicate
    (family, label) rows override earlier ones.
    """
    if mask_tokens is None:
        spec = get_dataset_spec(dataset_id, strict=False)
        mask_tokens = spec.mask_tokens if spec is not None else ()
    templates: dict[tuple[str, str], Template] = {}
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (3, 4):
            raise ParseError(f"template bank line {lineno}: expected 3 or 4 columns, got {len(cols)}")
        label_id, family, pattern = cols[0], cols[1], cols[2]
        exemplar = cols[3] if len(cols) == 4 and cols[3] else None
        if not label_id or not family or not pattern:
            raise ParseError(f"template bank line {lineno}: empty label, family, or pattern")
        if family != ANY_FAMILY and family not in FAMILIES and family != BINARY_FAMILY:
            raise ParseError(f"template bank line {lineno}: unknown family {family!r}")
        templates[(family, label_id)] = Template(label_id, family, pattern, exemplar)
    return TemplateBank(dataset_id=dataset_id, templates=templates, mask_tokens=tuple(mask_tokens))


def load_template_bank(
    path: str | Path, dataset_id: str, mask_tokens: tuple[str, ...] | None = None
) -> TemplateBank:
    text = Path(path).read_text(encoding="utf-8")
    return parse_template_bank(text, dataset_id, mask_tokens)


def save_template_bank(bank: TemplateBank, path: str | Path) -> None:
    """Write the bank TSV with rows sorted by (family order, label id)."""

    def order(key: tuple[str, str]):
        fam, lid = key
        fam_rank = -1 if fam == ANY_FAMILY else (
            FAMILIES.index(fam) if fam in FAMILIES else len(FAMILIES)
        )
        return (fam_rank, lid)

    lines = []
    for key in sorted(bank.templates, key=order):
        tpl = bank.templates[key]
        cols = [tpl.label_id, tpl.family, tpl.pattern]
        if tpl.exemplar is not None:
            cols.append(tpl.exemplar)
        lines.append("\t".join(cols))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def shipped_bank(dataset_id: str) -> TemplateBank:
    """Load the bank distributed with the package for a registered dataset."""
    ref = resources.files("entailre").joinpath(f"data/templates/{dataset_id}.tsv")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise MissingTemplate(f"no shipped template bank for dataset {dataset_id!r}") from exc
    return parse_template_bank(text, dataset_id)


def binary_space(dataset_id: str) -> LabelSpace:
    """Two-label space for the abstention detector of a dataset with abstain."""
    from .core import RelationLabel
    from .errors import NoAbstainLabel

    spec = get_dataset_spec(dataset_id)
    assert spec is not None
    if spec.abstain_id is None:
        raise NoAbstainLabel(f"dataset {dataset_id!r} has no abstain label; detector undefined")
    return LabelSpace(
        dataset_id=f"{dataset_id}#binary",
        labels=(RelationLabel(BINARY_NO, is_abstain=True), RelationLabel(BINARY_HAS)),
    )


def binary_bank(dataset_id: str, base_bank: TemplateBank | None = None) -> TemplateBank:
    """Bank for the detector: the dataset's no-relation hypothesis versus a
    generic "a relation holds" hypothesis on the dataset's mask pair."""
    from .errors import NoAbstainLabel

    spec = get_dataset_spec(dataset_id)
    assert spec is not None
    if spec.abstain_id is None:
        raise NoAbstainLabel(f"dataset {dataset_id!r} has no abstain label; detector undefined")
    base = base_bank if base_bank is not None else shipped_bank(dataset_id)
    no_rel = base.get(BINARY_FAMILY, spec.abstain_id).pattern
    m1, m2 = spec.mask_pair
    has_rel = _BINARY_HAS_PATTERN.format(m1=m1, m2=m2)
    templates = {
        (BINARY_FAMILY, BINARY_NO): Template(BINARY_NO, BINARY_FAMILY, no_rel),
        (BINARY_FAMILY, BINARY_HAS): Template(BINARY_HAS, BINARY_FAMILY, has_rel),
    }
    return TemplateBank(
        dataset_id=f"{dataset_id}#binary", templates=templates, mask_tokens=spec.mask_tokens
    )
