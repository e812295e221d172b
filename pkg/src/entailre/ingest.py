"""Dataset ingestion: file parsing, entity masking, and subsampling.

Two on-disk formats are supported. tsv-masked rows are
id<TAB>sentence<TAB>label (or sentence<TAB>label, ids becoming row
numbers); jsonl-spans rows carry raw text plus two character spans that
get replaced by typed mask tokens here. All subsampling is deterministic
in (input order, seed) and returns instances in their original order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Instance, LabelSpace, validate_instance
from .datasets import get_dataset_spec
from .errors import ParseError, SpanError, UnknownLabel

FORMATS = ("tsv-masked", "jsonl-spans")

SUBSAMPLE_MODES = ("kshot", "percent", "zeroshot")


@dataclass(frozen=True)
class DatasetFile:
    """A dataset location: path, format name, optional split tag."""

    path: str
    fmt: str = "tsv-masked"
    split: str | None = None

    def __post_init__(self) -> None:
        if self.fmt not in FORMATS:
            raise ValueError(f"unknown format {self.fmt!r}; expected one of {FORMATS}")


@dataclass(frozen=True)
class SubsampleSpec:
    """How to shrink a training split: k per label, a fraction, or nothing."""

    mode: str
    k: int | None = None
    p: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in SUBSAMPLE_MODES:
            raise ValueError(f"unknown subsample mode {self.mode!r}; expected one of {SUBSAMPLE_MODES}")
        if self.mode == "kshot" and not (isinstance(self.k, int) and self.k > 0):
            raise ValueError(f"kshot needs a positive integer k, got {self.k!r}")
        if self.mode == "percent" and not (self.p is not None and 0.0 < self.p <= 1.0):
            raise ValueError(f"percent needs p in (0, 1], got {self.p!r}")


def mask_entities(
    text: str, span1: tuple[int, int, str], span2: tuple[int, int, str]
) -> str:
    """Replace two character spans with their typed mask tokens.

    Spans are (start, end, entity_type) with 0 <= start < end <= len(text)
    and no overlap; the rightmost span is replaced first so offsets stay
    valid.
    """
    for start, end, etype in (span1, span2):
        if not (0 <= start < end <= len(text)):
            raise SpanError(f"span ({start}, {end}) out of bounds for text of length {len(text)}")
        if not etype:
            raise SpanError("span entity type must be non-empty")
    (s1, e1, t1), (s2, e2, t2) = span1, span2
    if max(s1, s2) < min(e1, e2):
        raise SpanError(f"spans ({s1}, {e1}) and ({s2}, {e2}) overlap")
    first, second = ((s1, e1, t1), (s2, e2, t2)) if s1 <= s2 else ((s2, e2, t2), (s1, e1, t1))
    out = text[: second[0]] + f"@{second[2].upper()}$" + text[second[1] :]
    out = out[: first[0]] + f"@{first[2].upper()}$" + out[first[1] :]
    return out


def _resolve_label(raw: str, space: LabelSpace) -> str:
    spec = get_dataset_spec(space.dataset_id, strict=False)
    if spec is not None:
        return spec.resolve_label(raw)
    if raw not in space:
        raise UnknownLabel(f"label {raw!r} not in space {space.dataset_id!r}")
    return raw


def _parse_tsv_masked(text: str, space: LabelSpace) -> list[Instance]:
    instances: list[Instance] = []
    arity: int | None = None
    row = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            raise ParseError(f"tsv-masked line {lineno}: expected 2 or 3 columns, got {len(cols)}")
        if arity is None:
            arity = len(cols)
        elif len(cols) != arity:
            raise ParseError(f"tsv-masked line {lineno}: mixed {arity}- and {len(cols)}-column rows")
        if arity == 3:
            iid, sentence, label = cols
        else:
            iid, (sentence, label) = str(row), cols
        if not iid or not sentence:
            raise ParseError(f"tsv-masked line {lineno}: empty id or sentence")
        instances.append(Instance(iid, sentence, _resolve_label(label, space)))
        row += 1
    return instances


def _parse_jsonl_spans(text: str, space: LabelSpace) -> list[Instance]:
    instances: list[Instance] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"jsonl-spans line {lineno}: invalid JSON: {exc}") from exc
        try:
            spans = tuple(
                (int(rec[key]["start"]), int(rec[key]["end"]), str(rec[key]["type"]))
                for key in ("span1", "span2")
            )
            iid, raw_text, label = str(rec["id"]), str(rec["text"]), str(rec["label"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"jsonl-spans line {lineno}: missing or malformed field: {exc}") from exc
        sentence = mask_entities(raw_text, spans[0], spans[1])
        instances.append(Instance(iid, sentence, _resolve_label(label, space)))
    return instances


def load_instances(file: DatasetFile, space: LabelSpace, validate: bool = True) -> list[Instance]:
    """Load and validate one split; emits a stderr warning when a known
    split's size disagrees with the dataset's published counts."""
    text = Path(file.path).read_text(encoding="utf-8")
    if file.fmt == "tsv-masked":
        instances = _parse_tsv_masked(text, space)
    else:
        instances = _parse_jsonl_spans(text, space)
    ids = [inst.instance_id for inst in instances]
    if len(set(ids)) != len(ids):
        raise ParseError(f"{file.path}: duplicate instance ids")
    if validate:
        for inst in instances:
            validate_instance(inst, space)
    spec = get_dataset_spec(space.dataset_id, strict=False)
    if spec is not None and file.split in spec.expected_counts:
        expected = spec.expected_counts[file.split]
        if expected != len(instances):
            import sys

            print(
                f"warning: {file.path}: {file.split} split has {len(instances)} instances, "
                f"published size is {expected}",
                file=sys.stderr,
            )
    return instances


def save_instances(instances: Sequence[Instance], path: str | Path) -> None:
    lines = [f"{inst.instance_id}\t{inst.sentence}\t{inst.gold}" for inst in instances]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def subsample(instances: Sequence[Instance], spec: SubsampleSpec, space: LabelSpace) -> list[Instance]:
    """Shrink a split per spec; output preserves the original instance order.

    kshot takes min(k, available) per non-abstain label plus an abstain
    sample sized to preserve the source abstain fraction f:
    round(total_picked * f / (1 - f)), capped at availability. percent
    takes ceil(p * n) total, stratified per label with largest-remainder
    rounding. Draws happen label by label in space order from one
    seeded generator.
    """
    if spec.mode == "zeroshot":
        return []
    rng = np.random.default_rng(spec.seed)
    pools: dict[str, list[int]] = {lid: [] for lid in space.ids}
    for i, inst in enumerate(instances):
        if inst.gold not in space:
            raise UnknownLabel(f"instance {inst.instance_id!r}: gold {inst.gold!r} not in space")
        pools[inst.gold].append(i)
    picked: set[int] = set()

    def draw(pool: list[int], size: int) -> None:
        if size >= len(pool):
            picked.update(pool)
        elif size > 0:
            chosen = rng.choice(len(pool), size=size, replace=False)
            picked.update(pool[j] for j in chosen)

    if spec.mode == "kshot":
        assert spec.k is not None
        for lid in space.non_abstain_ids:
            draw(pools[lid], spec.k)
        n_picked = len(picked)
        abstain = space.abstain_id
        if abstain is not None:
            n_abst = len(pools[abstain])
            f = n_abst / len(instances) if instances else 0.0
            m = n_abst if f >= 1.0 else int(round(n_picked * f / (1.0 - f)))
            draw(pools[abstain], min(m, n_abst))
    else:
        assert spec.p is not None
        total = math.ceil(spec.p * len(instances))
        base = {lid: math.floor(spec.p * len(pools[lid])) for lid in space.ids}
        remainder = {lid: spec.p * len(pools[lid]) - base[lid] for lid in space.ids}
        need = total - sum(base.values())
        bonus_order = sorted(
            space.ids, key=lambda lid: (-remainder[lid], space.index(lid))
        )
        quota = dict(base)
        for lid in bonus_order:
            if need <= 0:
                break
            if quota[lid] < len(pools[lid]):
                quota[lid] += 1
                need -= 1
        for lid in space.ids:
            draw(pools[lid], quota[lid])
    return [instances[i] for i in sorted(picked)]
