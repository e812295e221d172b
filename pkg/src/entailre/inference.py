"""Prediction, the explicit abstention detector, and ensembling.

Prediction is argmax over candidate scores with ties broken by label
order (shipped spaces put the abstain label first, so an exact tie
abstains). The detector is a second toy scorer trained on binary
relabeled data with the pure margin loss; its abstain decision is
"no-relation score minus has-relation score exceeds a threshold", the
threshold chosen by sweeping observed dev differences and keeping the
smallest value that maximizes ensembled dev micro-F1.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Instance, LabelSpace, LossConfig, Prediction, ScoreVector
from .errors import (
    CheckpointError,
    EmptyCandidates,
    MissingScores,
    NoAbstainLabel,
    ParseError,
    UnknownLabel,
)
from .evaluate import micro_f1
from .scorer.base import Scorer
from .scorer.toy import ToyScorer, ToyScorerParams, load_checkpoint, save_checkpoint
from .trainer import TrainConfig, train
from .verbalizer import (
    BINARY_FAMILY,
    BINARY_HAS,
    BINARY_NO,
    TemplateBank,
    binary_bank,
    binary_space,
    build_queries,
)

HEURISTICS = ("simple", "voting", "confident", "super-confident", "classification")


def predict(scores: ScoreVector, space: LabelSpace) -> Prediction:
    """Highest-scoring candidate; ties go to the earlier label in the space."""
    best_lid: str | None = None
    best = -np.inf
    for lid in space.ids:
        if lid not in scores.entries:
            raise EmptyCandidates(
                f"instance {scores.instance_id!r} has no score for candidate {lid!r}"
            )
        v = scores.entries[lid]
        if v > best:
            best, best_lid = v, lid
    assert best_lid is not None
    return Prediction(scores.instance_id, best_lid, dict(scores.entries))


def score_instances(
    instances: Sequence[Instance],
    space: LabelSpace,
    bank: TemplateBank,
    family: str,
    scorer: Scorer,
    exemplars: dict[str, str] | None = None,
) -> list[ScoreVector]:
    """One ScoreVector per instance, in input order."""
    queries = build_queries(list(instances), space, bank, family, exemplars)
    scored = scorer.score_batch(queries)
    width = len(space)
    out: list[ScoreVector] = []
    for i, inst in enumerate(instances):
        chunk = scored[i * width : (i + 1) * width]
        entries = {space.ids[j]: float(chunk[j][1]) for j in range(width)}
        out.append(ScoreVector(inst.instance_id, entries))
    return out


def predict_instances(
    instances: Sequence[Instance],
    space: LabelSpace,
    bank: TemplateBank,
    family: str,
    scorer: Scorer,
    exemplars: dict[str, str] | None = None,
) -> list[Prediction]:
    return [predict(sv, space) for sv in score_instances(instances, space, bank, family, scorer, exemplars)]


def ead_relabel(instances: Sequence[Instance], space: LabelSpace) -> list[Instance]:
    """Map gold labels onto the binary detector space: abstain or not."""
    if not space.has_abstain:
        raise NoAbstainLabel(f"space {space.dataset_id!r} has no abstain label to detect")
    abstain = space.abstain_id
    out = []
    for inst in instances:
        if inst.gold not in space:
            raise UnknownLabel(f"instance {inst.instance_id!r}: gold {inst.gold!r} not in space")
        out.append(
            Instance(inst.instance_id, inst.sentence, BINARY_NO if inst.gold == abstain else BINARY_HAS)
        )
    return out


@dataclass
class EadModel:
    """Trained detector: binary scorer parameters plus the swept threshold.

    hypotheses holds the (no-relation, has-relation) strings the model
    was trained with; threshold is None until a sweep sets it.
    """

    dataset_id: str
    params: ToyScorerParams
    hypotheses: tuple[str, str]
    threshold: float | None = None


def ead_train(
    train_data: Sequence[Instance],
    dev_data: Sequence[Instance],
    space: LabelSpace,
    loss_cfg: LossConfig,
    train_cfg: TrainConfig,
    base_bank: TemplateBank | None = None,
) -> EadModel:
    """Train the detector on binary-relabeled data with the margin loss."""
    bspace = binary_space(space.dataset_id)
    bbank = binary_bank(space.dataset_id, base_bank)
    params, _ = train(
        ead_relabel(train_data, space),
        ead_relabel(dev_data, space),
        bspace,
        bbank,
        BINARY_FAMILY,
        loss_cfg,
        train_cfg,
        mode="rank",
    )
    hyps = (
        bbank.get(BINARY_FAMILY, BINARY_NO).pattern,
        bbank.get(BINARY_FAMILY, BINARY_HAS).pattern,
    )
    return EadModel(dataset_id=space.dataset_id, params=params, hypotheses=hyps)


def ead_score_pairs(model: EadModel, instances: Sequence[Instance], backend=None) -> list[tuple[float, float]]:
    """(no-relation score, has-relation score) per instance."""
    scorer = ToyScorer(model.params, backend)
    # Score directly from the stored hypothesis strings so a loaded model
    # never depends on the current shipped bank.
    from .verbalizer import NliQuery, query_id_for

    no_hyp, has_hyp = model.hypotheses
    queries = []
    for inst in instances:
        queries.append(NliQuery(query_id_for(inst.instance_id, BINARY_NO), inst.instance_id, BINARY_NO, inst.sentence, no_hyp))
        queries.append(NliQuery(query_id_for(inst.instance_id, BINARY_HAS), inst.instance_id, BINARY_HAS, inst.sentence, has_hyp))
    scored = scorer.score_batch(queries)
    return [(scored[2 * i][1], scored[2 * i + 1][1]) for i in range(len(instances))]


def ead_abstains(model: EadModel, instances: Sequence[Instance], backend=None) -> list[bool]:
    """Strict rule: abstain iff s(no-relation) - s(has-relation) > threshold."""
    if model.threshold is None:
        raise MissingScores("detector threshold is unset; run ead_threshold_sweep first")
    return [s_no - s_has > model.threshold for s_no, s_has in ead_score_pairs(model, instances, backend)]


def ensemble(
    nbr_pred: Prediction,
    ead_abstain: bool,
    heuristic: str,
    space: LabelSpace,
    ead_abstain_score: float | None = None,
    classifier_abstains: bool | None = None,
) -> str:
    """Combine the ranker's prediction with the detector's abstain call.

    simple: detector abstains -> abstain; else the ranker's prediction
      (which may itself abstain).
    voting: abstain iff both abstain; a ranker abstention the detector
      rejects falls back to the best non-abstain candidate.
    confident: abstain only when the detector abstains and its
      no-relation score beats the ranker's; else the ranker's prediction.
    super-confident: detector abstention wins; otherwise a detector
      no-relation score above the ranker's forces the best non-abstain
      candidate; otherwise the ranker's prediction.
    classification: like simple but driven by an external binary
      classifier's decision.
    """
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}; expected one of {HEURISTICS}")
    abstain = space.abstain_id
    if abstain is None:
        raise NoAbstainLabel(f"space {space.dataset_id!r} has no abstain label to ensemble over")
    nbr_abstains = nbr_pred.predicted == abstain

    def best_non_abstain() -> str:
        cands = [lid for lid in space.non_abstain_ids if lid in nbr_pred.scores]
        if not cands:
            raise EmptyCandidates(f"no non-abstain scores on instance {nbr_pred.instance_id!r}")
        # max keeps the first maximal element, i.e. ties follow space order.
        return max(cands, key=lambda lid: nbr_pred.scores[lid])

    if heuristic == "simple":
        return abstain if ead_abstain else nbr_pred.predicted
    if heuristic == "voting":
        if nbr_abstains and ead_abstain:
            return abstain
        if nbr_abstains:
            return best_non_abstain()
        return nbr_pred.predicted
    if heuristic in ("confident", "super-confident"):
        if ead_abstain_score is None:
            raise MissingScores(f"heuristic {heuristic!r} needs the detector's no-relation score")
        if abstain not in nbr_pred.scores:
            raise MissingScores(f"instance {nbr_pred.instance_id!r} lacks a ranker abstain score")
        detector_wins = ead_abstain_score > nbr_pred.scores[abstain]
        if heuristic == "confident":
            return abstain if (ead_abstain and detector_wins) else nbr_pred.predicted
        if ead_abstain:
            return abstain
        if detector_wins:
            return best_non_abstain()
        return nbr_pred.predicted
    # classification
    if classifier_abstains is None:
        raise MissingScores("heuristic 'classification' needs the external classifier's decision")
    return abstain if classifier_abstains else nbr_pred.predicted


def ensemble_predictions(
    nbr_preds: Sequence[Prediction],
    ead_flags: Sequence[bool],
    heuristic: str,
    space: LabelSpace,
    ead_abstain_scores: Sequence[float] | None = None,
    classifier_flags: Sequence[bool] | None = None,
) -> list[str]:
    if len(nbr_preds) != len(ead_flags):
        raise ValueError("nbr_preds and ead_flags differ in length")
    out = []
    for i, (pred, flag) in enumerate(zip(nbr_preds, ead_flags)):
        out.append(
            ensemble(
                pred,
                flag,
                heuristic,
                space,
                ead_abstain_score=None if ead_abstain_scores is None else ead_abstain_scores[i],
                classifier_abstains=None if classifier_flags is None else classifier_flags[i],
            )
        )
    return out


def ead_threshold_sweep(
    model: EadModel,
    dev_data: Sequence[Instance],
    dev_nbr_preds: Sequence[Prediction],
    space: LabelSpace,
    heuristic: str = "simple",
    classifier_flags: Sequence[bool] | None = None,
    backend=None,
) -> float:
    """Pick the detector threshold maximizing ensembled dev micro-F1.

    Candidates are the observed dev score differences; ties keep the
    smallest threshold. The swept rule is strict (abstain iff diff > t).
    """
    if not dev_data:
        raise EmptyCandidates("threshold sweep needs a non-empty dev split")
    if len(dev_data) != len(dev_nbr_preds):
        raise ValueError("dev_data and dev_nbr_preds differ in length")
    pairs = ead_score_pairs(model, dev_data, backend)
    diffs = [s_no - s_has for s_no, s_has in pairs]
    abstain_scores = [s_no for s_no, _ in pairs]
    golds = [inst.gold for inst in dev_data]
    best_t = None
    best_f1 = -1.0
    for t in sorted(set(diffs)):
        flags = [d > t for d in diffs]
        preds = ensemble_predictions(
            dev_nbr_preds, flags, heuristic, space,
            ead_abstain_scores=abstain_scores, classifier_flags=classifier_flags,
        )
        f1 = micro_f1(golds, preds, space).micro_f1
        if f1 > best_f1:
            best_f1, best_t = f1, t
    assert best_t is not None
    return best_t


def save_ead_model(model: EadModel, path: str | Path) -> None:
    meta = {
        "kind": "ead",
        "dataset_id": model.dataset_id,
        "hypothesis_no": model.hypotheses[0],
        "hypothesis_has": model.hypotheses[1],
    }
    if model.threshold is not None:
        meta["threshold"] = repr(model.threshold)
    save_checkpoint(path, model.params, meta)


def load_ead_model(path: str | Path) -> EadModel:
    params, meta = load_checkpoint(path)
    if meta.get("kind") != "ead":
        raise CheckpointError(f"checkpoint {path} is not a detector checkpoint")
    if "dataset_id" not in meta or "hypothesis_no" not in meta or "hypothesis_has" not in meta:
        raise CheckpointError(f"detector checkpoint {path} lacks metadata fields")
    threshold = float(meta["threshold"]) if "threshold" in meta else None
    return EadModel(
        dataset_id=meta["dataset_id"],
        params=params,
        hypotheses=(meta["hypothesis_no"], meta["hypothesis_has"]),
        threshold=threshold,
    )


def save_predictions(preds: Sequence[Prediction], space: LabelSpace, path: str | Path) -> None:
    """TSV: id, predicted, then one score column per candidate in space order."""
    header = "id\tpredicted\t" + "\t".join(space.ids)
    lines = [header]
    for p in preds:
        cells = [p.instance_id, p.predicted]
        for lid in space.ids:
            if lid not in p.scores:
                raise EmptyCandidates(f"prediction {p.instance_id!r} lacks a score for {lid!r}")
            cells.append(repr(float(p.scores[lid])))
        lines.append("\t".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_predictions(path: str | Path, space: LabelSpace) -> list[Prediction]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"predictions file {path} is empty")
    expected_header = "id\tpredicted\t" + "\t".join(space.ids)
    if lines[0] != expected_header:
        raise ParseError(
            f"predictions file {path}: header does not match space {space.dataset_id!r}"
        )
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 2 + len(space):
            raise ParseError(f"predictions file {path} line {lineno}: wrong column count")
        iid, predicted = cols[0], cols[1]
        if predicted not in space:
            raise UnknownLabel(f"predictions file {path} line {lineno}: unknown label {predicted!r}")
        try:
            scores = {lid: float(c) for lid, c in zip(space.ids, cols[2:])}
        except ValueError as exc:
            raise ParseError(f"predictions file {path} line {lineno}: bad score: {exc}") from exc
        out.append(Prediction(iid, predicted, scores))
    return out
