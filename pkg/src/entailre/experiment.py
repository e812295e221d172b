"""End-to-end experiment orchestration: ingest, train, predict, evaluate.

run_experiment is the single entry point behind the CLI: it resolves
data from paths or in-memory lists, optionally subsamples the train
split, trains (or loads) a scorer, predicts the test split, optionally
ensembles with the abstention detector, and writes predictions plus a
twin text/JSON report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .core import Instance, LabelSpace, LossConfig, Prediction
from .datasets import label_space
from .errors import EmptyCandidates, MissingScores
from .evaluate import EvalReport, micro_f1, save_report
from .inference import (
    ead_abstains,
    ead_score_pairs,
    ead_threshold_sweep,
    ead_train,
    ensemble_predictions,
    predict_instances,
    save_ead_model,
    save_predictions,
)
from .ingest import DatasetFile, SubsampleSpec, load_instances, subsample
from .scorer.external import ExternalScorer
from .scorer.mock import MockScorer
from .scorer.toy import ToyScorer, save_checkpoint, toy_init
from .trainer import TrainConfig, train
from .verbalizer import TemplateBank, load_template_bank, sample_exemplars, shipped_bank

SCORERS = ("toy", "mock", "external")


@dataclass
class ExperimentConfig:
    dataset_id: str
    family: str = "descriptive"
    fmt: str = "tsv-masked"
    train_path: str | None = None
    dev_path: str | None = None
    test_path: str | None = None
    train_data: list[Instance] | None = None
    dev_data: list[Instance] | None = None
    test_data: list[Instance] | None = None
    bank_path: str | None = None
    subsample: SubsampleSpec | None = None
    loss: LossConfig = field(default_factory=LossConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    scorer: str = "toy"
    mock_table: str | None = None
    external_cmd: tuple[str, ...] | None = None
    heuristic: str | None = None
    exemplar_seed: int | None = None
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.scorer not in SCORERS:
            raise ValueError(f"unknown scorer {self.scorer!r}; expected one of {SCORERS}")


def _resolve_split(cfg: ExperimentConfig, space: LabelSpace, which: str) -> list[Instance]:
    data = getattr(cfg, f"{which}_data")
    if data is not None:
        return data
    path = getattr(cfg, f"{which}_path")
    if path is None:
        return []
    return load_instances(DatasetFile(path, cfg.fmt, split=which), space)


def _bank(cfg: ExperimentConfig) -> TemplateBank:
    if cfg.bank_path is not None:
        return load_template_bank(cfg.bank_path, cfg.dataset_id)
    return shipped_bank(cfg.dataset_id)


def run_experiment(cfg: ExperimentConfig) -> tuple[EvalReport, dict[str, str]]:
    """Run the configured experiment; returns the test report and the paths
    of any artifacts written under cfg.out_dir."""
    space = label_space(cfg.dataset_id)
    bank = _bank(cfg)
    train_data = _resolve_split(cfg, space, "train")
    dev_data = _resolve_split(cfg, space, "dev")
    test_data = _resolve_split(cfg, space, "test")
    if not test_data:
        raise EmptyCandidates("experiment needs a non-empty test split")
    if cfg.subsample is not None:
        train_data = subsample(train_data, cfg.subsample, space)
    exemplars = (
        sample_exemplars(train_data, space, cfg.exemplar_seed)
        if cfg.exemplar_seed is not None
        else None
    )

    trained_params = None
    if cfg.scorer == "mock":
        if cfg.mock_table is None:
            raise MissingScores("mock scorer needs a table file")
        scorer = MockScorer.from_file(cfg.mock_table)
    elif cfg.scorer == "external":
        if not cfg.external_cmd:
            raise MissingScores("external scorer needs a command")
        scorer = ExternalScorer.from_command(list(cfg.external_cmd))
    else:
        if train_data and cfg.train.epochs > 0:
            trained_params, _ = train(
                train_data, dev_data, space, bank, cfg.family, cfg.loss, cfg.train, exemplars
            )
        else:
            trained_params = toy_init(cfg.train.hash_dim, cfg.train.hidden, cfg.train.seed)
        scorer = ToyScorer(trained_params)

    try:
        test_preds = predict_instances(test_data, space, bank, cfg.family, scorer, exemplars)
        ead_model = None
        if cfg.heuristic is not None:
            if not (train_data and dev_data):
                raise EmptyCandidates("detector ensembling needs train and dev splits")
            ead_model = ead_train(train_data, dev_data, space, cfg.loss, cfg.train, bank)
            dev_preds = predict_instances(dev_data, space, bank, cfg.family, scorer, exemplars)
            ead_model.threshold = ead_threshold_sweep(
                ead_model, dev_data, dev_preds, space, cfg.heuristic
            )
            flags = ead_abstains(ead_model, test_data)
            abstain_scores = [s_no for s_no, _ in ead_score_pairs(ead_model, test_data)]
            final = ensemble_predictions(
                test_preds, flags, cfg.heuristic, space, ead_abstain_scores=abstain_scores
            )
            test_preds = [
                Prediction(p.instance_id, lab, p.scores) for p, lab in zip(test_preds, final)
            ]
    finally:
        if cfg.scorer == "external":
            scorer.close()

    report = micro_f1([inst.gold for inst in test_data], [p.predicted for p in test_preds], space)

    artifacts: dict[str, str] = {}
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_predictions(test_preds, space, out / "predictions.tsv")
        save_report(report, out / "report.txt", out / "report.json")
        artifacts = {
            "predictions": str(out / "predictions.tsv"),
            "report_txt": str(out / "report.txt"),
            "report_json": str(out / "report.json"),
        }
        if trained_params is not None:
            save_checkpoint(
                out / "checkpoint.npz",
                trained_params,
                {"kind": "ranker", "dataset_id": cfg.dataset_id, "family": cfg.family},
            )
            artifacts["checkpoint"] = str(out / "checkpoint.npz")
        if ead_model is not None:
            save_ead_model(ead_model, out / "ead.npz")
            artifacts["ead"] = str(out / "ead.npz")
    return report, artifacts
