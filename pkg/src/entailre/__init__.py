"""Relation extraction by entailment ranking.

Candidate relations are verbalized into natural-language hypotheses,
scored against the (entity-masked) sentence by a pluggable entailment
scorer, and trained with a contrastive objective plus an abstention
calibration margin. Prediction ranks candidates; an optional second
binary detector catches no-relation cases and ensembles with the ranker.
"""

from .core import (
    ABSTAIN_DEFAULT_ID,
    Instance,
    LabelSpace,
    LossConfig,
    LossValue,
    Prediction,
    RelationLabel,
    ScoreVector,
    validate_instance,
)
from .datasets import DatasetSpec, get_dataset_spec, label_space, register_dataset
from .evaluate import EvalReport, micro_f1
from .experiment import ExperimentConfig, run_experiment
from .inference import (
    EadModel,
    HEURISTICS,
    ead_abstains,
    ead_relabel,
    ead_threshold_sweep,
    ead_train,
    ensemble,
    predict,
    predict_instances,
    score_instances,
)
from .ingest import DatasetFile, SubsampleSpec, load_instances, mask_entities, save_instances, subsample
from .loss import abstention_calibration, combined_loss, info_nce, rank_loss, select_negatives
from .scorer import (
    ExternalScorer,
    MockScorer,
    Scorer,
    ToyScorer,
    ToyScorerParams,
    load_checkpoint,
    save_checkpoint,
    toy_backward,
    toy_forward,
    toy_init,
)
from .trainer import EpochRecord, TrainConfig, train
from .verbalizer import (
    FAMILIES,
    NliQuery,
    Template,
    TemplateBank,
    build_queries,
    load_template_bank,
    sample_exemplars,
    save_template_bank,
    shipped_bank,
    verbalize,
)

__version__ = "0.1.0"
