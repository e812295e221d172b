"""Plain SGD training of the toy scorer through the ranking objectives.

One step per instance per epoch: forward all candidate hypotheses, get
the loss gradient w.r.t. candidate scores, backpropagate into the
parameters, update in place. Candidate feature bags are hashed once
before the first epoch. Identical data, config, and seed give a
bit-identical run on one platform and backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, LabelSpace, LossConfig
from .errors import DivergedLoss, EmptyCandidates
from .evaluate import micro_f1
from .kernels import get_backend
from .loss import ac_core, infonce_core, rank_loss
from .scorer.toy import DEFAULT_HASH_DIM, DEFAULT_HIDDEN, HashingFeaturizer, ToyScorerParams, toy_init
from .verbalizer import TemplateBank, build_queries

MODES = ("combined", "rank")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    step_size: float = 0.05
    eval_every: int = 10
    seed: int = 0
    shuffle: bool = True
    hash_dim: int = DEFAULT_HASH_DIM
    hidden: int = DEFAULT_HIDDEN

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if not self.step_size > 0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")


@dataclass(frozen=True)
class EpochRecord:
    """Per-epoch history row; dev_f1 is None on epochs without evaluation."""

    epoch: int
    train_loss: float
    dev_f1: float | None


class _PackedSplit:
    """All candidate features of a split, instance-major, CSR-packed."""

    def __init__(
        self,
        instances: list[Instance],
        space: LabelSpace,
        bank: TemplateBank,
        family: str,
        featurizer: HashingFeaturizer,
        exemplars: dict[str, str] | None,
    ):
        queries = build_queries(instances, space, bank, family, exemplars)
        self.idx, self.cnt, self.offs = featurizer.pack(
            [(q.premise, q.hypothesis) for q in queries]
        )
        self.n = len(instances)
        self.width = len(space)
        self.gold_pos = np.array([space.index(inst.gold) for inst in instances], dtype=np.int64)
        self.golds = [inst.gold for inst in instances]

    def candidate_slice(self, i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lo = i * self.width
        hi = lo + self.width
        base = self.offs[lo]
        return (
            self.idx[self.offs[lo] : self.offs[hi]],
            self.cnt[self.offs[lo] : self.offs[hi]],
            self.offs[lo : hi + 1] - base,
        )

    def forward_all(self, params: ToyScorerParams, backend) -> np.ndarray:
        scores, _ = backend.forward_batch(
            self.idx, self.cnt, self.offs, params.W1, params.b1, params.w2, params.b2
        )
        return scores.reshape(self.n, self.width)


def _dev_f1(packed: _PackedSplit, params: ToyScorerParams, space: LabelSpace, backend) -> float:
    scores = packed.forward_all(params, backend)
    preds = [space.ids[j] for j in np.argmax(scores, axis=1)]
    return micro_f1(packed.golds, preds, space).micro_f1


def train(
    train_data: list[Instance],
    dev_data: list[Instance],
    space: LabelSpace,
    bank: TemplateBank,
    family: str,
    loss_cfg: LossConfig,
    train_cfg: TrainConfig,
    exemplars: dict[str, str] | None = None,
    mode: str = "combined",
    backend=None,
) -> tuple[ToyScorerParams, list[EpochRecord]]:
    """Train on train_data, tracking dev micro-F1 every eval_every epochs
    (and on the final epoch); returns the best-on-dev parameters and the
    epoch history. Without dev data (or evaluations) the last epoch wins;
    dev ties keep the earlier epoch.

    mode "combined" is the full objective; mode "rank" is the pure margin
    loss between the two candidates of a binary space (the abstention
    detector's objective).
    """
    if mode not in MODES:
        raise ValueError(f"unknown training mode {mode!r}; expected one of {MODES}")
    if not train_data:
        raise EmptyCandidates("training set is empty")
    if mode == "rank" and len(space) != 2:
        raise ValueError(f"rank mode needs a binary space, got {len(space)} labels")

    backend = backend if backend is not None else get_backend()
    featurizer = HashingFeaturizer(train_cfg.hash_dim)
    packed = _PackedSplit(train_data, space, bank, family, featurizer, exemplars)
    packed_dev = (
        _PackedSplit(dev_data, space, bank, family, featurizer, exemplars) if dev_data else None
    )

    params = toy_init(train_cfg.hash_dim, train_cfg.hidden, seed=train_cfg.seed)
    shuffle_rng = np.random.default_rng([train_cfg.seed, 1])
    neg_rng = np.random.default_rng([train_cfg.seed, 2])

    width = packed.width
    all_pos = np.arange(width, dtype=np.int64)
    others_pos = [all_pos[all_pos != packed.gold_pos[i]] for i in range(packed.n)]
    abstain_pos = space.index(space.abstain_id) if space.has_abstain else -1
    sample_n = None if loss_cfg.negatives == "all" else int(loss_cfg.negatives)

    lr = train_cfg.step_size
    history: list[EpochRecord] = []
    best: tuple[float, ToyScorerParams] | None = None

    for epoch in range(1, train_cfg.epochs + 1):
        order = shuffle_rng.permutation(packed.n) if train_cfg.shuffle else np.arange(packed.n)
        loss_sum = 0.0
        for i in order:
            idx, cnt, offs = packed.candidate_slice(int(i))
            scores, acts = backend.forward_batch(
                idx, cnt, offs, params.W1, params.b1, params.w2, params.b2
            )
            gold_pos = int(packed.gold_pos[i])
            if mode == "rank":
                other = 1 - gold_pos
                total, d_gold, d_other = rank_loss(
                    float(scores[gold_pos]), float(scores[other]), loss_cfg.gamma
                )
                dscores = np.zeros(width, dtype=np.float64)
                dscores[gold_pos] = d_gold
                dscores[other] = d_other
            else:
                negs = others_pos[int(i)]
                if sample_n is not None and sample_n < negs.shape[0]:
                    take = neg_rng.choice(negs.shape[0], size=sample_n, replace=False)
                    negs = negs[np.sort(take)]
                total, dscores = infonce_core(scores, gold_pos, negs, loss_cfg.tau)
                if abstain_pos >= 0:
                    ac_v, ac_g = ac_core(scores, gold_pos, negs, abstain_pos, loss_cfg.gamma)
                    total += loss_cfg.lam * ac_v
                    dscores += loss_cfg.lam * ac_g
            if not math.isfinite(total):
                raise DivergedLoss(f"non-finite loss at epoch {epoch}")
            loss_sum += total
            if np.any(dscores):
                dvals, db1, dw2, db2 = backend.backward_batch(dscores, acts, idx, cnt, offs, params.w2)
                backend.scatter_add(params.W1, idx, dvals, -lr)
                params.b1 -= lr * db1
                params.w2 -= lr * dw2
                params.b2 -= lr * db2

        dev_f1 = None
        if packed_dev is not None and (epoch % train_cfg.eval_every == 0 or epoch == train_cfg.epochs):
            dev_f1 = _dev_f1(packed_dev, params, space, backend)
            if best is None or dev_f1 > best[0]:
                best = (dev_f1, params.copy())
        history.append(EpochRecord(epoch=epoch, train_loss=loss_sum / packed.n, dev_f1=dev_f1))

    final = best[1] if best is not None else params
    return final, history
