"""Training objectives over candidate scores, with exact (sub)gradients.

The contrastive term treats the gold candidate as the positive of a
softmax over {gold} + negatives at temperature tau; the calibration term
enforces a margin gamma between the no-relation score and the rest, in
the direction given by the gold label. Both return the gradient of
their value w.r.t. every candidate score so the trainer can backprop
through any differentiable scorer.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import LabelSpace, LossConfig, LossValue, ScoreVector
from .errors import EmptyCandidates, NoAbstainLabel, UnknownLabel


def rank_loss(x1: float, x2: float, gamma: float) -> tuple[float, float, float]:
    """Hinge max(0, gamma - x1 + x2); returns (value, d/dx1, d/dx2).

    The subgradient at the exact boundary takes the inactive branch.
    """
    margin = gamma - x1 + x2
    if margin > 0.0:
        return margin, -1.0, 1.0
    return 0.0, 0.0, 0.0


def _check_candidates(scores: ScoreVector, gold: str, negatives: Sequence[str]) -> list[str]:
    entries = scores.entries
    if gold not in entries:
        raise EmptyCandidates(f"gold {gold!r} has no score on instance {scores.instance_id!r}")
    negs = list(negatives)
    if gold in negs:
        raise ValueError(f"gold {gold!r} must not appear among negatives")
    if len(set(negs)) != len(negs):
        raise ValueError("negatives must be unique")
    for n in negs:
        if n not in entries:
            raise UnknownLabel(f"negative {n!r} has no score on instance {scores.instance_id!r}")
    return negs


def infonce_core(s: np.ndarray, gold_idx: int, neg_idx: np.ndarray, tau: float) -> tuple[float, np.ndarray]:
    """Contrastive loss on a raw score array; returns (value, dvalue/ds).

    value = -log softmax_tau(s)[gold] over positions {gold} + neg_idx,
    computed with max subtraction so tau as small as 0.01 stays finite.
    """
    cand = np.concatenate((np.array([gold_idx], dtype=np.int64), neg_idx.astype(np.int64)))
    z = s[cand] / tau
    m = float(z.max())
    w = np.exp(z - m)
    tot = float(w.sum())
    value = m + math.log(tot) - float(z[0])
    p = w / tot
    grad = np.zeros_like(s)
    grad[gold_idx] += (p[0] - 1.0) / tau
    np.add.at(grad, cand[1:], p[1:] / tau)
    return value, grad


def ac_core(
    s: np.ndarray, gold_idx: int, neg_idx: np.ndarray, abstain_idx: int, gamma: float
) -> tuple[float, np.ndarray]:
    """Calibration loss on a raw score array; returns (value, dvalue/ds).

    Gold is the abstain candidate: its score must beat every negative by
    gamma. Otherwise: the gold score must beat the abstain score by gamma.
    """
    grad = np.zeros_like(s)
    if gold_idx == abstain_idx:
        total = 0.0
        for j in neg_idx:
            v, d1, d2 = rank_loss(float(s[abstain_idx]), float(s[j]), gamma)
            total += v
            grad[abstain_idx] += d1
            grad[j] += d2
        return total, grad
    v, d1, d2 = rank_loss(float(s[gold_idx]), float(s[abstain_idx]), gamma)
    grad[gold_idx] += d1
    grad[abstain_idx] += d2
    return v, grad


def _vectorize(scores: ScoreVector, gold: str, negs: list[str]) -> tuple[list[str], np.ndarray, int, np.ndarray]:
    order = list(scores.entries)
    s = np.array([scores.entries[lid] for lid in order], dtype=np.float64)
    pos = {lid: i for i, lid in enumerate(order)}
    return order, s, pos[gold], np.array([pos[n] for n in negs], dtype=np.int64)


def info_nce(
    scores: ScoreVector, gold: str, negatives: Sequence[str], cfg: LossConfig
) -> tuple[float, dict[str, float]]:
    """Contrastive term; returns (value, gradient per label id)."""
    negs = _check_candidates(scores, gold, negatives)
    order, s, gold_idx, neg_idx = _vectorize(scores, gold, negs)
    value, grad = infonce_core(s, gold_idx, neg_idx, cfg.tau)
    return value, {lid: float(g) for lid, g in zip(order, grad)}


def abstention_calibration(
    scores: ScoreVector, gold: str, negatives: Sequence[str], cfg: LossConfig, space: LabelSpace
) -> tuple[float, dict[str, float]]:
    """Calibration term; requires a space with an abstain label."""
    abstain = space.abstain_id
    if abstain is None:
        raise NoAbstainLabel(f"space {space.dataset_id!r} has no abstain label")
    if abstain not in scores.entries:
        raise EmptyCandidates(f"abstain {abstain!r} has no score on instance {scores.instance_id!r}")
    negs = _check_candidates(scores, gold, negatives)
    order, s, gold_idx, neg_idx = _vectorize(scores, gold, negs)
    value, grad = ac_core(s, gold_idx, neg_idx, order.index(abstain), cfg.gamma)
    return value, {lid: float(g) for lid, g in zip(order, grad)}


def combined_loss(
    scores: ScoreVector, gold: str, negatives: Sequence[str], cfg: LossConfig, space: LabelSpace
) -> LossValue:
    """Contrastive plus lam-weighted calibration; calibration is identically
    zero (and never errors) when the space has no abstain label."""
    nce_v, nce_g = info_nce(scores, gold, negatives, cfg)
    if space.has_abstain:
        ac_v, ac_g = abstention_calibration(scores, gold, negatives, cfg, space)
    else:
        ac_v, ac_g = 0.0, {lid: 0.0 for lid in scores.entries}
    total = nce_v + cfg.lam * ac_v
    dscore = {lid: nce_g[lid] + cfg.lam * ac_g[lid] for lid in scores.entries}
    return LossValue(total=total, nce=nce_v, ac=ac_v, dscore=dscore)


def select_negatives(
    space: LabelSpace, gold: str, cfg: LossConfig, rng: np.random.Generator
) -> tuple[str, ...]:
    """Negative candidates for one instance: every non-gold label, or a
    uniform sample of cfg.negatives of them, kept in space order."""
    others = [lid for lid in space.ids if lid != gold]
    if cfg.negatives == "all" or cfg.negatives >= len(others):
        return tuple(others)
    picked = rng.choice(len(others), size=cfg.negatives, replace=False)
    return tuple(others[i] for i in sorted(picked))
