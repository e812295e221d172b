"""Finite-difference verification of every analytic gradient in the package.

Checks run at three levels: the loss gradients w.r.t. candidate scores,
the toy scorer's score gradient w.r.t. its parameters, and the full
chain (parameters through scorer through combined loss). Central
differences with step 1e-4; a coordinate passes when
|analytic - numeric| / max(|analytic|, |numeric|, 1e-4) <= 1e-4, the
floor keeping round-off noise on near-zero gradients from registering
as failures. Hinge losses are only piecewise differentiable, so
configurations are redrawn until every margin sits at least 1e-3 away
from its kink; the perturbations used here move scores by well under
that buffer.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import LabelSpace, LossConfig, RelationLabel, ScoreVector
from .loss import combined_loss
from .scorer.toy import HashingFeaturizer, ToyScorerParams, toy_backward, toy_forward, toy_init

STEP = 1e-4
TOL = 1e-4
FLOOR = 1e-4
KINK_BUFFER = 1e-3

TAUS = (0.01, 0.05, 0.3, 1.0)
LAMS = (0.0, 0.5, 1.0, 3.0)


def relative_error(analytic: float, numeric: float, floor: float = FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def central_diff(fn: Callable[[float], float], x: float, step: float = STEP) -> float:
    return (fn(x + step) - fn(x - step)) / (2.0 * step)


def _space(n_labels: int, has_abstain: bool) -> LabelSpace:
    labels = tuple(
        RelationLabel(f"y{j}", is_abstain=(has_abstain and j == 0)) for j in range(n_labels)
    )
    return LabelSpace("gradcheck", labels)


def _margins_clear(scores: dict[str, float], gold: str, negatives: tuple[str, ...],
                   space: LabelSpace, cfg: LossConfig) -> bool:
    """True when no calibration hinge sits within KINK_BUFFER of its boundary."""
    abstain = space.abstain_id
    if abstain is None:
        return True
    if gold == abstain:
        return all(
            abs(cfg.gamma - scores[abstain] + scores[n]) > KINK_BUFFER for n in negatives
        )
    return abs(cfg.gamma - scores[gold] + scores[abstain]) > KINK_BUFFER


def _draw_config(rng: np.random.Generator, i: int):
    n_labels = int(rng.integers(2, 7))
    has_abstain = bool(rng.random() < 0.75)
    space = _space(n_labels, has_abstain)
    cfg = LossConfig(
        tau=TAUS[i % len(TAUS)],
        gamma=float(rng.uniform(0.1, 1.0)),
        lam=LAMS[(i // len(TAUS)) % len(LAMS)],
    )
    gold = space.ids[int(rng.integers(n_labels))]
    others = [lid for lid in space.ids if lid != gold]
    n_neg = int(rng.integers(1, len(others) + 1))
    picked = rng.choice(len(others), size=n_neg, replace=False)
    negatives = tuple(others[j] for j in sorted(picked))
    return space, cfg, gold, negatives


def check_loss_gradients(n_configs: int = 120, seed: int = 0, step: float = STEP,
                         tol: float = TOL) -> list[str]:
    """Compare combined_loss dscore to central differences per coordinate."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(n_configs):
        space, cfg, gold, negatives = _draw_config(rng, i)
        for _ in range(200):
            scores = {lid: float(rng.uniform(-1.0, 1.0)) for lid in space.ids}
            if _margins_clear(scores, gold, negatives, space, cfg):
                break
        else:
            failures.append(f"config {i}: could not draw scores clear of hinge kinks")
            continue
        sv = ScoreVector("g", dict(scores))
        analytic = combined_loss(sv, gold, negatives, cfg, space).dscore
        for lid in space.ids:
            def value_at(x: float, _lid=lid) -> float:
                probe = dict(scores)
                probe[_lid] = x
                return combined_loss(ScoreVector("g", probe), gold, negatives, cfg, space).total

            numeric = central_diff(value_at, scores[lid], step)
            err = relative_error(analytic[lid], numeric)
            if err > tol:
                failures.append(
                    f"config {i} (tau={cfg.tau}, lam={cfg.lam}) coordinate {lid}: "
                    f"analytic {analytic[lid]:.6g} vs numeric {numeric:.6g} (rel err {err:.2e})"
                )
    return failures


_WORDS = (
    "alpha", "beta", "gamma", "delta", "omega", "kappa", "sigma", "theta",
    "@HEAD$", "@TAIL$", "binds", "blocks", "carries", "nothing", "signal",
)


def _random_text(rng: np.random.Generator) -> str:
    n = int(rng.integers(3, 9))
    return " ".join(_WORDS[int(j)] for j in rng.integers(len(_WORDS), size=n))


def _param_coords(params: ToyScorerParams, active_rows: np.ndarray, rng: np.random.Generator):
    """Coordinates to probe: every b1/w2 entry, b2, some W1 rows (plus one
    untouched row, whose gradient must be zero)."""
    coords: list[tuple[str, int, int]] = []
    coords.extend(("b1", j, 0) for j in range(params.hidden))
    coords.extend(("w2", j, 0) for j in range(params.hidden))
    coords.append(("b2", 0, 0))
    rows = np.unique(active_rows)
    take = rows if rows.size <= 6 else rng.choice(rows, size=6, replace=False)
    for r in take:
        coords.append(("W1", int(r), int(rng.integers(params.hidden))))
    for r in range(params.hash_dim):
        if r not in rows:
            coords.append(("W1", r, 0))
            break
    return coords


def _get_coord(params: ToyScorerParams, kind: str, i: int, j: int) -> float:
    if kind == "W1":
        return float(params.W1[i, j])
    if kind == "b1":
        return float(params.b1[i])
    if kind == "w2":
        return float(params.w2[i])
    return params.b2


def _set_coord(params: ToyScorerParams, kind: str, i: int, j: int, v: float) -> None:
    if kind == "W1":
        params.W1[i, j] = v
    elif kind == "b1":
        params.b1[i] = v
    elif kind == "w2":
        params.w2[i] = v
    else:
        params.b2 = v


def check_score_gradients(n_draws: int = 120, seed: int = 0, step: float = STEP,
                          tol: float = TOL) -> list[str]:
    """toy_backward versus central differences of the raw score. The score
    is smooth in the parameters, so no redrawing is needed."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(n_draws):
        params = toy_init(hash_dim=512, hidden=8, seed=int(rng.integers(1 << 31)))
        premise, hypothesis = _random_text(rng), _random_text(rng)
        feat = HashingFeaturizer(params.hash_dim)
        _, cache = toy_forward(params, premise, hypothesis, feat)
        grads = toy_backward(params, cache, 1.0)
        for kind, a, b in _param_coords(params, cache.rows, rng):
            if kind == "W1":
                analytic = grads.w1_entry(a, b)
            elif kind == "b1":
                analytic = float(grads.b1[a])
            elif kind == "w2":
                analytic = float(grads.w2[a])
            else:
                analytic = grads.b2

            def score_at(x: float, _k=kind, _a=a, _b=b) -> float:
                probe = params.copy()
                _set_coord(probe, _k, _a, _b, x)
                s, _ = toy_forward(probe, premise, hypothesis, feat)
                return s

            numeric = central_diff(score_at, _get_coord(params, kind, a, b), step)
            err = relative_error(analytic, numeric)
            if err > tol:
                failures.append(
                    f"draw {i} {kind}[{a},{b}]: analytic {analytic:.6g} vs "
                    f"numeric {numeric:.6g} (rel err {err:.2e})"
                )
    return failures


def check_chain_gradients(n_configs: int = 100, seed: int = 0, step: float = STEP,
                          tol: float = TOL) -> list[str]:
    """Full chain: parameters -> candidate scores -> combined loss."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(n_configs):
        space, cfg, gold, negatives = _draw_config(rng, i)
        texts = None
        for _ in range(200):
            params = toy_init(hash_dim=512, hidden=8, seed=int(rng.integers(1 << 31)))
            premise = _random_text(rng)
            hyps = {lid: _random_text(rng) for lid in space.ids}
            feat = HashingFeaturizer(params.hash_dim)
            scores = {
                lid: toy_forward(params, premise, hyps[lid], feat)[0] for lid in space.ids
            }
            if _margins_clear(scores, gold, negatives, space, cfg):
                texts = (params, premise, hyps, feat)
                break
        if texts is None:
            failures.append(f"config {i}: could not draw a chain clear of hinge kinks")
            continue
        params, premise, hyps, feat = texts

        def loss_with(p: ToyScorerParams) -> float:
            sv = ScoreVector(
                "g", {lid: toy_forward(p, premise, hyps[lid], feat)[0] for lid in space.ids}
            )
            return combined_loss(sv, gold, negatives, cfg, space).total

        caches = {lid: toy_forward(params, premise, hyps[lid], feat)[1] for lid in space.ids}
        sv = ScoreVector("g", {lid: toy_forward(params, premise, hyps[lid], feat)[0] for lid in space.ids})
        dscore = combined_loss(sv, gold, negatives, cfg, space).dscore
        acc = {
            "b1": np.zeros(params.hidden),
            "w2": np.zeros(params.hidden),
            "b2": 0.0,
        }
        w1_rows: list[np.ndarray] = []
        w1_vals: list[np.ndarray] = []
        for lid in space.ids:
            g = toy_backward(params, caches[lid], dscore[lid])
            acc["b1"] += g.b1
            acc["w2"] += g.w2
            acc["b2"] += g.b2
            w1_rows.append(g.rows)
            w1_vals.append(g.W1_vals)
        rows_all = np.concatenate(w1_rows)
        vals_all = np.vstack(w1_vals)

        def w1_grad(r: int, c: int) -> float:
            hits = rows_all == r
            return float(vals_all[hits, c].sum()) if hits.any() else 0.0

        for kind, a, b in _param_coords(params, rows_all, rng):
            if kind == "W1":
                analytic = w1_grad(a, b)
            elif kind == "b2":
                analytic = acc["b2"]
            else:
                analytic = float(acc[kind][a])

            def loss_at(x: float, _k=kind, _a=a, _b=b) -> float:
                probe = params.copy()
                _set_coord(probe, _k, _a, _b, x)
                return loss_with(probe)

            numeric = central_diff(loss_at, _get_coord(params, kind, a, b), step)
            err = relative_error(analytic, numeric)
            if err > tol:
                failures.append(
                    f"config {i} (tau={cfg.tau}, lam={cfg.lam}) {kind}[{a},{b}]: "
                    f"analytic {analytic:.6g} vs numeric {numeric:.6g} (rel err {err:.2e})"
                )
    return failures


def run_all(n_configs: int = 120, seed: int = 0) -> list[str]:
    failures = check_loss_gradients(n_configs, seed)
    failures += check_score_gradients(n_configs, seed + 1)
    failures += check_chain_gradients(max(1, n_configs // 2), seed + 2)
    return failures
