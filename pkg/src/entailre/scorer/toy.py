"""Trainable hashed bag-of-words scorer for desk-scale experiments.

The model is a one-hidden-layer net over hashed unigram counts of
"premise [SEP] hypothesis": score = w2 . tanh(W1^T phi + b1) + b2.
Feature bags are additive in the tokens, so premise and hypothesis bags
are hashed once and reused across candidates and epochs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import CheckpointError
from ..kernels import get_backend
from ..verbalizer import NliQuery

SEP_TOKEN = "[SEP]"
_HASH_MASK = (1 << 64) - 1

DEFAULT_HASH_DIM = 65536
DEFAULT_HIDDEN = 64
INIT_SCALE = 0.05

_CHECKPOINT_FORMAT = "entailre-toy-v1"


def token_bucket(token: str, hash_dim: int) -> int:
    """Multiplicative 31 hash over UTF-8 bytes, reduced modulo hash_dim.

    Stable across processes and platforms (unlike builtin hash); bucket
    collisions are accepted as part of the model.
    """
    h = 0
    for b in token.encode("utf-8"):
        h = (h * 31 + b) & _HASH_MASK
    return h % hash_dim


@dataclass
class ToyScorerParams:
    """Dense parameters; W1 is (hash_dim, hidden), w2 and b1 are (hidden,)."""

    hash_dim: int
    hidden: int
    seed: int
    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    def copy(self) -> "ToyScorerParams":
        return ToyScorerParams(
            self.hash_dim, self.hidden, self.seed,
            self.W1.copy(), self.b1.copy(), self.w2.copy(), float(self.b2),
        )


def toy_init(hash_dim: int = DEFAULT_HASH_DIM, hidden: int = DEFAULT_HIDDEN, seed: int = 0) -> ToyScorerParams:
    """Uniform(-0.05, 0.05) init; draw order W1, b1, w2, b2 is part of the contract."""
    if hash_dim < 1 or hidden < 1:
        raise ValueError(f"hash_dim and hidden must be >= 1, got {hash_dim}, {hidden}")
    rng = np.random.default_rng(seed)
    W1 = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(hash_dim, hidden))
    b1 = rng.uniform(-INIT_SCALE, INIT_SCALE, size=hidden)
    w2 = rng.uniform(-INIT_SCALE, INIT_SCALE, size=hidden)
    b2 = float(rng.uniform(-INIT_SCALE, INIT_SCALE))
    return ToyScorerParams(hash_dim, hidden, seed, W1, b1, w2, b2)


class HashingFeaturizer:
    """Hashes texts to sparse count vectors, caching per token and per pair."""

    def __init__(self, hash_dim: int):
        self.hash_dim = hash_dim
        self._buckets: dict[str, int] = {}
        self._pairs: dict[tuple[str, str], tuple[np.ndarray, np.ndarray]] = {}

    def _bucket(self, token: str) -> int:
        b = self._buckets.get(token)
        if b is None:
            b = token_bucket(token, self.hash_dim)
            self._buckets[token] = b
        return b

    def featurize(self, premise: str, hypothesis: str) -> tuple[np.ndarray, np.ndarray]:
        """Bucket counts of the pair's whitespace tokens, rows sorted by bucket."""
        key = (premise, hypothesis)
        cached = self._pairs.get(key)
        if cached is not None:
            return cached
        counts: dict[int, float] = {}
        for tok in premise.split() + [SEP_TOKEN] + hypothesis.split():
            b = self._bucket(tok)
            counts[b] = counts.get(b, 0.0) + 1.0
        rows = np.array(sorted(counts), dtype=np.int64)
        vals = np.array([counts[r] for r in rows], dtype=np.float64)
        self._pairs[key] = (rows, vals)
        return rows, vals

    def pack(self, pairs: Sequence[tuple[str, str]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR-pack several pairs: (idx, cnt, offs) with offs of length len(pairs)+1."""
        feats = [self.featurize(p, h) for p, h in pairs]
        offs = np.zeros(len(feats) + 1, dtype=np.int64)
        for i, (rows, _) in enumerate(feats):
            offs[i + 1] = offs[i] + rows.shape[0]
        if feats:
            idx = np.concatenate([rows for rows, _ in feats])
            cnt = np.concatenate([vals for _, vals in feats])
        else:
            idx = np.zeros(0, dtype=np.int64)
            cnt = np.zeros(0, dtype=np.float64)
        return idx, cnt, offs


@dataclass
class ToyCache:
    """Forward-pass byproducts needed by toy_backward."""

    rows: np.ndarray
    vals: np.ndarray
    act: np.ndarray


@dataclass
class ToyGrads:
    """Gradient of a scalar w.r.t. all parameters; W1 part is sparse by row."""

    rows: np.ndarray
    W1_vals: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    def w1_entry(self, row: int, col: int) -> float:
        hits = np.nonzero(self.rows == row)[0]
        return float(self.W1_vals[hits, col].sum()) if hits.size else 0.0


def toy_forward(
    params: ToyScorerParams,
    premise: str,
    hypothesis: str,
    featurizer: HashingFeaturizer | None = None,
    backend=None,
) -> tuple[float, ToyCache]:
    feat = featurizer if featurizer is not None else HashingFeaturizer(params.hash_dim)
    rows, vals = feat.featurize(premise, hypothesis)
    kb = backend if backend is not None else get_backend()
    offs = np.array([0, rows.shape[0]], dtype=np.int64)
    scores, acts = kb.forward_batch(rows, vals, offs, params.W1, params.b1, params.w2, params.b2)
    return float(scores[0]), ToyCache(rows, vals, acts[0])


def toy_backward(params: ToyScorerParams, cache: ToyCache, dscore: float, backend=None) -> ToyGrads:
    kb = backend if backend is not None else get_backend()
    offs = np.array([0, cache.rows.shape[0]], dtype=np.int64)
    dvals, db1, dw2, db2 = kb.backward_batch(
        np.array([dscore], dtype=np.float64),
        cache.act[None, :],
        cache.rows,
        cache.vals,
        offs,
        params.w2,
    )
    return ToyGrads(cache.rows, dvals, db1, dw2, float(db2))


class ToyScorer:
    """Scorer interface over fixed ToyScorerParams."""

    def __init__(self, params: ToyScorerParams, backend=None):
        self.params = params
        self.backend = backend if backend is not None else get_backend()
        self.featurizer = HashingFeaturizer(params.hash_dim)

    def score_batch(self, queries: Sequence[NliQuery]) -> list[tuple[str, float]]:
        if not queries:
            return []
        idx, cnt, offs = self.featurizer.pack([(q.premise, q.hypothesis) for q in queries])
        p = self.params
        scores, _ = self.backend.forward_batch(idx, cnt, offs, p.W1, p.b1, p.w2, p.b2)
        return [(q.query_id, float(s)) for q, s in zip(queries, scores)]


def save_checkpoint(path: str | Path, params: ToyScorerParams, meta: dict[str, str] | None = None) -> None:
    """Write a .npz checkpoint: format tag, dims, seed, weights, string metadata."""
    meta = meta or {}
    meta_keys = np.array(sorted(meta), dtype=np.str_)
    meta_vals = np.array([meta[k] for k in sorted(meta)], dtype=np.str_)
    np.savez_compressed(
        path,
        format=np.array(_CHECKPOINT_FORMAT),
        hash_dim=np.array(params.hash_dim, dtype=np.int64),
        hidden=np.array(params.hidden, dtype=np.int64),
        seed=np.array(params.seed, dtype=np.int64),
        W1=params.W1,
        b1=params.b1,
        w2=params.w2,
        b2=np.array(params.b2, dtype=np.float64),
        meta_keys=meta_keys,
        meta_vals=meta_vals,
    )


def load_checkpoint(path: str | Path) -> tuple[ToyScorerParams, dict[str, str]]:
    try:
        with np.load(path, allow_pickle=False) as z:
            fields = {name: z[name] for name in z.files}
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    required = {"format", "hash_dim", "hidden", "seed", "W1", "b1", "w2", "b2"}
    missing = required - fields.keys()
    if missing:
        raise CheckpointError(f"checkpoint {path} lacks fields {sorted(missing)}")
    if str(fields["format"]) != _CHECKPOINT_FORMAT:
        raise CheckpointError(
            f"checkpoint {path} has format {fields['format']!r}, expected {_CHECKPOINT_FORMAT!r}"
        )
    hash_dim = int(fields["hash_dim"])
    hidden = int(fields["hidden"])
    W1, b1, w2 = fields["W1"], fields["b1"], fields["w2"]
    if W1.shape != (hash_dim, hidden) or b1.shape != (hidden,) or w2.shape != (hidden,):
        raise CheckpointError(
            f"checkpoint {path}: weight shapes {W1.shape}/{b1.shape}/{w2.shape} "
            f"do not match dims ({hash_dim}, {hidden})"
        )
    params = ToyScorerParams(
        hash_dim, hidden, int(fields["seed"]),
        W1.astype(np.float64), b1.astype(np.float64), w2.astype(np.float64), float(fields["b2"]),
    )
    meta = {}
    if "meta_keys" in fields:
        meta = {str(k): str(v) for k, v in zip(fields["meta_keys"], fields["meta_vals"])}
    return params, meta
