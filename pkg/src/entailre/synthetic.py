"""Synthetic relation-extraction corpus for end-to-end checks and demos.

Four relations, each marked by one cue verb, plus a majority no-relation
class. Labels are linearly separable from token counts alone: a relation
holds iff its cue appears without the negation token, so a rule reading
only the cue and "never" counts scores 100% on every split.

The two classes differ in surface texture the way real corpora do.
Relation assertions are short and formulaic, padded with a couple of
words from a tiny chatter vocabulary. No-relation sentences are
open-domain: half are decoys (a relation cue negated by "never"), half
neutral co-mentions, and both carry a long tail of rare filler words
that repeat within the sentence but hardly ever recur across sentences
- the bursty word statistics typical of natural text. Under feature
hashing those bursty one-off words act as heavy input noise on exactly
the sentences whose gold label is no-relation, which is what makes the
corpus a useful stress test for abstention calibration: a ranker that
never learned a margin between the no-relation score and the relation
scores loses precision here, while a calibrated one does not.

All splits come from one seeded generator stream, drawn in split order
(train, dev, test). Draw order per instance: gold coin; then for
no-relation instances the decoy coin, the decoy's cue (when decoy), the
burst word count, and per burst word its identity and repeat count,
then one permutation to interleave the repeats; for related instances
the relation, the chatter length, and the chatter words.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Instance
from .datasets import SYNTHETIC
from .ingest import save_instances

RELATION_CUES = {
    "R1": "activates",
    "R2": "inhibits",
    "R3": "binds",
    "R4": "transports",
}

NEGATION = "never"
NEUTRAL_BASE = "@HEAD$ and @TAIL$ come up together"

# Rare-word id space for the bursty no-relation filler; large enough that
# train and test sentences essentially never share a filler word.
BURST_VOCAB = 1_000_000

DEFAULT_SIZES = {"train": 2000, "dev": 500, "test": 500}


def make_corpus(
    sizes: dict[str, int] | None = None,
    abstain_frac: float = 0.8,
    decoy_prob: float = 0.5,
    burst_words: tuple[int, int] = (10, 16),
    burst_reps: tuple[int, int] = (8, 14),
    chatter_vocab: int = 20,
    chatter_len: tuple[int, int] = (2, 4),
    seed: int = 11,
) -> dict[str, list[Instance]]:
    """Generate the corpus splits from one seeded stream.

    burst_words / burst_reps / chatter_len are inclusive (lo, hi) ranges:
    a no-relation sentence carries burst_words distinct rare words, each
    repeated burst_reps times; a related sentence carries chatter_len
    words from a chatter_vocab-word vocabulary.
    """
    sizes = dict(DEFAULT_SIZES if sizes is None else sizes)
    if not 0.0 <= abstain_frac < 1.0:
        raise ValueError(f"abstain_frac must be in [0, 1), got {abstain_frac}")
    for name, (lo, hi) in (("burst_words", burst_words), ("burst_reps", burst_reps),
                           ("chatter_len", chatter_len)):
        if not 0 < lo <= hi:
            raise ValueError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    relations = sorted(RELATION_CUES)
    out: dict[str, list[Instance]] = {}
    for split, n in sizes.items():
        instances = []
        for i in range(n):
            if rng.random() < abstain_frac:
                gold = SYNTHETIC.abstain_id
                if rng.random() < decoy_prob:
                    cue = RELATION_CUES[relations[int(rng.integers(len(relations)))]]
                    base = f"@HEAD$ {NEGATION} {cue} @TAIL$"
                else:
                    base = NEUTRAL_BASE
                k = int(rng.integers(burst_words[0], burst_words[1] + 1))
                toks: list[str] = []
                for _ in range(k):
                    word = f"x{int(rng.integers(BURST_VOCAB))}"
                    reps = int(rng.integers(burst_reps[0], burst_reps[1] + 1))
                    toks.extend([word] * reps)
                filler = [toks[j] for j in rng.permutation(len(toks))]
            else:
                gold = relations[int(rng.integers(len(relations)))]
                base = f"@HEAD$ {RELATION_CUES[gold]} @TAIL$"
                m = int(rng.integers(chatter_len[0], chatter_len[1] + 1))
                filler = [f"w{int(rng.integers(chatter_vocab))}" for _ in range(m)]
            instances.append(
                Instance(f"{split}-{i:04d}", base + " " + " ".join(filler), gold)
            )
        out[split] = instances
    return out


def write_corpus(out_dir: str | Path, **kwargs) -> dict[str, Path]:
    """Write the corpus splits as tsv-masked files; returns split -> path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = make_corpus(**kwargs)
    paths = {}
    for split, instances in corpus.items():
        path = out_dir / f"{split}.tsv"
        save_instances(instances, path)
        paths[split] = path
    return paths
