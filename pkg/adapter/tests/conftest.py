"""Fixtures: a tiny locally trained NLI checkpoint.

The sandbox has no model-hub access, so the suite builds its own
sequence-classification checkpoint: a word-level tokenizer over a closed
lexicon and a 2-layer encoder trained to convergence on synthetic
premise-hypothesis pairs (hypernym paraphrase -> entailment, negated
paraphrase -> contradiction, unrelated statement -> neutral). The result is
a genuine, deterministic NLI model for the worker to serve: it orders the
entailed hypothesis above the contradicted one because it learned negation,
not because the test says so. Weights are stored in float64 so scores are
immune to batch-composition rounding.
"""

from __future__ import annotations

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import (
    BertConfig,
    BertForSequenceClassification,
    PreTrainedTokenizerFast,
)

LEXICON = (
    "[PAD] [UNK] [CLS] [SEP] a an the no dog cat bird horse fish animal "
    "runs walks sleeps eats jumps moves weather is cold ."
).split()
SUBJECTS = ["dog", "cat", "bird", "horse", "fish"]
VERBS = ["runs", "walks", "sleeps", "eats", "jumps"]
HYPOTHESES = [
    ("An animal moves.", 2),  # entailment
    ("No animal moves.", 0),  # contradiction
    ("The weather is cold.", 1),  # neutral
]
SEED = 0
LEARNING_RATE = 1e-3
MAX_STEPS = 300
TARGET_LOSS = 0.02


def build_tokenizer() -> PreTrainedTokenizerFast:
    vocab = {word: index for index, word in enumerate(LEXICON)}
    core = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    core.normalizer = normalizers.Lowercase()
    core.pre_tokenizer = pre_tokenizers.Whitespace()
    core.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=core,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        model_max_length=64,
        model_input_names=["input_ids", "token_type_ids", "attention_mask"],
    )


@pytest.fixture(scope="session")
def nli_checkpoint(tmp_path_factory) -> str:
    tokenizer = build_tokenizer()
    premises, hypotheses, labels = [], [], []
    for subject in SUBJECTS:
        for verb in VERBS:
            for hypothesis, label in HYPOTHESES:
                premises.append(f"A {subject} {verb}.")
                hypotheses.append(hypothesis)
                labels.append(label)
    encoded = tokenizer(premises, hypotheses, padding=True, return_tensors="pt")
    targets = torch.tensor(labels)

    config = BertConfig(
        vocab_size=len(LEXICON),
        hidden_size=64,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=128,
        max_position_embeddings=64,
        num_labels=3,
        type_vocab_size=2,
        pad_token_id=LEXICON.index("[PAD]"),
    )
    torch.manual_seed(SEED)
    model = BertForSequenceClassification(config)
    optimizer = torch.optim.AdamW(model.parameters(), lr=LEARNING_RATE)
    model.train()
    for _ in range(MAX_STEPS):
        optimizer.zero_grad()
        out = model(**encoded, labels=targets)
        out.loss.backward()
        optimizer.step()
        if out.loss.item() < TARGET_LOSS:
            break
    assert out.loss.item() < TARGET_LOSS, "tiny NLI model failed to converge"

    target = tmp_path_factory.mktemp("nli-checkpoint")
    model.double().eval().save_pretrained(target)
    tokenizer.save_pretrained(target)
    return str(target)
