"""Direct (in-process) behavior of the scoring model and its configuration."""

from __future__ import annotations

import numpy as np
import pytest

from entailre_adapter import AdapterConfig, AdapterError, NliModel

PAIRS = [
    ("A dog runs.", "An animal moves."),
    ("A dog runs.", "No animal moves."),
    ("A cat sleeps.", "The weather is cold."),
    ("A horse jumps.", "An animal moves."),
    ("A fish eats.", "No animal moves."),
    ("A bird walks.", "An animal moves."),
    ("", "An animal moves."),
    ("A naïve möwe flies.", "An animal moves."),
]


@pytest.fixture(scope="module")
def model(nli_checkpoint):
    return NliModel(AdapterConfig(model=nli_checkpoint, batch_size=4))


class TestConfig:
    def test_defaults(self):
        cfg = AdapterConfig(model="some/path")
        assert (cfg.batch_size, cfg.device, cfg.entailment_index) == (16, "cpu", 2)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"model": ""},
            {"model": "m", "batch_size": 0},
            {"model": "m", "batch_size": -3},
            {"model": "m", "device": ""},
            {"model": "m", "entailment_index": -1},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(AdapterError):
            AdapterConfig(**kwargs)

    def test_entailment_index_must_fit_the_loaded_head(self, nli_checkpoint):
        with pytest.raises(AdapterError, match="3-way"):
            NliModel(AdapterConfig(model=nli_checkpoint, entailment_index=3))


class TestScorePairs:
    def test_one_score_per_pair_in_order(self, model):
        scores = model.score_pairs(PAIRS)
        assert len(scores) == len(PAIRS)
        assert all(isinstance(s, float) and np.isfinite(s) for s in scores)

    def test_empty_input(self, model):
        assert model.score_pairs([]) == []

    def test_deterministic(self, model):
        assert model.score_pairs(PAIRS) == model.score_pairs(PAIRS)

    def test_batch_size_does_not_change_scores(self, nli_checkpoint):
        one = NliModel(AdapterConfig(model=nli_checkpoint, batch_size=1))
        seven = NliModel(AdapterConfig(model=nli_checkpoint, batch_size=7))
        np.testing.assert_allclose(
            one.score_pairs(PAIRS), seven.score_pairs(PAIRS), rtol=0, atol=1e-9
        )

    def test_sanity_ordering_direct(self, model):
        entailed, contradicted = model.sanity_ordering()
        assert entailed > contradicted
