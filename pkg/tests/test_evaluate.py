"""Tests for abstention-aware micro-averaged evaluation and reports."""

from __future__ import annotations

import json

import numpy as np
import pytest

from entailre.core import LabelSpace, RelationLabel
from entailre.datasets import label_space
from entailre.errors import UnknownLabel
from entailre.evaluate import micro_f1, report_json, report_text, save_report

from oracles import counting_micro_f1


class TestMicroF1:
    def test_half_credit_example(self, tiny_space):
        # One true positive, one spurious prediction, one missed gold.
        report = micro_f1(["A", "0", "B"], ["A", "A", "0"], tiny_space)
        assert report.micro_precision == 0.5
        assert report.micro_recall == 0.5
        assert report.micro_f1 == 0.5
        assert report.n_instances == 3
        assert report.n_gold_labeled == 2
        assert report.n_pred_labeled == 2
        assert report.n_correct == 1

    def test_abstain_agreement_earns_nothing(self, tiny_space):
        report = micro_f1(["0", "0"], ["0", "0"], tiny_space)
        assert report.micro_precision == 0.0
        assert report.micro_recall == 0.0
        assert report.micro_f1 == 0.0

    def test_perfect_predictions(self, tiny_space):
        golds = ["A", "B", "0", "A"]
        report = micro_f1(golds, list(golds), tiny_space)
        assert report.micro_f1 == 1.0
        assert report.n_correct == 3

    def test_matches_counting_oracle(self, tiny_space):
        rng = np.random.default_rng(20240817)
        ids = list(tiny_space.ids)
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            golds = [ids[int(i)] for i in rng.integers(len(ids), size=n)]
            preds = [ids[int(i)] for i in rng.integers(len(ids), size=n)]
            p, r, f1 = counting_micro_f1(golds, preds, "0")
            report = micro_f1(golds, preds, tiny_space)
            np.testing.assert_allclose(report.micro_precision, p, rtol=1e-12)
            np.testing.assert_allclose(report.micro_recall, r, rtol=1e-12)
            np.testing.assert_allclose(report.micro_f1, f1, rtol=1e-12)

    def test_no_abstain_space_reduces_to_accuracy(self):
        space = label_space("gad")
        golds = ["0", "1", "1", "0"]
        preds = ["0", "1", "0", "0"]
        report = micro_f1(golds, preds, space)
        assert report.micro_precision == report.micro_recall == 0.75
        p, r, f1 = counting_micro_f1(golds, preds, abstain=None)
        assert report.micro_f1 == f1

    def test_per_label_counts(self, tiny_space):
        report = micro_f1(["A", "B", "A"], ["A", "A", "0"], tiny_space)
        assert report.per_label["A"] == {"gold": 2, "predicted": 2, "correct": 1}
        assert report.per_label["B"] == {"gold": 1, "predicted": 0, "correct": 0}
        assert report.per_label["0"] == {"gold": 0, "predicted": 1, "correct": 0}

    def test_length_mismatch(self, tiny_space):
        with pytest.raises(ValueError, match="differ in length"):
            micro_f1(["A"], ["A", "B"], tiny_space)

    def test_unknown_gold_label(self, tiny_space):
        with pytest.raises(UnknownLabel, match="gold"):
            micro_f1(["Z"], ["A"], tiny_space)

    def test_unknown_predicted_label(self, tiny_space):
        with pytest.raises(UnknownLabel, match="predicted"):
            micro_f1(["A"], ["Z"], tiny_space)

    def test_empty_sequences(self, tiny_space):
        report = micro_f1([], [], tiny_space)
        assert report.micro_f1 == 0.0
        assert report.n_instances == 0


class TestReports:
    @pytest.fixture
    def report(self, tiny_space):
        return micro_f1(["A", "0", "B"], ["A", "A", "0"], tiny_space)

    def test_text_layout(self, report):
        text = report_text(report)
        lines = text.splitlines()
        assert lines[0] == "micro_precision\t0.5"
        assert "n_correct\t1" in lines
        assert "label.A.gold\t1" in lines
        assert "label.0.predicted\t1" in lines
        assert text.endswith("\n")

    def test_json_round_trip(self, report):
        payload = json.loads(report_json(report))
        assert payload == report.to_dict()
        assert payload["micro_f1"] == 0.5
        assert payload["per_label"]["B"]["gold"] == 1

    def test_save_writes_both_files(self, report, tmp_path):
        txt = tmp_path / "eval.txt"
        js = tmp_path / "eval.json"
        save_report(report, txt, js)
        assert txt.read_text(encoding="utf-8") == report_text(report)
        assert json.loads(js.read_text(encoding="utf-8")) == report.to_dict()
