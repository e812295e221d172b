"""Unit tests for the toy scorer, mock scorer, checkpoints, and the
newline-delimited external scorer client."""

from __future__ import annotations

import json
import sys
import textwrap

import numpy as np
import pytest

from entailre.errors import CheckpointError, IdMismatch, ParseError, ProtocolError, ScorerTimeout
from entailre.scorer import (
    ExternalScorer,
    HashingFeaturizer,
    MockScorer,
    ToyScorer,
    load_checkpoint,
    mock_score,
    save_checkpoint,
    token_bucket,
    toy_backward,
    toy_forward,
    toy_init,
)
from entailre.verbalizer import NliQuery

from oracles import central_difference


def q(qid: str, premise: str, hypothesis: str) -> NliQuery:
    iid, lid = qid.split("::")
    return NliQuery(qid, iid, lid, premise, hypothesis)


class TestTokenBucket:
    def test_frozen_values(self):
        # Multiplicative-31 over UTF-8 bytes; values are part of the
        # checkpoint compatibility contract.
        assert token_bucket("activates", 65536) == 51680
        assert token_bucket("@HEAD$", 65536) == 7684
        assert token_bucket("[SEP]", 65536) == 8890
        assert token_bucket("activates", 8) == 0

    def test_range(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            tok = "".join(chr(int(c)) for c in rng.integers(33, 1000, size=5))
            b = token_bucket(tok, 97)
            assert 0 <= b < 97

    def test_unicode_stability(self):
        assert token_bucket("naïve-τ", 65536) == token_bucket("naïve-τ", 65536)


class TestToyInit:
    def test_shapes_and_bounds(self):
        p = toy_init(hash_dim=128, hidden=8, seed=3)
        assert p.W1.shape == (128, 8)
        assert p.b1.shape == (8,) and p.w2.shape == (8,)
        for arr in (p.W1, p.b1, p.w2):
            assert np.all(np.abs(arr) <= 0.05)
        assert abs(p.b2) <= 0.05

    def test_draw_order_contract(self):
        # W1, b1, w2, b2 drawn in that order from one generator.
        p = toy_init(hash_dim=16, hidden=4, seed=9)
        rng = np.random.default_rng(9)
        np.testing.assert_array_equal(p.W1, rng.uniform(-0.05, 0.05, size=(16, 4)))
        np.testing.assert_array_equal(p.b1, rng.uniform(-0.05, 0.05, size=4))
        np.testing.assert_array_equal(p.w2, rng.uniform(-0.05, 0.05, size=4))
        assert p.b2 == float(rng.uniform(-0.05, 0.05))

    def test_seed_determinism(self):
        a, b = toy_init(seed=7), toy_init(seed=7)
        np.testing.assert_array_equal(a.W1, b.W1)
        assert a.b2 == b.b2

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            toy_init(hash_dim=0)
        with pytest.raises(ValueError):
            toy_init(hidden=0)


class TestHashingFeaturizer:
    def test_counts_include_separator(self):
        feat = HashingFeaturizer(65536)
        rows, vals = feat.featurize("a b a", "b c")
        want = {}
        for tok in ("a", "b", "a", "[SEP]", "b", "c"):
            want[token_bucket(tok, 65536)] = want.get(token_bucket(tok, 65536), 0.0) + 1.0
        got = dict(zip(rows.tolist(), vals.tolist()))
        assert got == want
        assert rows.tolist() == sorted(rows.tolist())

    def test_pair_cache_returns_same_arrays(self):
        feat = HashingFeaturizer(1024)
        a = feat.featurize("x y", "z")
        b = feat.featurize("x y", "z")
        assert a[0] is b[0] and a[1] is b[1]

    def test_pack_offsets(self):
        feat = HashingFeaturizer(1024)
        idx, cnt, offs = feat.pack([("a b", "c"), ("d", "e f g")])
        assert offs.tolist()[0] == 0
        assert offs[-1] == idx.shape[0] == cnt.shape[0]
        assert len(offs) == 3

    def test_pack_empty(self):
        feat = HashingFeaturizer(1024)
        idx, cnt, offs = feat.pack([])
        assert idx.size == 0 and cnt.size == 0 and offs.tolist() == [0]


class TestToyForward:
    def test_matches_dense_reconstruction(self):
        p = toy_init(hash_dim=512, hidden=16, seed=1)
        premise, hypothesis = "alpha beta gamma alpha", "delta beta"
        score, cache = toy_forward(p, premise, hypothesis)
        x = np.zeros(512)
        for tok in premise.split() + ["[SEP]"] + hypothesis.split():
            x[token_bucket(tok, 512)] += 1.0
        h = np.tanh(x @ p.W1 + p.b1)
        want = float(p.w2 @ h + p.b2)
        np.testing.assert_allclose(score, want, rtol=1e-12)
        np.testing.assert_allclose(cache.act, h[None, :][0], rtol=1e-12)

    def test_backward_matches_finite_differences(self):
        p = toy_init(hash_dim=64, hidden=6, seed=2)
        premise, hypothesis = "u v w", "v x"
        _, cache = toy_forward(p, premise, hypothesis)
        grads = toy_backward(p, cache, dscore=1.0)

        row = int(cache.rows[0])

        def score_at_w1(v: float) -> float:
            p2 = p.copy()
            p2.W1[row, 3] = v
            return toy_forward(p2, premise, hypothesis)[0]

        def score_at_b2(v: float) -> float:
            p2 = p.copy()
            p2.b2 = v
            return toy_forward(p2, premise, hypothesis)[0]

        fd_w1 = central_difference(score_at_w1, float(p.W1[row, 3]), 1e-6)
        fd_b2 = central_difference(score_at_b2, p.b2, 1e-6)
        np.testing.assert_allclose(grads.w1_entry(row, 3), fd_w1, rtol=1e-5)
        np.testing.assert_allclose(grads.b2, fd_b2, rtol=1e-5)

    def test_dscore_scales_linearly(self):
        p = toy_init(hash_dim=64, hidden=6, seed=2)
        _, cache = toy_forward(p, "a b", "c")
        g1 = toy_backward(p, cache, dscore=1.0)
        g3 = toy_backward(p, cache, dscore=3.0)
        np.testing.assert_allclose(g3.W1_vals, 3.0 * g1.W1_vals, rtol=1e-12)
        np.testing.assert_allclose(g3.b2, 3.0 * g1.b2, rtol=1e-12)


class TestToyScorer:
    def test_golden_default_score(self):
        scorer = ToyScorer(toy_init(seed=0))
        out = scorer.score_batch(
            [q("q::A", "@HEAD$ activates @TAIL$ quickly", "@HEAD$ activates @TAIL$.")]
        )
        assert out[0][0] == "q::A"
        assert float.hex(out[0][1]) == "0x1.d8770741ab3d4p-5"

    def test_batch_order_and_repeatability(self):
        scorer = ToyScorer(toy_init(seed=5))
        queries = [q(f"i{j}::A", f"word{j} stuff", "hyp text") for j in range(20)]
        a = scorer.score_batch(queries)
        b = scorer.score_batch(queries)
        assert a == b
        assert [x[0] for x in a] == [f"i{j}::A" for j in range(20)]

    def test_empty_batch(self):
        assert ToyScorer(toy_init(seed=0)).score_batch([]) == []


class TestCheckpoints:
    def test_round_trip(self, tmp_path):
        p = toy_init(hash_dim=256, hidden=8, seed=4)
        path = tmp_path / "model.npz"
        save_checkpoint(path, p, meta={"dataset": "synthetic", "family": "descriptive"})
        back, meta = load_checkpoint(path)
        assert (back.hash_dim, back.hidden, back.seed) == (256, 8, 4)
        np.testing.assert_array_equal(back.W1, p.W1)
        np.testing.assert_array_equal(back.b1, p.b1)
        np.testing.assert_array_equal(back.w2, p.w2)
        assert back.b2 == p.b2
        assert meta == {"dataset": "synthetic", "family": "descriptive"}

    def test_scores_survive_round_trip(self, tmp_path):
        p = toy_init(hash_dim=256, hidden=8, seed=4)
        path = tmp_path / "model.npz"
        save_checkpoint(path, p)
        back, _ = load_checkpoint(path)
        queries = [q("a::A", "some premise", "some hypothesis")]
        assert ToyScorer(p).score_batch(queries) == ToyScorer(back).score_batch(queries)

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / "junk.npz"
        path.write_bytes(b"not a zip archive")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "partial.npz"
        np.savez(path, format=np.array("entailre-toy-v1"), hash_dim=np.array(4))
        with pytest.raises(CheckpointError, match="lacks fields"):
            load_checkpoint(path)

    def test_wrong_format_tag(self, tmp_path):
        p = toy_init(hash_dim=8, hidden=2, seed=0)
        path = tmp_path / "model.npz"
        save_checkpoint(path, p)
        with np.load(path) as z:
            fields = {name: z[name] for name in z.files}
        fields["format"] = np.array("other-v9")
        np.savez(tmp_path / "bad.npz", **fields)
        with pytest.raises(CheckpointError, match="format"):
            load_checkpoint(tmp_path / "bad.npz")

    def test_shape_mismatch(self, tmp_path):
        p = toy_init(hash_dim=8, hidden=2, seed=0)
        path = tmp_path / "model.npz"
        save_checkpoint(path, p)
        with np.load(path) as z:
            fields = {name: z[name] for name in z.files}
        fields["hidden"] = np.array(3, dtype=np.int64)
        np.savez(tmp_path / "bad.npz", **fields)
        with pytest.raises(CheckpointError, match="shapes"):
            load_checkpoint(tmp_path / "bad.npz")


class TestMockScorer:
    def test_lookup_and_missing_key(self):
        table = {("p", "h"): 0.9}
        assert mock_score(table, "p", "h") == 0.9
        with pytest.raises(KeyError):
            mock_score(table, "p", "other")

    def test_batch(self):
        scorer = MockScorer({("p1", "h"): 0.1, ("p2", "h"): -0.5})
        out = scorer.score_batch([q("a::x", "p1", "h"), q("b::x", "p2", "h")])
        assert out == [("a::x", 0.1), ("b::x", -0.5)]

    def test_from_file(self, tmp_path):
        path = tmp_path / "table.json"
        path.write_text(
            json.dumps([{"premise": "p", "hypothesis": "h", "score": 1.5}]), encoding="utf-8"
        )
        scorer = MockScorer.from_file(path)
        assert scorer.table == {("p", "h"): 1.5}

    def test_from_file_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            MockScorer.from_file(bad)
        notlist = tmp_path / "notlist.json"
        notlist.write_text('{"premise": "p"}', encoding="utf-8")
        with pytest.raises(ParseError):
            MockScorer.from_file(notlist)
        badrec = tmp_path / "badrec.json"
        badrec.write_text('[{"premise": "p"}]', encoding="utf-8")
        with pytest.raises(ParseError):
            MockScorer.from_file(badrec)


WORKER_OK = textwrap.dedent(
    """
    import json, sys
    for line in sys.stdin:
        req = json.loads(line)
        score = float(len(req["premise"])) - float(len(req["hypothesis"]))
        print(json.dumps({"id": req["id"], "entailment": score}), flush=True)
    """
)

WORKER_ERROR_RECORD = textwrap.dedent(
    """
    import json, sys
    for line in sys.stdin:
        req = json.loads(line)
        print(json.dumps({"id": req["id"], "error": "model exploded"}), flush=True)
    """
)

WORKER_WRONG_ID = textwrap.dedent(
    """
    import json, sys
    for line in sys.stdin:
        req = json.loads(line)
        print(json.dumps({"id": "bogus", "entailment": 0.0}), flush=True)
    """
)

WORKER_GARBAGE = textwrap.dedent(
    """
    import sys
    for line in sys.stdin:
        print("this is not json", flush=True)
    """
)

WORKER_SLOW = textwrap.dedent(
    """
    import sys, time
    for line in sys.stdin:
        time.sleep(5)
    """
)


def spawn(code: str, timeout: float = 10.0) -> ExternalScorer:
    return ExternalScorer.from_command([sys.executable, "-u", "-c", code], timeout=timeout)


class TestExternalScorer:
    def test_round_trip_scores_in_order(self):
        queries = [q("a::x", "ppppp", "hh"), q("b::y", "pp", "hhhh"), q("c::z", "ααβ", "h")]
        with spawn(WORKER_OK) as scorer:
            out = scorer.score_batch(queries)
        assert [qid for qid, _ in out] == ["a::x", "b::y", "c::z"]
        assert [s for _, s in out] == [3.0, -2.0, 2.0]

    def test_error_record_raises(self):
        with spawn(WORKER_ERROR_RECORD) as scorer:
            with pytest.raises(ProtocolError, match="model exploded"):
                scorer.score_batch([q("a::x", "p", "h")])

    def test_id_mismatch(self):
        with spawn(WORKER_WRONG_ID) as scorer:
            with pytest.raises(IdMismatch):
                scorer.score_batch([q("a::x", "p", "h")])

    def test_garbage_line(self):
        with spawn(WORKER_GARBAGE) as scorer:
            with pytest.raises(ProtocolError, match="invalid JSON"):
                scorer.score_batch([q("a::x", "p", "h")])

    def test_timeout(self):
        with spawn(WORKER_SLOW, timeout=0.3) as scorer:
            with pytest.raises(ScorerTimeout):
                scorer.score_batch([q("a::x", "p", "h")])

    def test_unicode_pairs_survive(self):
        queries = [q("u::x", "héllo wörld", "καλημέρα")]
        with spawn(WORKER_OK) as scorer:
            out = scorer.score_batch(queries)
        assert out[0][1] == float(len("héllo wörld") - len("καλημέρα"))
