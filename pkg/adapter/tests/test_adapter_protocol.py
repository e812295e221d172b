"""The worker over its wire protocol, including the ranking library's client.

The acceptance checks print an always-visible PASS/FAIL line each:
round-trip fidelity, entailment sanity ordering, malformed-line resilience.
"""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from entailre.errors import ProtocolError
from entailre.scorer.external import ExternalScorer
from entailre.verbalizer import NliQuery

from entailre_adapter import AdapterConfig, NliModel

PREMISES = [
    "A dog runs.",
    "A cat sleeps.",
    "A horse jumps.",
    "A fish eats.",
    "A bird walks.",
    "A dog sleeps.",
]
HYPOTHESES = ["An animal moves.", "No animal moves.", "The weather is cold."]


def worker_cmd(checkpoint: str, batch_size: int) -> list[str]:
    return [
        sys.executable, "-m", "entailre_adapter.cli",
        "--model", checkpoint, "--batch-size", str(batch_size),
    ]


def all_pairs() -> list[tuple[str, str, str]]:
    return [
        (f"q{i:02d}", premise, hypothesis)
        for i, (premise, hypothesis) in enumerate(
            (p, h) for p in PREMISES for h in HYPOTHESES
        )
    ]


def report(capsys, name: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def run_worker(checkpoint: str, batch_size: int, lines: list[str]) -> tuple[list[str], int]:
    proc = subprocess.run(
        worker_cmd(checkpoint, batch_size),
        input="".join(line + "\n" for line in lines).encode("utf-8"),
        stdout=subprocess.PIPE,
        timeout=120,
    )
    out = proc.stdout.decode("utf-8").splitlines()
    return out, proc.returncode


class TestRoundTrip:
    def test_matches_direct_invocation(self, capsys, nli_checkpoint):
        pairs = all_pairs()
        queries = [
            NliQuery(query_id=qid, instance_id=qid, label_id="y", premise=p, hypothesis=h)
            for qid, p, h in pairs
        ]
        with ExternalScorer.from_command(worker_cmd(nli_checkpoint, 1)) as scorer:
            remote = scorer.score_batch(queries)
        direct = NliModel(AdapterConfig(model=nli_checkpoint, batch_size=1)).score_pairs(
            [(p, h) for _, p, h in pairs]
        )
        assert [qid for qid, _ in remote] == [qid for qid, _, _ in pairs]
        worst = max(abs(got - want) for (_, got), want in zip(remote, direct))
        report(
            capsys, "adapter round-trip",
            worst <= 1e-6,
            f"protocol scores vs direct in-process invocation: max abs diff "
            f"{worst:.2e} over {len(pairs)} pairs (<= 1e-6)",
        )

    def test_bulk_pipe_batched(self, nli_checkpoint):
        pairs = all_pairs()
        lines = [
            json.dumps({"id": qid, "premise": p, "hypothesis": h})
            for qid, p, h in pairs
        ]
        out, code = run_worker(nli_checkpoint, 4, lines)
        assert code == 0
        records = [json.loads(line) for line in out]
        assert [r["id"] for r in records] == [qid for qid, _, _ in pairs]
        direct = NliModel(AdapterConfig(model=nli_checkpoint, batch_size=4)).score_pairs(
            [(p, h) for _, p, h in pairs]
        )
        assert all(
            abs(r["entailment"] - want) <= 1e-6 for r, want in zip(records, direct)
        )

    def test_identical_requests_identical_scores(self, nli_checkpoint):
        line = json.dumps(
            {"id": "twin", "premise": "A dog runs.", "hypothesis": "An animal moves."}
        )
        out, code = run_worker(nli_checkpoint, 2, [line, line])
        assert code == 0
        first, second = (json.loads(l) for l in out)
        assert first == second

    def test_unicode_survives_the_wire(self, nli_checkpoint):
        line = json.dumps(
            {"id": "ü-1", "premise": "A naïve möwe flies.", "hypothesis": "An animal moves."},
            ensure_ascii=False,
        )
        out, code = run_worker(nli_checkpoint, 1, [line])
        assert code == 0
        assert json.loads(out[0])["id"] == "ü-1"

    def test_missing_trailing_newline_still_answered(self, nli_checkpoint):
        payload = json.dumps(
            {"id": "tail", "premise": "A dog runs.", "hypothesis": "An animal moves."}
        ).encode("utf-8")
        proc = subprocess.run(
            worker_cmd(nli_checkpoint, 1),
            input=payload,  # no trailing newline
            stdout=subprocess.PIPE,
            timeout=120,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout.decode("utf-8"))["id"] == "tail"


class TestSanityOrdering:
    def test_entailed_above_contradicted_over_the_wire(self, capsys, nli_checkpoint):
        lines = [
            json.dumps({"id": "yes", "premise": "A dog runs.", "hypothesis": "An animal moves."}),
            json.dumps({"id": "no", "premise": "A dog runs.", "hypothesis": "No animal moves."}),
        ]
        out, code = run_worker(nli_checkpoint, 2, lines)
        assert code == 0
        entailed, contradicted = (json.loads(l)["entailment"] for l in out)
        report(
            capsys, "adapter sanity ordering",
            entailed > contradicted,
            f"entailed hypothesis scores {entailed:.4f} vs contradicted "
            f"{contradicted:.4f} for the same premise",
        )

    def test_selftest_flag(self, nli_checkpoint):
        proc = subprocess.run(
            worker_cmd(nli_checkpoint, 2)[:-2] + ["--selftest"],
            stdout=subprocess.PIPE,
            timeout=120,
        )
        assert proc.returncode == 0
        assert proc.stdout.decode("utf-8").startswith("sanity ordering PASS")


class TestMalformedLines:
    def test_stream_survives_every_malformation(self, capsys, nli_checkpoint):
        good = {"premise": "A dog runs.", "hypothesis": "An animal moves."}
        lines = [
            json.dumps({"id": "ok-1", **good}),
            "this is not json",
            json.dumps([1, 2, 3]),
            json.dumps({"id": "no-premise", "hypothesis": "An animal moves."}),
            json.dumps({"id": "empty-hyp", "premise": "A dog runs.", "hypothesis": ""}),
            json.dumps({"id": 7, **good}),
            "",
            json.dumps({"id": "ok-2", **good}),
        ]
        out, code = run_worker(nli_checkpoint, 3, lines)
        records = [json.loads(l) for l in out]
        checks = (
            code == 0
            and len(records) == 7  # the blank line is skipped, all others answered
            and "entailment" in records[0] and records[0]["id"] == "ok-1"
            and records[1] == {"line": 2, "error": "invalid JSON: Expecting value"}
            and records[2] == {"line": 3, "error": "request is not a JSON object"}
            and records[3] == {"id": "no-premise", "error": "missing or non-string 'premise'"}
            and records[4] == {"id": "empty-hyp", "error": "empty 'hypothesis'"}
            and records[5] == {"line": 6, "error": "missing or non-string 'id'"}
            and "entailment" in records[6] and records[6]["id"] == "ok-2"
            and records[0]["entailment"] == records[6]["entailment"]
        )
        report(
            capsys, "adapter malformed-line resilience",
            checks,
            "6 malformed/blank lines interleaved with 2 requests: every "
            "request answered, every malformation reported by id or line "
            "number, exit code 0",
        )

    def test_client_surfaces_error_records(self, nli_checkpoint):
        query = NliQuery(query_id="bad", instance_id="bad", label_id="y",
                         premise="A dog runs.", hypothesis="")
        with ExternalScorer.from_command(worker_cmd(nli_checkpoint, 1)) as scorer:
            with pytest.raises(ProtocolError, match="empty 'hypothesis'"):
                scorer.score_batch([query])


class TestCliErrors:
    def test_missing_checkpoint_exits_2(self, tmp_path):
        proc = subprocess.run(
            worker_cmd(str(tmp_path / "nowhere"), 1),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=120,
        )
        assert proc.returncode == 2

    def test_bad_entailment_index_exits_1(self, nli_checkpoint):
        proc = subprocess.run(
            worker_cmd(nli_checkpoint, 1) + ["--entailment-index", "9"],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=120,
        )
        assert proc.returncode == 1
