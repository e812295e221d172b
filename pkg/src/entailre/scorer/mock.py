"""Table-backed scorer for tests and dry runs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from ..errors import ParseError
from ..verbalizer import NliQuery


def mock_score(table: dict[tuple[str, str], float], premise: str, hypothesis: str) -> float:
    key = (premise, hypothesis)
    if key not in table:
        raise KeyError(f"mock scorer has no entry for pair {key!r}")
    return table[key]


class MockScorer:
    """Looks every pair up in a fixed (premise, hypothesis) -> score table."""

    def __init__(self, table: dict[tuple[str, str], float]):
        self.table = dict(table)

    def score_batch(self, queries: Sequence[NliQuery]) -> list[tuple[str, float]]:
        return [(q.query_id, mock_score(self.table, q.premise, q.hypothesis)) for q in queries]

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScorer":
        """Load a JSON list of {"premise", "hypothesis", "score"} records."""
        try:
            records = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"mock table {path}: invalid JSON: {exc}") from exc
        if not isinstance(records, list):
            raise ParseError(f"mock table {path}: expected a JSON list")
        table: dict[tuple[str, str], float] = {}
        for i, rec in enumerate(records):
            try:
                table[(rec["premise"], rec["hypothesis"])] = float(rec["score"])
            except (TypeError, KeyError, ValueError) as exc:
                raise ParseError(f"mock table {path}: bad record {i}: {exc}") from exc
        return cls(table)
