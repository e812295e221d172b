"""Scorer contract: anything that maps premise-hypothesis pairs to reals."""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

from ..verbalizer import NliQuery


@runtime_checkable
class Scorer(Protocol):
    """Higher score must mean the premise entails the hypothesis more."""

    def score_batch(self, queries: Sequence[NliQuery]) -> list[tuple[str, float]]:
        """Score every query; output is (query_id, score) in input order."""
        ...
