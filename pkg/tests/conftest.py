"""Shared fixtures for the entailre test suite."""

from __future__ import annotations

import pytest

from entailre.core import Instance, LabelSpace, RelationLabel
from entailre.datasets import label_space
from entailre.verbalizer import TemplateBank, shipped_bank


@pytest.fixture(scope="session")
def tiny_space() -> LabelSpace:
    """Two relations plus an abstain label, in a fixed order."""
    return LabelSpace(
        "tiny",
        (
            RelationLabel("0", is_abstain=True),
            RelationLabel("A"),
            RelationLabel("B"),
        ),
    )


@pytest.fixture(scope="session")
def synthetic_space() -> LabelSpace:
    return label_space("synthetic")


@pytest.fixture(scope="session")
def synthetic_bank() -> TemplateBank:
    return shipped_bank("synthetic")


@pytest.fixture(scope="session")
def chemprot_bank() -> TemplateBank:
    return shipped_bank("chemprot")


@pytest.fixture
def tiny_instances() -> list[Instance]:
    return [
        Instance("i0", "@HEAD$ links to @TAIL$ now", "A"),
        Instance("i1", "@HEAD$ and @TAIL$ were seen", "0"),
        Instance("i2", "@HEAD$ breaks @TAIL$ badly", "B"),
    ]
