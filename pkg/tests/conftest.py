from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "docs" / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(autouse=True)
def _two_threads(monkeypatch):
    monkeypatch.setenv("BERGMAN_SENSE_THREADS", "2")
