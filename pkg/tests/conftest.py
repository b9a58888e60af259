import pytest


@pytest.fixture(autouse=True)
def _no_ambient_seed(monkeypatch):
    """Keep the environment seed override from leaking into tests."""
    monkeypatch.delenv("TVPHASE_SEED", raising=False)
