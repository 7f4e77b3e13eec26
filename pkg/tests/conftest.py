"""Shared test configuration.

Every test must be deterministic, so the worker-pool environment override
is cleared up front; individual tests set it explicitly when they exercise
the cap.
"""

import pytest


@pytest.fixture(autouse=True)
def _clear_thread_env(monkeypatch):
    monkeypatch.delenv("SPARSE_WEIGHTS_THREADS", raising=False)
