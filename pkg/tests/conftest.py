"""
Shared fixtures.

TESTIMATION_HOME is pointed at a throwaway directory before any src module
is imported, so the config singleton, logs and run history never touch the
real home directory.
"""

import os
import tempfile

os.environ.setdefault("TESTIMATION_HOME", tempfile.mkdtemp(prefix="testimation-tests-"))
os.environ.setdefault("TESTIMATION_THREADS", "1")

import numpy as np
import pytest


@pytest.fixture
def rng():
    """Fixed-seed generator for randomized properties."""
    return np.random.default_rng(20240611)


@pytest.fixture
def isolated_home(tmp_path, monkeypatch):
    """Per-test TESTIMATION_HOME for code that reads it at call time."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("TESTIMATION_HOME", str(home))
    monkeypatch.delenv("TESTIMATION_DB_PATH", raising=False)
    return home
