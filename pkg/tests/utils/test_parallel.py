"""
Tests for worker-count resolution and the order-preserving pool map.
"""

from unittest.mock import patch

from src.utils.parallel import ordered_map, physical_core_count, resolve_worker_count


def _square(x):
    return x * x


def test_explicit_count_wins(monkeypatch):
    monkeypatch.setenv("TESTIMATION_THREADS", "6")
    assert resolve_worker_count(3) == 3
    assert resolve_worker_count(0) == 1


def test_env_var(monkeypatch):
    monkeypatch.setenv("TESTIMATION_THREADS", "5")
    assert resolve_worker_count(None) == 5


def test_bad_env_var_falls_back(monkeypatch):
    monkeypatch.setenv("TESTIMATION_THREADS", "many")
    with patch("src.utils.parallel.physical_core_count", return_value=4):
        assert resolve_worker_count(None) == 4


def test_physical_cores_via_psutil():
    with patch("psutil.cpu_count", return_value=8):
        assert physical_core_count() == 8


def test_physical_cores_unknown():
    with patch("psutil.cpu_count", return_value=None), patch("os.cpu_count", return_value=2):
        assert physical_core_count() == 2


def test_ordered_map_serial():
    assert ordered_map(_square, range(5), workers=1) == [0, 1, 4, 9, 16]


def test_ordered_map_pool_preserves_order():
    items = list(range(40))
    assert ordered_map(_square, items, workers=2) == [x * x for x in items]
