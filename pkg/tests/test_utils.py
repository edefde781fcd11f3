import pytest

from framerecon.utils import (
    DEFAULT_OUTPUT_DIR,
    OUTPUT_DIR_ENV,
    WORKERS_ENV,
    default_output_dir,
    default_workers,
    get_env_int,
    get_env_str,
)


def test_get_env_int_parses_and_falls_back(monkeypatch):
    monkeypatch.delenv("FRAMERECON_TEST_INT", raising=False)
    assert get_env_int("FRAMERECON_TEST_INT", 7) == 7
    monkeypatch.setenv("FRAMERECON_TEST_INT", "12")
    assert get_env_int("FRAMERECON_TEST_INT", 7) == 12
    monkeypatch.setenv("FRAMERECON_TEST_INT", "twelve")
    with pytest.warns(RuntimeWarning, match="Invalid value"):
        assert get_env_int("FRAMERECON_TEST_INT", 7) == 7


def test_get_env_int_enforces_minimum(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "0")
    with pytest.warns(RuntimeWarning, match=">= 1"):
        assert default_workers() == 1
    monkeypatch.setenv(WORKERS_ENV, "4")
    assert default_workers() == 4


def test_get_env_str(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert default_output_dir() == DEFAULT_OUTPUT_DIR
    monkeypatch.setenv(OUTPUT_DIR_ENV, "  ")
    with pytest.warns(RuntimeWarning, match="Empty value"):
        assert get_env_str(OUTPUT_DIR_ENV, "fallback") == "fallback"
    monkeypatch.setenv(OUTPUT_DIR_ENV, "out/tables")
    assert default_output_dir() == "out/tables"
