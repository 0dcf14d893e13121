"""Tests for atom_rates.config."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from atom_rates.config import DEFAULT_OUT_DIR, Config, Units, load_config

ENV_VARS = [
    "ATOM_RATES_OUT_DIR",
    "ATOM_RATES_WORKERS",
    "ATOM_RATES_UNITS",
    "ATOM_RATES_LOG_LEVEL",
    "ATOM_RATES_ORACLE_TOLERANCE",
]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr("atom_rates.config.SETTINGS_DIR", tmp_path / "settings")


def test_load_config_defaults():
    config = load_config()
    assert config.out_dir == DEFAULT_OUT_DIR
    assert config.workers == 1
    assert config.units == Units.OMEGA0
    assert config.log_level == "WARNING"
    assert config.oracle_tolerance == 1e-6


def test_load_config_environment(monkeypatch):
    monkeypatch.setenv("ATOM_RATES_OUT_DIR", "/tmp/rates")
    monkeypatch.setenv("ATOM_RATES_WORKERS", "4")
    monkeypatch.setenv("ATOM_RATES_UNITS", "Natural")
    monkeypatch.setenv("ATOM_RATES_LOG_LEVEL", "debug")
    monkeypatch.setenv("ATOM_RATES_ORACLE_TOLERANCE", "1e-8")
    config = load_config()
    assert config.out_dir == Path("/tmp/rates")
    assert config.workers == 4
    assert config.units == Units.NATURAL
    assert config.log_level == "DEBUG"
    assert config.oracle_tolerance == 1e-8


def test_overrides_beat_environment(monkeypatch):
    monkeypatch.setenv("ATOM_RATES_WORKERS", "4")
    config = load_config(workers=2, out_dir="elsewhere")
    assert config.workers == 2
    assert config.out_dir == Path("elsewhere")


def test_settings_dotenv(monkeypatch, tmp_path):
    settings = tmp_path / "settings"
    settings.mkdir()
    (settings / ".env").write_text("ATOM_RATES_WORKERS=3\n")
    # registered so the value load_dotenv exports is removed afterwards
    monkeypatch.setenv("ATOM_RATES_WORKERS", "0")
    monkeypatch.delenv("ATOM_RATES_WORKERS")
    assert load_config().workers == 3


def test_invalid_units(monkeypatch):
    monkeypatch.setenv("ATOM_RATES_UNITS", "furlongs")
    with pytest.raises(ValueError):
        load_config()


def test_workers_positive():
    with pytest.raises(ValidationError):
        Config(workers=0)
