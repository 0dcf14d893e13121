"""Process-level settings for Atom Rates."""

from __future__ import annotations

import os
from enum import Enum
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field

DEFAULT_OUT_DIR = Path("results")
SETTINGS_DIR = Path.home() / ".atom-rates"


class Units(str, Enum):
    OMEGA0 = "omega0"  # frequencies in omega0, rates in gamma0
    NATURAL = "natural"


class Config(BaseModel):
    """Application configuration."""

    out_dir: Path = DEFAULT_OUT_DIR
    workers: int = Field(default=1, ge=1)
    units: Units = Units.OMEGA0
    log_level: str = "WARNING"
    oracle_tolerance: float = Field(default=1e-6, gt=0)
    delimiter: str = "\t"


def load_config(**overrides: object) -> Config:
    """Load config from environment variables, .env file, and overrides.

    Resolution order (highest priority first):
    1. Explicit overrides (CLI flags)
    2. Environment variables
    3. .env file
    4. Defaults
    """
    load_dotenv()
    load_dotenv(SETTINGS_DIR / ".env")

    kwargs: dict[str, object] = {}

    out_dir = overrides.get("out_dir") or os.getenv("ATOM_RATES_OUT_DIR")
    if out_dir:
        kwargs["out_dir"] = Path(str(out_dir))

    workers = overrides.get("workers") or os.getenv("ATOM_RATES_WORKERS")
    if workers:
        kwargs["workers"] = int(workers)

    units = overrides.get("units") or os.getenv("ATOM_RATES_UNITS")
    if units:
        kwargs["units"] = Units(str(units).strip().lower())

    log_level = overrides.get("log_level") or os.getenv("ATOM_RATES_LOG_LEVEL")
    if log_level:
        kwargs["log_level"] = str(log_level).upper()

    tolerance = overrides.get("oracle_tolerance") or os.getenv("ATOM_RATES_ORACLE_TOLERANCE")
    if tolerance:
        kwargs["oracle_tolerance"] = float(tolerance)

    return Config(**kwargs)
