"""Result tables and the run metadata sidecar.

Every quantity is written to its own delimiter-separated file: '#'-prefixed header lines,
one row naming the columns, then data rows. Floats carry 17 significant digits so a table
parses back into identical values; missing values are empty cells.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field

from atom_rates import __version__

METADATA_FILENAME = "metadata.json"


class Quantity(str, Enum):
    SPECTRAL = "spectral"
    RATES = "rates"
    RELAXATION = "relaxation"
    EQUIVALENCE = "equivalence"
    BOUNDARY_FUNCTIONS = "boundary_functions"
    COMPARISON = "comparison"


def make_table_filename(quantity: Quantity) -> str:
    """Example: rates.tsv"""
    return f"{quantity.value}.tsv"


def format_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


class ResultRow(BaseModel):
    """One evaluated scenario; columns not requested for a table stay ``None``."""

    row: int
    scenario: str
    method: str
    z0: float
    beta: float
    a: float
    f_x: float | None = None
    f_y: float | None = None
    f_z: float | None = None
    g_plus: float | None = None
    g_minus: float | None = None
    a_down: float | None = None
    a_up: float | None = None
    g_plus_x: float | None = None
    g_plus_y: float | None = None
    g_plus_z: float | None = None
    g_minus_x: float | None = None
    g_minus_y: float | None = None
    g_minus_z: float | None = None
    vf_excited: float | None = None
    vf_ground: float | None = None
    rr_any_state: float | None = None
    total_excited: float | None = None
    total_ground: float | None = None
    thermal_beta: float | None = None
    accelerated_factor: float | None = None
    thermal_factor: float | None = None
    difference: float | None = None
    achieved_error: float | None = None

    def rescaled(self, omega0: float, gamma0: float) -> ResultRow:
        """Lengths and 1/T in 1/omega0, rates in gamma0, powers in omega0*gamma0."""
        data = self.model_dump()
        for key in ("z0", "beta", "thermal_beta"):
            if data[key] is not None:
                data[key] = data[key] * omega0
        data["a"] = data["a"] / omega0
        rate_keys = [k for k in data if k.startswith(("g_plus", "g_minus", "a_down", "a_up"))]
        for key in [*rate_keys, "achieved_error"]:
            if data[key] is not None:
                data[key] = data[key] / gamma0
        for key in ("vf_excited", "vf_ground", "rr_any_state", "total_excited", "total_ground"):
            if data[key] is not None:
                data[key] = data[key] / (omega0 * gamma0)
        return ResultRow(**data)


class RelaxationPoint(BaseModel):
    row: int
    initial: str
    t: float
    energy: float
    equilibrium_energy: float
    decay_rate: float
    mc_energy: float | None = None
    mc_standard_error: float | None = None
    seed: int | None = None

    def rescaled(self, omega0: float, gamma0: float) -> RelaxationPoint:
        data = self.model_dump()
        data["t"] = data["t"] * gamma0
        data["decay_rate"] = data["decay_rate"] / gamma0
        for key in ("energy", "equilibrium_energy", "mc_energy", "mc_standard_error"):
            if data[key] is not None:
                data[key] = data[key] / omega0
        return RelaxationPoint(**data)


class ComparisonRow(BaseModel):
    row: int
    scenario: str
    z0: float
    beta: float
    a: float
    component: str
    closed: float
    oracle: float
    abs_difference: float
    allowed: float
    achieved_error: float
    flagged: bool


TABLE_MODELS: dict[Quantity, type[BaseModel]] = {
    Quantity.SPECTRAL: ResultRow,
    Quantity.RATES: ResultRow,
    Quantity.BOUNDARY_FUNCTIONS: ResultRow,
    Quantity.EQUIVALENCE: ResultRow,
    Quantity.RELAXATION: RelaxationPoint,
    Quantity.COMPARISON: ComparisonRow,
}

_KEY_COLUMNS = ["row", "scenario", "method", "z0", "beta", "a"]

TABLE_COLUMNS: dict[Quantity, list[str]] = {
    Quantity.BOUNDARY_FUNCTIONS: [*_KEY_COLUMNS, "f_x", "f_y", "f_z"],
    Quantity.SPECTRAL: [
        *_KEY_COLUMNS,
        "g_plus",
        "g_minus",
        "a_down",
        "a_up",
        "g_plus_x",
        "g_plus_y",
        "g_plus_z",
        "g_minus_x",
        "g_minus_y",
        "g_minus_z",
        "achieved_error",
    ],
    Quantity.RATES: [
        *_KEY_COLUMNS,
        "vf_excited",
        "vf_ground",
        "rr_any_state",
        "total_excited",
        "total_ground",
        "achieved_error",
    ],
    Quantity.EQUIVALENCE: [
        *_KEY_COLUMNS,
        "thermal_beta",
        "f_x",
        "accelerated_factor",
        "thermal_factor",
        "difference",
    ],
    Quantity.RELAXATION: list(RelaxationPoint.model_fields),
    Quantity.COMPARISON: list(ComparisonRow.model_fields),
}


class RunMetadata(BaseModel):
    """Sidecar describing how the tables were produced."""

    version: str = __version__
    config_version: int = 1
    config_path: str | None = None
    seed: int
    method: str
    units: str
    workers: int
    oracle: dict[str, object] = Field(default_factory=dict)
    quantities: list[str] = Field(default_factory=list)
    tables: list[str] = Field(default_factory=list)
    rows: int = 0
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


class ResultStore:
    """Writes and reads the tables of one run directory."""

    def __init__(self, out_dir: Path, delimiter: str = "\t") -> None:
        self.out_dir = Path(out_dir)
        self.delimiter = delimiter

    def table_path(self, quantity: Quantity) -> Path:
        return self.out_dir / make_table_filename(quantity)

    @property
    def metadata_path(self) -> Path:
        return self.out_dir / METADATA_FILENAME

    def write_table(
        self, quantity: Quantity, rows: list[BaseModel], units: str, note: str | None = None
    ) -> Path:
        columns = TABLE_COLUMNS[quantity]
        lines = [
            f"# atom-rates {__version__}",
            f"# quantity: {quantity.value}",
            f"# units: {units}",
        ]
        if note:
            lines.append(f"# {note}")
        lines.append(self.delimiter.join(columns))
        for row in rows:
            record = row.model_dump()
            lines.append(self.delimiter.join(format_value(record[c]) for c in columns))
        path = self.table_path(quantity)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def read_records(self, quantity: Quantity) -> tuple[dict[str, str], list[dict[str, str]]]:
        """Header metadata and raw string records of a table."""
        header: dict[str, str] = {}
        columns: list[str] | None = None
        records: list[dict[str, str]] = []
        for line in self.table_path(quantity).read_text(encoding="utf-8").splitlines():
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition(":")
                if sep:
                    header[key.strip()] = value.strip()
                continue
            cells = line.split(self.delimiter)
            if columns is None:
                columns = cells
                continue
            records.append(dict(zip(columns, cells)))
        return header, records

    def read_table(self, quantity: Quantity) -> list[BaseModel]:
        model = TABLE_MODELS[quantity]
        _, records = self.read_records(quantity)
        return [
            model.model_validate({k: (v if v != "" else None) for k, v in record.items()})
            for record in records
        ]

    def save_metadata(self, metadata: RunMetadata) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.metadata_path.write_text(metadata.model_dump_json(indent=2), encoding="utf-8")
        return self.metadata_path

    def load_metadata(self) -> RunMetadata:
        return RunMetadata.model_validate_json(self.metadata_path.read_text(encoding="utf-8"))
