"""Run configurations and parameter sweeps shared by the CLI commands."""

from __future__ import annotations

import itertools
import logging
import math
import tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from atom_rates.config import Config, Units
from atom_rates.domain import (
    AtomSpec,
    Axis,
    InitialState,
    NumericalError,
    Scenario,
    is_accelerated,
    mirror_distance,
    parse_scenario,
    scenario_parameters,
)
from atom_rates.dynamics import analytic_relaxation, monte_carlo_relaxation
from atom_rates.rates import (
    EquivalenceReport,
    SpectralRates,
    energy_rates,
    equivalence_check,
    spectral_rates,
)
from atom_rates.spectral import (
    ZERO_FLOOR,
    BoundaryFunctions,
    Method,
    OracleControls,
    f_accelerated,
    f_static,
)
from atom_rates.storage import (
    ComparisonRow,
    Quantity,
    RelaxationPoint,
    ResultRow,
    ResultStore,
    RunMetadata,
)

logger = logging.getLogger(__name__)

CONFIG_VERSION = 1


class ConfigError(Exception):
    """Raised when a run configuration cannot be read or validated."""

    def __init__(self, message: str, diagnostics: list[str] | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or []


class RowComputationError(NumericalError):
    """A sweep row failed numerically; carries the parameter tuple."""

    def __init__(self, index: int, scenario: Scenario, cause: Exception) -> None:
        self.index = index
        self.scenario = scenario
        self.parameters = {"scenario": scenario.kind, **scenario_parameters(scenario)}
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        super().__init__(f"row {index} ({params}): {cause}")


class MethodChoice(str, Enum):
    CLOSED = "closed"
    ORACLE = "oracle"
    BOTH = "both"

    @property
    def methods(self) -> tuple[Method, ...]:
        if self == MethodChoice.BOTH:
            return (Method.CLOSED_FORM, Method.ORACLE)
        return (Method.CLOSED_FORM,) if self == MethodChoice.CLOSED else (Method.ORACLE,)


# -- configuration models ----------------------------------------------------


class GridRange(BaseModel):
    model_config = ConfigDict(extra="forbid")

    start: float
    stop: float
    num: int = Field(ge=1)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _check_log(self) -> GridRange:
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            raise ValueError("log spacing needs positive start and stop")
        return self

    def values(self) -> list[float]:
        if self.spacing == "log":
            grid = np.geomspace(self.start, self.stop, self.num)
        else:
            grid = np.linspace(self.start, self.stop, self.num)
        return [float(v) for v in grid]


GridValues = float | list[float] | GridRange

_PARAMETERS: dict[str, tuple[set[str], set[str]]] = {
    # scenario kind: (required, optional)
    "static_free_space": (set(), {"beta"}),
    "static_mirror_thermal": ({"z0"}, {"beta"}),
    "accelerated_mirror": ({"a", "z0"}, set()),
    "accelerated_free_space": ({"a"}, set()),
}


def _grid(values: GridValues | None) -> list[float] | None:
    if values is None:
        return None
    if isinstance(values, GridRange):
        return values.values()
    if isinstance(values, list):
        if not values:
            raise ValueError("parameter lists must not be empty")
        return list(values)
    return [values]


class SweepBlock(BaseModel):
    """Cartesian product of parameter values for one scenario family."""

    model_config = ConfigDict(extra="forbid")

    scenario: Literal[
        "static_free_space", "static_mirror_thermal", "accelerated_mirror", "accelerated_free_space"
    ]
    z0: GridValues | None = None
    beta: GridValues | None = None
    a: GridValues | None = None

    @model_validator(mode="after")
    def _check_parameters(self) -> SweepBlock:
        required, optional = _PARAMETERS[self.scenario]
        given = {name for name in ("z0", "beta", "a") if getattr(self, name) is not None}
        if missing := required - given:
            raise ValueError(f"{self.scenario} needs {', '.join(sorted(missing))}")
        if extra := given - required - optional:
            raise ValueError(f"{self.scenario} does not take {', '.join(sorted(extra))}")
        if self.scenario == "accelerated_mirror" or self.scenario == "accelerated_free_space":
            if any(a == 0.0 for a in _grid(self.a) or []):
                raise ValueError(
                    "a = 0 is not an accelerated scenario; "
                    "use static_mirror_thermal with beta = inf"
                )
        try:
            self.scenarios()
        except ValidationError as exc:
            first = exc.errors()[0]
            field_name = ".".join(str(p) for p in first["loc"][1:]) or "value"
            raise ValueError(f"{field_name}: {first['msg']}") from None
        return self

    def scenarios(self) -> list[Scenario]:
        names = [n for n in ("z0", "beta", "a") if getattr(self, n) is not None]
        grids = [_grid(getattr(self, n)) for n in names]
        return [
            parse_scenario({"kind": self.scenario, **dict(zip(names, combo))})
            for combo in itertools.product(*grids)
        ]


class AtomSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    omega0: float = 1.0
    gamma0: float = 1.0
    alpha: Literal["isotropic", "x", "y", "z"] | tuple[float, float, float] = "isotropic"

    def spec(self) -> AtomSpec:
        if self.alpha == "isotropic":
            return AtomSpec(omega0=self.omega0, gamma0=self.gamma0)
        if isinstance(self.alpha, str):
            return AtomSpec.polarized(self.alpha, self.omega0, self.gamma0)
        return AtomSpec(omega0=self.omega0, gamma0=self.gamma0, alpha=self.alpha)

    @model_validator(mode="after")
    def _check_atom(self) -> AtomSection:
        try:
            self.spec()
        except ValidationError as exc:
            first = exc.errors()[0]
            raise ValueError(f"{'.'.join(map(str, first['loc']))}: {first['msg']}") from None
        return self


class RelaxationSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    initial: list[Literal["excited", "ground"] | float] = Field(
        default_factory=lambda: ["excited"], min_length=1
    )
    t_end: float = Field(default=5.0, gt=0)  # in decay times 1/(A_up + A_down)
    points: int = Field(default=20, ge=2)
    ensemble: int = Field(default=0, ge=0)
    mc_workers: int = Field(default=1, ge=1)

    @field_validator("initial")
    @classmethod
    def _check_fractions(cls, values: list[str | float]) -> list[str | float]:
        for value in values:
            if isinstance(value, float) and not 0.0 <= value <= 1.0:
                raise ValueError(f"excited fraction {value} outside [0, 1]")
        return values

    def states(self) -> list[tuple[str, InitialState]]:
        out = []
        for value in self.initial:
            if value == "excited":
                out.append(("excited", InitialState.excited()))
            elif value == "ground":
                out.append(("ground", InitialState.ground()))
            else:
                out.append((f"mixed:{value}", InitialState.mixed(float(value))))
        return out


class RunConfig(BaseModel):
    """One experiment: an atom, a sweep over scenarios, and the tables to produce."""

    model_config = ConfigDict(extra="forbid")

    config_version: Literal[1]
    atom: AtomSection = Field(default_factory=AtomSection)
    sweep: list[SweepBlock] = Field(min_length=1)
    outputs: list[Quantity] = Field(default_factory=lambda: [Quantity.RATES], min_length=1)
    method: MethodChoice = MethodChoice.CLOSED
    oracle: OracleControls = Field(default_factory=OracleControls)
    relaxation: RelaxationSection = Field(default_factory=RelaxationSection)
    seed: int = Field(default=0, ge=0, lt=2**64)
    units: Units | None = None
    out: Path | None = None

    @model_validator(mode="after")
    def _check_consistency(self) -> RunConfig:
        spec = self.atom.spec()
        if spec.alpha[1:] != (0.0, 0.0) and any(
            block.scenario.startswith("accelerated") for block in self.sweep
        ):
            raise ValueError("accelerated scenarios need an x-polarized atom (alpha = \"x\")")
        if Quantity.COMPARISON in self.outputs and self.method != MethodChoice.BOTH:
            raise ValueError("the comparison table needs method = \"both\"")
        if Quantity.EQUIVALENCE in self.outputs and not any(
            block.scenario.startswith("accelerated") for block in self.sweep
        ):
            raise ValueError("the equivalence table needs an accelerated sweep block")
        return self

    @property
    def atom_spec(self) -> AtomSpec:
        return self.atom.spec()

    def scenarios(self) -> list[Scenario]:
        return [s for block in self.sweep for s in block.scenarios()]


def _locate(text: str, loc: tuple[int | str, ...]) -> int | None:
    """Best-effort line number of the TOML key a validation error points at."""
    if not loc:
        return None
    first, rest = str(loc[0]), list(loc[1:])
    index = rest.pop(0) if rest and isinstance(rest[0], int) else None
    key = rest[0] if rest and isinstance(rest[0], str) else None
    current: tuple[str, int | None] | None = None
    counts: dict[str, int] = {}
    header_line = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[["):
            name = stripped.strip("[] ")
            counts[name] = counts.get(name, -1) + 1
            current = (name, counts[name])
            if name == first and counts[name] == (index or 0):
                header_line = number
            continue
        if stripped.startswith("["):
            current = (stripped.strip("[] "), None)
            if current[0] == first:
                header_line = number
            continue
        if "=" not in stripped or stripped.startswith("#"):
            continue
        name = stripped.split("=", 1)[0].strip()
        if current is None and name == first:
            return number
        if current and current[0] == first and current[1] in (None, index) and name == key:
            return number
    return header_line


def load_run_config(path: Path) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML", [str(exc)]) from exc
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        diagnostics = []
        for error in exc.errors():
            loc = tuple(error["loc"])
            dotted = ".".join(str(p) for p in loc) or "(top level)"
            line = _locate(text, loc)
            prefix = f"line {line}: " if line else ""
            diagnostics.append(f"{prefix}{dotted}: {error['msg']}")
        raise ConfigError(f"{path}: invalid run configuration", diagnostics) from exc


# -- evaluation --------------------------------------------------------------


@dataclass(frozen=True)
class RowOutcome:
    index: int
    scenario: Scenario
    boundary: BoundaryFunctions | None
    spectra: dict[Method, SpectralRates]
    equivalence: EquivalenceReport | None


def boundary_functions_for(scenario: Scenario, omega0: float) -> BoundaryFunctions | None:
    z0 = mirror_distance(scenario)
    if math.isinf(z0):
        return None
    if is_accelerated(scenario):
        return f_accelerated(omega0, z0, scenario.a)
    return f_static(omega0, z0)


def evaluate_row(index: int, scenario: Scenario, config: RunConfig) -> RowOutcome:
    atom = config.atom_spec
    try:
        spectra = {
            method: spectral_rates(scenario, atom, method, config.oracle)
            for method in config.method.methods
        }
    except NumericalError as exc:
        raise RowComputationError(index, scenario, exc) from exc
    equivalence = None
    if is_accelerated(scenario):
        equivalence = equivalence_check(atom.omega0, mirror_distance(scenario), scenario.a)
    logger.debug("row %d evaluated: %s", index, scenario)
    return RowOutcome(
        index, scenario, boundary_functions_for(scenario, atom.omega0), spectra, equivalence
    )


def evaluate_sweep(config: RunConfig, workers: int = 1) -> list[RowOutcome]:
    """Evaluate every sweep row; output order follows the sweep regardless of completion."""
    scenarios = config.scenarios()
    logger.info("evaluating %d sweep rows with %d workers", len(scenarios), workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(
                pool.map(lambda item: evaluate_row(*item, config), enumerate(scenarios))
            )
    return [evaluate_row(i, s, config) for i, s in enumerate(scenarios)]


def _result_row(outcome: RowOutcome, method: Method, omega0: float) -> ResultRow:
    sr = outcome.spectra[method]
    er = energy_rates(sr, omega0)
    params = scenario_parameters(outcome.scenario)
    bf = outcome.boundary
    eq = outcome.equivalence
    per_axis: dict[str, float | None] = {}
    for prefix, spectra in (("g_plus", sr.emission), ("g_minus", sr.excitation)):
        for axis in Axis:
            result = (spectra or {}).get(axis)
            per_axis[f"{prefix}_{axis.value}"] = result.value if result else None
    return ResultRow(
        row=outcome.index,
        scenario=outcome.scenario.kind,
        method=method.value,
        **params,
        f_x=bf.f_x if bf else None,
        f_y=bf.f_y if bf else None,
        f_z=bf.f_z if bf else None,
        g_plus=sr.g_plus,
        g_minus=sr.g_minus,
        a_down=sr.a_down,
        a_up=sr.a_up,
        **per_axis,
        vf_excited=er.vf_excited,
        vf_ground=er.vf_ground,
        rr_any_state=er.rr_any_state,
        total_excited=er.total_excited,
        total_ground=er.total_ground,
        thermal_beta=eq.thermal_beta if eq else None,
        accelerated_factor=eq.accelerated_factor if eq else None,
        thermal_factor=eq.thermal_factor if eq else None,
        difference=eq.difference if eq else None,
        achieved_error=sr.achieved_error if method == Method.ORACLE else None,
    )


def compare_methods(outcomes: list[RowOutcome], tolerance: float) -> list[ComparisonRow]:
    """|closed - oracle| per row for g+ and g-, flagged when above the oracle's error bound."""
    rows = []
    for outcome in outcomes:
        closed = outcome.spectra.get(Method.CLOSED_FORM)
        oracle = outcome.spectra.get(Method.ORACLE)
        if closed is None or oracle is None:
            raise ValueError("compare_methods needs rows evaluated with both methods")
        params = scenario_parameters(outcome.scenario)
        floor = ZERO_FLOOR * max(
            (r.value for r in (closed.emission or {}).values()), default=0.0
        )
        for component, c, o, err in (
            ("g_plus", closed.g_plus, oracle.g_plus, oracle.emission_error),
            ("g_minus", closed.g_minus, oracle.g_minus, oracle.excitation_error),
        ):
            difference = abs(c - o)
            allowed = max(tolerance * abs(c), err, floor)
            rows.append(
                ComparisonRow(
                    row=outcome.index,
                    scenario=outcome.scenario.kind,
                    **params,
                    component=component,
                    closed=c,
                    oracle=o,
                    abs_difference=difference,
                    allowed=allowed,
                    achieved_error=err,
                    flagged=difference > allowed,
                )
            )
    return rows


def _relaxation_points(
    outcome: RowOutcome, method: Method, config: RunConfig, seed: int
) -> list[RelaxationPoint]:
    atom = config.atom_spec
    sr = outcome.spectra[method]
    settings = config.relaxation
    timescale = 1.0 / sr.decay_rate if sr.decay_rate > 0 else 1.0 / (atom.gamma0 or 1.0)
    times = np.linspace(0.0, settings.t_end * timescale, settings.points)
    points = []
    for label, state in settings.states():
        curve = analytic_relaxation(sr, atom.omega0, state, times)
        mc_energy = mc_error = None
        if settings.ensemble:
            ensemble = monte_carlo_relaxation(
                sr, atom.omega0, settings.ensemble, state, times, seed, settings.mc_workers
            )
            mc_energy, mc_error = ensemble.energy, ensemble.standard_error
        for k, t in enumerate(times):
            points.append(
                RelaxationPoint(
                    row=outcome.index,
                    initial=label,
                    t=float(t),
                    energy=float(curve.energy[k]),
                    equilibrium_energy=curve.equilibrium_energy,
                    decay_rate=curve.decay_rate,
                    mc_energy=float(mc_energy[k]) if mc_energy is not None else None,
                    mc_standard_error=float(mc_error[k]) if mc_error is not None else None,
                    seed=seed if settings.ensemble else None,
                )
            )
    return points


def row_seeds(master_seed: int, count: int) -> list[int]:
    """Independent per-row seeds derived from the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


@dataclass
class RunResult:
    out_dir: Path
    tables: dict[Quantity, Path] = field(default_factory=dict)
    outcomes: list[RowOutcome] = field(default_factory=list)
    comparison: list[ComparisonRow] = field(default_factory=list)

    @property
    def flagged(self) -> list[ComparisonRow]:
        return [row for row in self.comparison if row.flagged]


def run_sweep(
    config: RunConfig,
    settings: Config,
    *,
    config_path: Path | None = None,
) -> RunResult:
    """Evaluate the sweep and write one table per requested quantity plus metadata."""
    atom = config.atom_spec
    units = config.units or settings.units
    if units == Units.OMEGA0 and atom.gamma0 == 0.0:
        raise ConfigError("omega0 units need gamma0 > 0", ["atom.gamma0: must be positive"])
    if "tolerance" not in config.oracle.model_fields_set:
        oracle = config.oracle.model_copy(update={"tolerance": settings.oracle_tolerance})
        config = config.model_copy(update={"oracle": oracle})
    out_dir = Path(config.out or settings.out_dir)
    store = ResultStore(out_dir, settings.delimiter)
    outcomes = evaluate_sweep(config, settings.workers)
    methods = config.method.methods
    primary = methods[0]

    def scaled(row):
        return row.rescaled(atom.omega0, atom.gamma0) if units == Units.OMEGA0 else row

    result_rows = [
        scaled(_result_row(outcome, method, atom.omega0))
        for outcome in outcomes
        for method in methods
    ]
    result = RunResult(out_dir=out_dir, outcomes=outcomes)
    for quantity in config.outputs:
        if quantity in (Quantity.SPECTRAL, Quantity.RATES):
            rows = result_rows
        elif quantity == Quantity.BOUNDARY_FUNCTIONS:
            rows = [r for r in result_rows if r.method == primary.value]
        elif quantity == Quantity.EQUIVALENCE:
            rows = [
                r
                for r in result_rows
                if r.method == primary.value and r.scenario.startswith("accelerated")
            ]
        elif quantity == Quantity.RELAXATION:
            seeds = row_seeds(config.seed, len(outcomes))
            rows = [
                scaled(point)
                for outcome, seed in zip(outcomes, seeds)
                for point in _relaxation_points(outcome, primary, config, seed)
            ]
        else:
            result.comparison = compare_methods(outcomes, config.oracle.tolerance)
            rows = result.comparison
        result.tables[quantity] = store.write_table(quantity, rows, units.value)

    metadata = RunMetadata(
        config_version=config.config_version,
        config_path=str(config_path) if config_path else None,
        seed=config.seed,
        method=config.method.value,
        units=units.value,
        workers=settings.workers,
        oracle=config.oracle.model_dump(),
        quantities=[q.value for q in config.outputs],
        tables=[p.name for p in result.tables.values()],
        rows=len(outcomes),
    )
    store.save_metadata(metadata)
    return result
