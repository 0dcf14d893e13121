"""CLI entry point for Atom Rates."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

console = Console()

EXIT_FAILED_CHECKS = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_UNITS = click.Choice(["omega0", "natural"])
_METHODS = click.Choice(["closed", "oracle", "both"])


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _report_config_error(exc: Exception) -> None:
    console.print(f"[red]Invalid configuration:[/red] {exc}")
    for line in getattr(exc, "diagnostics", []):
        console.print(f"  {line}")


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log numerical decisions at DEBUG level.")
@click.pass_context
def main(ctx: click.Context, verbose: bool) -> None:
    """Atom Rates - radiative rates and relaxation of two-level atoms near a mirror."""
    from atom_rates.config import load_config

    ctx.ensure_object(dict)
    level = "DEBUG" if verbose else load_config().log_level
    _setup_logging(level)


@main.command()
@click.argument("config_file", required=False, type=click.Path(path_type=Path))
@click.option("--verify", is_flag=True, help="Run the property checks and report pass/fail.")
@click.option("--quick", is_flag=True, help="With --verify, use reduced grids.")
@click.option("--method", type=_METHODS, default=None, help="Override the configured method.")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output directory.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed.")
@click.option("--units", type=_UNITS, default=None, help="Unit convention of the tables.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel sweep rows.")
@click.pass_context
def run(
    ctx: click.Context,
    config_file: Path | None,
    verify: bool,
    quick: bool,
    method: str | None,
    out: Path | None,
    seed: int | None,
    units: str | None,
    workers: int | None,
) -> None:
    """Evaluate a sweep configuration and write one table per requested quantity.

    Examples:
      atom-rates run configs/mirror_profile.toml
      atom-rates run configs/mirror_profile.toml --method both --out results/profile
      atom-rates run --verify --quick
    """
    if config_file is None and not verify:
        raise click.UsageError("a CONFIG_FILE is required unless --verify is given")

    failed_checks = False
    if verify:
        failed_checks = not _print_checks(quick)
    if config_file is not None:
        _run_config(config_file, method, out, seed, units, workers)
    if failed_checks:
        raise SystemExit(EXIT_FAILED_CHECKS)


def _print_checks(quick: bool) -> bool:
    from atom_rates.verify import run_checks

    results = run_checks(quick=quick)
    table = Table(title="Property checks" + (" (quick)" if quick else ""))
    table.add_column("Check", style="cyan")
    table.add_column("Result", justify="center")
    table.add_column("Detail")
    for result in results:
        verdict = "[green]pass[/green]" if result.passed else "[red]FAIL[/red]"
        table.add_row(result.name, verdict, result.detail)
    console.print(table)
    failed = sum(not r.passed for r in results)
    console.print(f"\n[dim]{len(results) - failed} passed, {failed} failed[/dim]")
    return failed == 0


def _load(config_file: Path, **updates: object):
    from atom_rates.sweep import ConfigError, RunConfig, load_run_config

    try:
        config = load_run_config(config_file)
        if updates:
            data = config.model_dump(exclude_unset=True)
            data.update({k: v for k, v in updates.items() if v is not None})
            config = RunConfig.model_validate(data)
    except ConfigError as exc:
        _report_config_error(exc)
        raise SystemExit(EXIT_CONFIG)
    except ValueError as exc:
        _report_config_error(exc)
        raise SystemExit(EXIT_CONFIG)
    return config


def _execute(config, config_file: Path, workers: int | None):
    from atom_rates.config import load_config
    from atom_rates.domain import NumericalError
    from atom_rates.sweep import ConfigError, run_sweep

    settings = load_config(workers=workers)
    try:
        return run_sweep(config, settings, config_path=config_file)
    except ConfigError as exc:
        _report_config_error(exc)
        raise SystemExit(EXIT_CONFIG)
    except NumericalError as exc:
        console.print(f"[red]Numerical failure:[/red] {exc}")
        raise SystemExit(EXIT_NUMERIC)


def _run_config(
    config_file: Path,
    method: str | None,
    out: Path | None,
    seed: int | None,
    units: str | None,
    workers: int | None,
) -> None:
    config = _load(config_file, method=method, out=out, seed=seed, units=units)
    result = _execute(config, config_file, workers)
    console.print(f"[green]Wrote {len(result.outcomes)} rows to[/green] {result.out_dir}")
    for quantity, path in result.tables.items():
        console.print(f"  {quantity.value}: {path}")


@main.command()
@click.argument("config_file", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output directory.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel sweep rows.")
def compare(config_file: Path, out: Path | None, workers: int | None) -> None:
    """Compare closed forms with the quadrature oracle on every sweep row.

    Exits 1 when any row differs by more than the oracle's error bound.
    """
    from atom_rates.storage import Quantity

    config = _load(config_file, method="both", out=out)
    if Quantity.COMPARISON not in config.outputs:
        config = config.model_copy(update={"outputs": [*config.outputs, Quantity.COMPARISON]})
    result = _execute(config, config_file, workers)

    table = Table(title="Closed form vs oracle")
    table.add_column("Row", justify="right")
    table.add_column("Scenario", style="cyan")
    table.add_column("Component")
    table.add_column("|diff|", justify="right")
    table.add_column("Allowed", justify="right")
    table.add_column("", justify="center")
    for row in result.comparison:
        table.add_row(
            str(row.row),
            row.scenario,
            row.component,
            f"{row.abs_difference:.3e}",
            f"{row.allowed:.3e}",
            "[red]FLAG[/red]" if row.flagged else "[green]ok[/green]",
        )
    console.print(table)
    flagged = len(result.flagged)
    console.print(f"\n[dim]{flagged} flagged of {len(result.comparison)} values[/dim]")
    if flagged:
        raise SystemExit(EXIT_FAILED_CHECKS)


@main.command()
@click.option(
    "--scenario",
    type=click.Choice(
        [
            "static_free_space",
            "static_mirror_thermal",
            "accelerated_mirror",
            "accelerated_free_space",
        ]
    ),
    required=True,
)
@click.option("--z0", type=float, default=None, help="Distance from the mirror.")
@click.option("--beta", type=float, default=None, help="Inverse temperature (inf for vacuum).")
@click.option("--a", "accel", type=float, default=None, help="Proper acceleration.")
@click.option("--omega0", type=float, default=1.0, show_default=True)
@click.option("--gamma0", type=float, default=1.0, show_default=True)
@click.option(
    "--alpha",
    default="isotropic",
    show_default=True,
    help="isotropic, x, y, z, or three comma-separated weights.",
)
@click.option("--method", type=click.Choice(["closed", "oracle"]), default="closed")
@click.option("--units", type=_UNITS, default=None, help="omega0 (default) or natural units.")
@click.option("--json", "json_output", is_flag=True, help="Output the values as JSON.")
def show(
    scenario: str,
    z0: float | None,
    beta: float | None,
    accel: float | None,
    omega0: float,
    gamma0: float,
    alpha: str,
    method: str,
    units: str | None,
    json_output: bool,
) -> None:
    """Print boundary functions, Einstein coefficients and energy rates for one scenario.

    Examples:
      atom-rates show --scenario static_mirror_thermal --z0 1 --beta 2
      atom-rates show --scenario accelerated_mirror --z0 1 --a 1 --alpha x
      atom-rates show --scenario static_free_space --omega0 2 --units natural
    """
    from atom_rates.config import Units, load_config
    from atom_rates.domain import (
        NumericalError,
        is_accelerated,
        mirror_distance,
        scenario_parameters,
    )
    from atom_rates.rates import energy_rates, equivalence_check, spectral_rates
    from atom_rates.spectral import Method
    from atom_rates.storage import ResultRow
    from atom_rates.sweep import AtomSection, SweepBlock, boundary_functions_for

    params = {"z0": z0, "beta": beta, "a": accel}
    try:
        block = SweepBlock(scenario=scenario, **{k: v for k, v in params.items() if v is not None})
        sc = block.scenarios()[0]
        weights = alpha if alpha in ("isotropic", "x", "y", "z") else _parse_alpha(alpha)
        atom = AtomSection(omega0=omega0, gamma0=gamma0, alpha=weights).spec()
        sr = spectral_rates(sc, atom, Method(method))
    except NumericalError as exc:
        console.print(f"[red]Numerical failure:[/red] {exc}")
        raise SystemExit(EXIT_NUMERIC)
    except ValueError as exc:
        console.print(f"[red]Invalid parameters:[/red] {exc}")
        raise SystemExit(EXIT_CONFIG)

    er = energy_rates(sr, atom.omega0)
    values: dict[str, float | None] = {}
    bf = boundary_functions_for(sc, atom.omega0)
    if bf is not None:
        values.update({"f_x": bf.f_x, "f_y": bf.f_y, "f_z": bf.f_z})
    values.update(
        {
            "g_plus": sr.g_plus,
            "g_minus": sr.g_minus,
            "a_down": sr.a_down,
            "a_up": sr.a_up,
            "vf_excited": er.vf_excited,
            "vf_ground": er.vf_ground,
            "rr_any_state": er.rr_any_state,
            "total_excited": er.total_excited,
            "total_ground": er.total_ground,
        }
    )
    if method == "oracle":
        values["achieved_error"] = sr.achieved_error
    if is_accelerated(sc):
        eq = equivalence_check(atom.omega0, mirror_distance(sc), sc.a)
        values.update(
            {
                "thermal_beta": eq.thermal_beta,
                "accelerated_factor": eq.accelerated_factor,
                "thermal_factor": eq.thermal_factor,
                "difference": eq.difference,
            }
        )

    resolved = load_config(units=units).units
    if resolved == Units.OMEGA0:
        row = ResultRow(
            row=0, scenario=sc.kind, method=method, **scenario_parameters(sc), **values
        ).rescaled(atom.omega0, atom.gamma0)
        values = {key: getattr(row, key) for key in values}

    if json_output:
        payload = {
            "scenario": sc.model_dump(),
            "method": method,
            "units": resolved.value,
            "values": values,
        }
        click.echo(json.dumps(_jsonable(payload), indent=2))
        return

    table = Table(title=f"{scenario} ({method}, {resolved.value} units)")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    for key, value in values.items():
        table.add_row(key, "-" if value is None else f"{value:.10g}")
    console.print(table)


def _parse_alpha(text: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise click.BadParameter("alpha needs three comma-separated weights", param_hint="--alpha")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def _jsonable(value: object) -> object:
    """JSON has no infinity; write it the way the tables do."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


if __name__ == "__main__":
    main()
