"""Property checks run by ``atom-rates run --verify``.

Each check is a small function registered under a stable name. ``quick`` shrinks the
parameter grids (and the Monte Carlo ensembles) so the whole suite finishes in seconds.
"""

from __future__ import annotations

import logging
import math
import tempfile
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from atom_rates.config import Config, Units
from atom_rates.domain import (
    AcceleratedFreeSpace,
    AcceleratedMirror,
    AtomSpec,
    Axis,
    InitialState,
    StaticFreeSpace,
    StaticMirrorThermal,
    trajectory_point,
)
from atom_rates.dynamics import (
    analytic_relaxation,
    equilibrium_excited_fraction,
    integrate_relaxation,
    monte_carlo_relaxation,
)
from atom_rates.rates import (
    SpectralRates,
    energy_rates,
    equivalence_check,
    polarization_report,
    spectral_rates,
)
from atom_rates.spectral import (
    ACCEL_SERIES_THRESHOLD,
    STATIC_SERIES_THRESHOLD,
    Method,
    OracleControls,
    acceleration_correction,
    accelerated_transverse,
    boundary_normal,
    boundary_transverse,
    f_accelerated,
    f_static,
)
from atom_rates.storage import Quantity, ResultStore
from atom_rates.wightman import (
    ImageSumPolicy,
    correlator_accel_mirror_xx,
    correlator_along_trajectory,
    correlator_static_thermal,
    correlator_xx_from_points,
    static_image_terms,
    static_thermal_components,
)

logger = logging.getLogger(__name__)

CheckFn = Callable[[bool], tuple[bool, str]]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


_REGISTRY: dict[str, CheckFn] = {}


def check(name: str) -> Callable[[CheckFn], CheckFn]:
    def register(fn: CheckFn) -> CheckFn:
        _REGISTRY[name] = fn
        return fn

    return register


def available_checks() -> list[str]:
    return list(_REGISTRY)


def run_checks(quick: bool = False, names: list[str] | None = None) -> list[CheckResult]:
    """Run the registered checks in registration order; exceptions count as failures."""
    selected = names or available_checks()
    unknown = [n for n in selected if n not in _REGISTRY]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    results = []
    for name in selected:
        try:
            passed, detail = _REGISTRY[name](quick)
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failed check
            logger.debug("check %s raised", name, exc_info=True)
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        logger.info("check %s: %s", name, "pass" if passed else "FAIL")
        results.append(CheckResult(name, passed, detail))
    return results


def _rel(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else 0.0


def _rng() -> np.random.Generator:
    return np.random.default_rng(20240613)


# -- trajectories and correlators --------------------------------------------


@check("proper-time normalization")
def _proper_time(quick: bool) -> tuple[bool, str]:
    worst = 0.0
    h = 1e-5
    for a, z0 in ((0.5, 1.0), (2.0, 0.3)):
        sc = AcceleratedMirror(a=a, z0=z0)
        for tau in np.linspace(-2.0, 2.0, 5 if quick else 21):
            d = (trajectory_point(sc, tau + h) - trajectory_point(sc, tau - h)) / (2 * h)
            worst = max(worst, abs(d[0] ** 2 - d[1] ** 2 - d[2] ** 2 - d[3] ** 2 - 1.0))
    return worst < 1e-8, f"max |u.u - 1| = {worst:.2e}"


@check("stationarity")
def _stationarity(quick: bool) -> tuple[bool, str]:
    rng = _rng()
    sc = AcceleratedMirror(a=1.3, z0=0.7)
    worst = 0.0
    for tau, tau_p, shift in rng.uniform(-1.5, 1.5, size=(10 if quick else 100, 3)):
        def interval(t1: float, t2: float) -> float:
            d = trajectory_point(sc, t1) - trajectory_point(sc, t2)
            return d[0] ** 2 - d[1] ** 2 - d[2] ** 2 - d[3] ** 2

        worst = max(worst, _rel(interval(tau, tau_p), interval(tau + shift, tau_p + shift)))
    return worst < 1e-10, f"max relative drift {worst:.2e}"


@check("homogeneity")
def _homogeneity(quick: bool) -> tuple[bool, str]:
    rng = _rng()
    sc = AcceleratedMirror(a=0.8, z0=1.2)
    eps = 0.05
    worst = 0.0
    for tau, tau_p, shift in rng.uniform(-2.0, 2.0, size=(5 if quick else 50, 3)):
        def along(t1: float, t2: float) -> complex:
            x = trajectory_point(sc, complex(t1, -eps))
            xp = trajectory_point(sc, complex(t2, 0.0))
            return correlator_xx_from_points(x, xp)

        closed = correlator_accel_mirror_xx(sc.a, sc.z0, tau - tau_p, eps)
        worst = max(
            worst,
            _rel(along(tau, tau_p), along(tau + shift, tau_p + shift)),
            _rel(along(tau, tau_p), closed),
        )
    return worst < 1e-8, f"max relative deviation {worst:.2e}"


@check("hermiticity and image symmetry")
def _image_symmetry(quick: bool) -> tuple[bool, str]:
    z0, beta, eps = 0.8, 1.5, 0.1
    worst = 0.0
    for u in (0.3, 1.1, 2.7):
        g = correlator_static_thermal(z0, beta, u, eps)
        g_neg = correlator_static_thermal(z0, beta, -u, eps)
        worst = max(worst, _rel(g.xx.conjugate(), g_neg.xx), _rel(g.zz.conjugate(), g_neg.zz))
        for k in range(1, 4 if quick else 10):
            (tp, np_), (tm, nm) = static_image_terms(u, z0, beta, 0.0, [k, -k])
            worst = max(worst, _rel(tp.conjugate(), tm), _rel(np_.conjugate(), nm))
    return worst < 1e-12, f"max relative asymmetry {worst:.2e}"


@check("mirror term decays as z0^-4")
def _mirror_decay(quick: bool) -> tuple[bool, str]:
    u, eps = 1.0, 0.1
    limit = 1.0 / (16.0 * math.pi**2)
    worst = 0.0
    for z0 in (30.0, 100.0) if quick else (30.0, 100.0, 300.0):
        near_t, near_n = static_thermal_components(u, z0, math.inf, eps)
        free_t, free_n = static_thermal_components(u, math.inf, math.inf, eps)
        for near, free in ((near_t, free_t), (near_n, free_n)):
            worst = max(worst, _rel(complex(near - free) * z0**4, limit))
    return worst < 2e-3, f"max relative deviation from 1/(16 pi^2 z0^4): {worst:.2e}"


@check("KMS periodicity")
def _kms(quick: bool) -> tuple[bool, str]:
    policy = ImageSumPolicy.truncate_at_tolerance(1e-10)
    worst = 0.0
    for z0, beta in ((0.5, 1.0), (2.0, 3.0)):
        eps = beta / 20.0
        for u in (0.4, 1.7):
            shifted = correlator_static_thermal(z0, beta, complex(u, -beta + 2 * eps), eps, policy)
            mirrored = correlator_static_thermal(z0, beta, -u, eps, policy)
            worst = max(worst, _rel(shifted.xx, mirrored.xx), _rel(shifted.zz, mirrored.zz))
    return worst < 1e-6, f"max relative KMS violation {worst:.2e}"


@check("potential-derivative oracle")
def _potential_oracle(quick: bool) -> tuple[bool, str]:
    eps = 0.1
    static = correlator_static_thermal(1.0, math.inf, 0.7, eps)
    cases = [
        (StaticMirrorThermal(z0=1.0), Axis.X, static.xx),
        (StaticMirrorThermal(z0=1.0), Axis.Z, static.zz),
        (AcceleratedMirror(a=1.0, z0=1.0), Axis.X, correlator_accel_mirror_xx(1.0, 1.0, 0.7, eps)),
    ]
    if not quick:
        cases.append(
            (
                StaticMirrorThermal(z0=0.8, beta=2.0),
                Axis.X,
                correlator_static_thermal(0.8, 2.0, 0.7, eps).xx,
            )
        )
    worst = 0.0
    for sc, axis, expected in cases:
        value = correlator_along_trajectory(sc, 0.7, 0.0, eps, (axis, axis))
        worst = max(worst, _rel(value, expected))
    return worst < 1e-6, f"max relative deviation {worst:.2e}"


@check("small-acceleration limit of the correlator")
def _accel_small_a(quick: bool) -> tuple[bool, str]:
    worst = 0.0
    for z0 in (0.5, 2.0):
        for u in np.linspace(0.1, 5.0, 5 if quick else 25):
            accel = correlator_accel_mirror_xx(1e-4, z0, u, 0.05)
            static = correlator_static_thermal(z0, math.inf, u, 0.05).xx
            worst = max(worst, _rel(accel, static))
    return worst < 1e-6, f"max relative deviation {worst:.2e}"


# -- boundary functions and spectra ------------------------------------------


@check("boundary-function limits")
def _boundary_limits(quick: bool) -> tuple[bool, str]:
    near = f_static(1.0, 5e-5)
    far = f_static(1.0, 500.0)
    far_acc = f_accelerated(1.0, 1e3, 1.0).f_x
    ok = (
        abs(near.f_x - 1.0) < 1e-6
        and abs(near.f_z + 1.0) < 1e-6
        and max(abs(far.f_x), abs(far.f_z)) < 1e-2
        and abs(far_acc) < 1e-2
    )
    return ok, f"f(z0->0) = ({near.f_x:.8f}, {near.f_z:.8f}); |f(500)| <= {abs(far.f_z):.2e}"


@check("series and direct branches agree")
def _series_consistency(quick: bool) -> tuple[bool, str]:
    x = STATIC_SERIES_THRESHOLD
    worst = max(
        _rel(boundary_transverse(x, series=True), boundary_transverse(x, series=False)),
        _rel(boundary_normal(x, series=True), boundary_normal(x, series=False)),
        _rel(acceleration_correction(x, series=True), acceleration_correction(x, series=False)),
    )
    a = ACCEL_SERIES_THRESHOLD
    for z0 in (0.5, 1.0):
        series = boundary_transverse(2 * z0) + (a * z0) ** 2 * acceleration_correction(2 * z0)
        worst = max(worst, _rel(series, accelerated_transverse(1.0, z0, a)))
    return worst < 1e-10, f"max relative branch mismatch {worst:.2e}"


@check("continuity in acceleration")
def _continuity(quick: bool) -> tuple[bool, str]:
    worst = 0.0
    for omega0 in (0.5, 1.0, 3.0):
        for z0 in (0.1, 1.0, 5.0):
            diff = abs(f_accelerated(omega0, z0, 1e-4).f_x - f_static(omega0, z0).f_x)
            worst = max(worst, diff)
    return worst <= 1e-4, f"max |f_acc - f_static| at a = 1e-4: {worst:.2e}"


def acceptance_grid(count: int, seed: int = 7) -> list:
    """Random static-thermal and accelerated rows for the closed-form/oracle comparison."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        z0 = float(rng.uniform(0.2, 5.0))
        beta = math.inf if i % 5 == 0 else float(rng.uniform(0.5, 10.0))
        rows.append(StaticMirrorThermal(z0=z0, beta=beta))
    for _ in range(count):
        z0, a = float(rng.uniform(0.2, 5.0)), float(rng.uniform(0.1, 3.0))
        rows.append(AcceleratedMirror(z0=z0, a=a))
    return rows


def _atom_for(scenario) -> AtomSpec:
    if isinstance(scenario, (AcceleratedMirror, AcceleratedFreeSpace)):
        return AtomSpec.polarized(Axis.X, 1.0)
    return AtomSpec.isotropic(1.0)


@check("closed form agrees with oracle")
def _closed_vs_oracle(quick: bool) -> tuple[bool, str]:
    controls = OracleControls()
    worst = 0.0
    failures = 0
    grid = acceptance_grid(2 if quick else 30)
    for scenario in grid:
        atom = _atom_for(scenario)
        closed = spectral_rates(scenario, atom, Method.CLOSED_FORM)
        oracle = spectral_rates(scenario, atom, Method.ORACLE, controls)
        for c, o, err in (
            (closed.g_plus, oracle.g_plus, oracle.emission_error),
            (closed.g_minus, oracle.g_minus, oracle.excitation_error),
        ):
            allowed = max(controls.tolerance * abs(c), err, 1e-12 * atom.gamma0)
            worst = max(worst, abs(c - o) / allowed)
            failures += abs(c - o) > allowed
    return failures == 0, f"{failures} of {2 * len(grid)} values outside bound (worst {worst:.2f}x)"


def _closed_grid(quick: bool) -> list[tuple[object, AtomSpec, SpectralRates]]:
    scenarios = [
        StaticFreeSpace(),
        StaticFreeSpace(beta=2.0),
        AcceleratedFreeSpace(a=1.0),
        *acceptance_grid(3 if quick else 30, seed=11),
    ]
    return [
        (sc, _atom_for(sc), spectral_rates(sc, _atom_for(sc), Method.CLOSED_FORM))
        for sc in scenarios
    ]


@check("detailed balance")
def _detailed_balance(quick: bool) -> tuple[bool, str]:
    worst = 0.0
    for sc, atom, sr in _closed_grid(quick):
        beta = sc.effective_beta
        if math.isinf(beta):
            worst = max(worst, abs(sr.a_up))
            continue
        worst = max(worst, _rel(sr.a_up / sr.a_down, math.exp(-beta * atom.omega0)))
    oracle_ok = True
    gaps = []
    for sc in (StaticMirrorThermal(z0=0.7, beta=1.0), AcceleratedMirror(a=1.0, z0=1.0)):
        atom = _atom_for(sc)
        boltzmann = math.exp(-sc.effective_beta * atom.omega0)
        oracle = spectral_rates(sc, atom, Method.ORACLE)
        gap = abs(oracle.g_minus - boltzmann * oracle.g_plus)
        allowed = max(
            1e-6 * oracle.g_minus,
            oracle.excitation_error + boltzmann * oracle.emission_error,
        )
        oracle_ok &= gap <= allowed
        gaps.append(f"{sc.kind} {gap:.2e} (allowed {allowed:.2e})")
    return (
        worst < 1e-12 and oracle_ok,
        f"closed-form deviation {worst:.2e}; oracle gaps: {'; '.join(gaps)}",
    )


@check("positivity")
def _positivity(quick: bool) -> tuple[bool, str]:
    lowest = min(min(sr.g_plus, sr.g_minus) for _, _, sr in _closed_grid(quick))
    return lowest >= -1e-12, f"smallest spectral value {lowest:.3e}"


@check("decomposition identity")
def _decomposition(quick: bool) -> tuple[bool, str]:
    bad = 0
    for _, atom, sr in _closed_grid(quick):
        er = energy_rates(sr, atom.omega0)
        bad += er.vf_excited + er.rr_any_state != er.total_excited
        bad += er.vf_ground + er.rr_any_state != er.total_ground
    return bad == 0, f"{bad} rows where vf + rr != total"


@check("sign structure")
def _sign_structure(quick: bool) -> tuple[bool, str]:
    bad = 0
    for _, atom, sr in _closed_grid(quick):
        er = energy_rates(sr, atom.omega0)
        bad += er.total_excited > 0 or er.total_ground < 0
    return bad == 0, f"{bad} rows with an excited atom gaining or a ground atom losing energy"


@check("polarization ratios at the surface")
def _polarization(quick: bool) -> tuple[bool, str]:
    sc = StaticMirrorThermal(z0=1.0, beta=2.0)
    expected = {
        "isotropic": (AtomSpec.isotropic(1.0), 2.0 / 3.0),
        "z": (AtomSpec.polarized(Axis.Z, 1.0), 2.0),
        "xy": (AtomSpec(omega0=1.0, alpha=(0.5, 0.5, 0.0)), 0.0),
    }
    worst = 0.0
    for atom, ratio in expected.values():
        got = polarization_report(sc, atom, surface_limit=True).ratio
        worst = max(worst, abs(got - ratio))
    return worst < 1e-12, f"max deviation {worst:.2e}"


@check("accelerated and thermal atoms differ")
def _non_equivalence(quick: bool) -> tuple[bool, str]:
    report = equivalence_check(1.0, 1.0, 1.0)
    free = equivalence_check(1.0, math.inf, 0.5)
    ok = abs(report.difference) > 1e-3 and free.difference == 0.25
    return ok, f"difference at z0 = 1: {report.difference:.6f}; at z0 = inf: {free.difference!r}"


# -- relaxation ---------------------------------------------------------------


def _thermal_rates(beta_omega: float) -> SpectralRates:
    atom = AtomSpec.isotropic(1.0)
    return spectral_rates(StaticFreeSpace(beta=beta_omega), atom, Method.CLOSED_FORM)


@check("equilibrium energy")
def _equilibrium(quick: bool) -> tuple[bool, str]:
    worst = 0.0
    for beta in (0.5, 1.0, 2.0):
        curve = analytic_relaxation(_thermal_rates(beta), 1.0, InitialState.excited(), [0.0])
        worst = max(worst, _rel(curve.equilibrium_energy, -0.5 * math.tanh(0.5 * beta)))
    return worst < 1e-12, f"max relative deviation from -(w/2) tanh(beta w / 2): {worst:.2e}"


@check("rate equation integrates to the closed form")
def _ode(quick: bool) -> tuple[bool, str]:
    worst = 0.0
    for beta in (0.5, 2.0):
        sr = _thermal_rates(beta)
        t_end = 5.0 / sr.decay_rate
        for state in (InitialState.excited(), InitialState.ground()):
            numeric = integrate_relaxation(sr, 1.0, state, t_end, 1e-3 / sr.decay_rate)
            exact = analytic_relaxation(sr, 1.0, state, [t_end])
            worst = max(worst, _rel(numeric.energy[-1], exact.energy[-1]))
    return worst < 1e-8, f"max relative deviation at t_end: {worst:.2e}"


@check("Monte Carlo ensemble matches the closed form")
def _monte_carlo(quick: bool) -> tuple[bool, str]:
    n_atoms = 10**4 if quick else 10**5
    worst = 0.0
    in_bounds = True
    for beta in (0.5, 1.0, 2.0):
        sr = _thermal_rates(beta)
        times = np.linspace(0.0, 5.0 / sr.decay_rate, 20)
        exact = analytic_relaxation(sr, 1.0, InitialState.excited(), times)
        ensemble = monte_carlo_relaxation(sr, 1.0, n_atoms, InitialState.excited(), times, 1234)
        se = np.where(ensemble.standard_error > 0, ensemble.standard_error, 0.5 / n_atoms)
        worst = max(worst, float(np.max(np.abs(ensemble.energy - exact.energy) / se)))
        in_bounds &= bool(np.all(np.abs(ensemble.energy) <= 0.5))

        # long-time populations and energy against the Boltzmann values
        late = monte_carlo_relaxation(
            sr, 1.0, n_atoms, InitialState.excited(), [30.0 / sr.decay_rate], 4321
        )
        p_eq = equilibrium_excited_fraction(sr)
        sigma = math.sqrt(p_eq * (1.0 - p_eq) / n_atoms)
        (state,) = late.states
        worst = max(worst, abs(state.n2 / n_atoms - p_eq) / sigma)
        worst = max(worst, abs(late.energy[0] + 0.5 * math.tanh(0.5 * beta)) / sigma)
    return worst <= 3.0 and in_bounds, f"largest deviation {worst:.2f} standard errors"


@check("Monte Carlo error scales as N^-1/2")
def _mc_scaling(quick: bool) -> tuple[bool, str]:
    if quick:
        return True, "skipped in quick mode"
    sr = _thermal_rates(1.0)
    times = np.linspace(0.0, 5.0 / sr.decay_rate, 20)
    exact = analytic_relaxation(sr, 1.0, InitialState.excited(), times).energy
    sizes = np.array([10**3, 10**4, 10**5])
    errors = []
    for n in sizes:
        runs = [
            monte_carlo_relaxation(sr, 1.0, int(n), InitialState.excited(), times, seed).energy
            for seed in range(8)
        ]
        errors.append(float(np.sqrt(np.mean((np.array(runs) - exact) ** 2))))
    slope = float(np.polyfit(np.log(sizes), np.log(errors), 1)[0])
    return abs(slope + 0.5) <= 0.1, f"log-log slope {slope:.3f}"


# -- artifacts ----------------------------------------------------------------


@check("identical seeds give identical tables")
def _determinism(quick: bool) -> tuple[bool, str]:
    from atom_rates.sweep import RunConfig, run_sweep

    config = RunConfig.model_validate(
        {
            "config_version": 1,
            "sweep": [{"scenario": "static_mirror_thermal", "z0": [0.5, 1.0], "beta": 2.0}],
            "outputs": ["rates", "relaxation"],
            "relaxation": {"ensemble": 200, "points": 5},
            "seed": 99,
        }
    )
    with tempfile.TemporaryDirectory() as tmp:
        tables = []
        for name, workers in (("one", 1), ("two", 2)):
            settings = Config(out_dir=Path(tmp) / name, workers=workers, units=Units.OMEGA0)
            result = run_sweep(config, settings)
            tables.append({q: p.read_bytes() for q, p in result.tables.items()})
        store = ResultStore(Path(tmp) / "one")
        rows = store.read_table(Quantity.RATES)
    same = tables[0] == tables[1]
    return same and len(rows) == 2, "tables byte-identical" if same else "tables differ"

