"""Fourier transforms of the field correlators, computed two independent ways.

The closed forms use the oscillating boundary functions f_i; the oracle integrates the
regulated correlator numerically on a pole-graded mesh, repeats the integral on a halving
ladder of regulators and extrapolates to epsilon -> 0.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from atom_rates.domain import (
    AXES,
    AtomSpec,
    Axis,
    NumericalError,
    Scenario,
    is_accelerated,
    mirror_distance,
    planck_occupation,
)
from atom_rates.quadrature import graded_breakpoints, integrate_vector, richardson
from atom_rates.wightman import (
    ImageSumPolicy,
    accel_mirror_xx,
    image_tail_bound,
    real_poles,
    resolve_image_terms,
    static_thermal_components,
)

logger = logging.getLogger(__name__)

STATIC_SERIES_THRESHOLD = 1e-2
ACCEL_SERIES_THRESHOLD = 1e-3
# Spectral values below ZERO_FLOOR * gamma0 * alpha_i in magnitude are numerical zeros.
ZERO_FLOOR = 1e-12


class UnsupportedPolarizationError(ValueError):
    """Accelerated scenarios are evaluated for x-polarized atoms only."""


class OracleConvergenceError(NumericalError):
    """The quadrature oracle could not reach the requested tolerance."""

    def __init__(self, message: str, *, diagnostics: QuadratureDiagnostics) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics


class Sign(str, Enum):
    EMISSION = "emission"
    EXCITATION = "excitation"

    @property
    def factor(self) -> float:
        return 1.0 if self == Sign.EMISSION else -1.0


class Method(str, Enum):
    CLOSED_FORM = "closed"
    ORACLE = "oracle"


class BoundaryVariant(str, Enum):
    STATIC = "static"
    ACCELERATED = "accelerated"


@dataclass(frozen=True)
class BoundaryFunctions:
    """Oscillating boundary corrections; the accelerated variant carries f_x only."""

    f_x: float
    f_y: float | None
    f_z: float | None
    variant: BoundaryVariant
    omega0: float
    z0: float
    a: float | None = None

    def of(self, axis: Axis | str) -> float | None:
        return (self.f_x, self.f_y, self.f_z)[Axis(axis).index]


@dataclass(frozen=True)
class QuadratureDiagnostics:
    """How an oracle value was obtained. Error fields are in rate units."""

    epsilons: tuple[float, ...]
    window: float
    intervals: int
    evaluations: int
    image_terms: int
    extrapolation_residual: float
    quadrature_error: float
    window_bound: float
    image_bound: float
    observed_order: float | None

    @property
    def achieved_error(self) -> float:
        return (
            self.extrapolation_residual
            + self.quadrature_error
            + self.window_bound
            + self.image_bound
        )


@dataclass(frozen=True)
class FourierResult:
    value: float
    method: Method
    lam: float
    axis: Axis
    diagnostics: QuadratureDiagnostics | None = None

    @property
    def achieved_error(self) -> float:
        return self.diagnostics.achieved_error if self.diagnostics else 0.0


# -- boundary functions ------------------------------------------------------


def _transverse_series(x: float) -> float:
    return 6.0 * sum(
        (-1) ** m * (m + 1) ** 2 * x ** (2 * m) / math.factorial(2 * m + 3) for m in range(5)
    )


def _normal_series(x: float) -> float:
    return -6.0 * sum(
        (-1) ** m * (m + 1) * x ** (2 * m) / math.factorial(2 * m + 3) for m in range(5)
    )


def boundary_transverse(x: float, *, series: bool | None = None) -> float:
    """f_x = f_y as a function of x = 2*omega0*z0."""
    if series is None:
        series = x < STATIC_SERIES_THRESHOLD
    if series:
        return _transverse_series(x)
    return 1.5 / x**3 * (x * math.cos(x) + (x * x - 1.0) * math.sin(x))


def boundary_normal(x: float, *, series: bool | None = None) -> float:
    """f_z as a function of x = 2*omega0*z0."""
    if series is None:
        series = x < STATIC_SERIES_THRESHOLD
    if series:
        return _normal_series(x)
    return 3.0 / x**3 * (x * math.cos(x) - math.sin(x))


def f_static(omega0: float, z0: float) -> BoundaryFunctions:
    """Boundary functions for an atom at rest; all vanish at z0 = inf."""
    if math.isinf(z0):
        return BoundaryFunctions(0.0, 0.0, 0.0, BoundaryVariant.STATIC, omega0, z0)
    x = 2.0 * omega0 * z0
    fx = boundary_transverse(x)
    return BoundaryFunctions(fx, fx, boundary_normal(x), BoundaryVariant.STATIC, omega0, z0)


def _acceleration_coefficient(m: int) -> float:
    def inv_factorial(n: int) -> float:
        return 1.0 / math.factorial(n) if n >= 0 else 0.0

    return (-1) ** m * (
        inv_factorial(2 * m + 1) / 2.0
        + 4.0 * inv_factorial(2 * m - 1) / 3.0
        + 13.0 * inv_factorial(2 * m) / 6.0
        + inv_factorial(2 * m - 2) / 6.0
    )


def acceleration_correction(x: float, *, series: bool | None = None) -> float:
    """Coefficient C(x) of (a*z0)^2 in the small-acceleration expansion of f_x."""
    if series is None:
        series = x < STATIC_SERIES_THRESHOLD
    if series:
        return 1.5 * sum(_acceleration_coefficient(m) * x ** (2 * m - 2) for m in range(6))
    return 1.5 / x**3 * (
        (0.5 - 4.0 * x * x / 3.0) * math.sin(x) + (13.0 * x / 6.0 - x**3 / 6.0) * math.cos(x)
    )


def accelerated_transverse(omega0: float, z0: float, a: float) -> float:
    """Direct evaluation of the accelerated f_x."""
    x = 2.0 * omega0 * z0
    b2 = (a * z0) ** 2
    phase = 2.0 * omega0 * math.asinh(a * z0) / a
    sine = (x * x * (1.0 + b2) - 2.0 * b2 * (1.0 + 2.0 * b2) - 1.0) / (1.0 + b2) ** 2.5
    cosine = x * (1.0 + 4.0 * b2) / (1.0 + b2) ** 2
    return 1.5 / x**3 * (sine * math.sin(phase) + cosine * math.cos(phase))


def use_acceleration_series(omega0: float, z0: float, a: float) -> bool:
    return a * z0 < ACCEL_SERIES_THRESHOLD and a < ACCEL_SERIES_THRESHOLD * omega0


def f_accelerated(omega0: float, z0: float, a: float) -> BoundaryFunctions:
    """x-polarized boundary function for the accelerated atom; a = 0 gives the static f_x."""
    if a < 0:
        raise ValueError(f"acceleration must be non-negative, got {a}")
    if math.isinf(z0):
        fx = 0.0
    elif a == 0.0:
        fx = f_static(omega0, z0).f_x
    elif use_acceleration_series(omega0, z0, a):
        x = 2.0 * omega0 * z0
        fx = boundary_transverse(x) + (a * z0) ** 2 * acceleration_correction(x)
    else:
        fx = accelerated_transverse(omega0, z0, a)
    return BoundaryFunctions(fx, None, None, BoundaryVariant.ACCELERATED, omega0, z0, a)


# -- closed forms ------------------------------------------------------------


def require_x_polarization(scenario: Scenario, atom: AtomSpec) -> None:
    if is_accelerated(scenario) and (atom.alpha[1] != 0.0 or atom.alpha[2] != 0.0):
        raise UnsupportedPolarizationError(
            f"accelerated scenarios need alpha = (1, 0, 0), got {atom.alpha}"
        )


def scenario_axes(scenario: Scenario) -> tuple[Axis, ...]:
    return (Axis.X,) if is_accelerated(scenario) else AXES


def _nonthermal_factors(scenario: Scenario, omega0: float) -> dict[Axis, float]:
    if scenario.kind == "static_free_space":
        return {axis: 1.0 for axis in AXES}
    if scenario.kind == "static_mirror_thermal":
        bf = f_static(omega0, scenario.z0)
        return {Axis.X: 1.0 - bf.f_x, Axis.Y: 1.0 - bf.f_y, Axis.Z: 1.0 - bf.f_z}
    z0 = mirror_distance(scenario)
    fx = f_accelerated(omega0, z0, scenario.a).f_x
    return {Axis.X: 1.0 + (scenario.a / omega0) ** 2 - fx}


def fourier_closed_form(
    scenario: Scenario, atom: AtomSpec, sign: Sign
) -> dict[Axis, FourierResult]:
    """Per-axis emission (1 + n) or excitation (n) rate from the closed forms."""
    require_x_polarization(scenario, atom)
    n = planck_occupation(scenario.effective_beta, atom.omega0)
    thermal = 1.0 + n if sign == Sign.EMISSION else n
    lam = sign.factor * atom.omega0
    return {
        axis: FourierResult(
            value=atom.gamma0 * atom.alpha_of(axis) * factor * thermal,
            method=Method.CLOSED_FORM,
            lam=lam,
            axis=axis,
        )
        for axis, factor in _nonthermal_factors(scenario, atom.omega0).items()
    }


# -- quadrature oracle -------------------------------------------------------


class OracleControls(BaseModel):
    """Knobs of the regulated quadrature; ``None`` picks the scenario-dependent default."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilon0: float | None = Field(default=None, gt=0)
    n_epsilons: int = Field(default=6, ge=3, le=8)
    window: float | None = Field(default=None, gt=0)
    max_intervals: int = Field(default=2000, ge=100)
    tolerance: float = Field(default=1e-6, gt=0)
    max_image_terms: int = Field(default=10**6, ge=1)
    workers: int = Field(default=1, ge=1)


def transform_scale(lam: float) -> float:
    """|lam|^3 / (3 pi): the vacuum transform of the free correlator at |lam|."""
    return abs(lam) ** 3 / (3.0 * math.pi)


def default_window(scenario: Scenario, omega: float) -> float:
    z0 = mirror_distance(scenario)
    z = 0.0 if math.isinf(z0) else z0
    if is_accelerated(scenario):
        return (20.0 + 2.0 * math.asinh(scenario.a * z)) / scenario.a
    beta = scenario.effective_beta
    if not math.isinf(beta):
        return 20.0 * beta + 4.0 * z
    return max(200.0 / omega, 8.0 * z)


def default_epsilon0(scenario: Scenario, omega: float) -> float:
    """Largest regulator of the ladder.

    The correlator is analytic in the strip -beta < Im u < 0 (beta = 2 pi / a when
    accelerated), so the ladder stays at half its width.
    """
    candidates = [1.0 / (4.0 * omega)]
    beta = scenario.effective_beta
    if not math.isinf(beta):
        candidates.append(beta / 2.0)
    return min(candidates)


def _max_panel_width(scenario: Scenario, omega: float) -> float:
    widths = [4.0 / omega]
    beta = scenario.effective_beta
    if is_accelerated(scenario):
        widths.append(math.pi / scenario.a)
    elif not math.isinf(beta):
        widths.append(beta / 2.0)
    return min(widths)


Integrand = Callable[[np.ndarray], dict[Axis, np.ndarray]]


def _integrand(scenario: Scenario, epsilon: float, terms: int) -> Integrand:
    z0 = mirror_distance(scenario)
    if is_accelerated(scenario):
        a = scenario.a
        return lambda u: {Axis.X: accel_mirror_xx(u, a, z0, epsilon)}
    beta = scenario.effective_beta

    def components(u: np.ndarray) -> dict[Axis, np.ndarray]:
        transverse, normal = static_thermal_components(u, z0, beta, epsilon, terms)
        return {Axis.X: transverse, Axis.Y: transverse, Axis.Z: normal}

    return components


@dataclass(frozen=True)
class _LadderStep:
    integrals: dict[float, dict[Axis, float]]
    error: float
    edge_magnitude: dict[Axis, float]
    intervals: int
    evaluations: int
    converged: bool


def _integrate_once(
    scenario: Scenario,
    lams: Sequence[float],
    epsilon: float,
    window: float,
    controls: OracleControls,
    terms: int,
) -> _LadderStep:
    omega = abs(lams[0])
    edges = graded_breakpoints(
        -window, window, real_poles(scenario), epsilon, _max_panel_width(scenario, omega)
    )
    integrand = _integrand(scenario, epsilon, terms)
    keys = [(lam, axis) for lam in lams for axis in scenario_axes(scenario)]

    def f(u: float) -> np.ndarray:
        values = integrand(np.asarray(u))
        return np.array([(np.exp(1j * lam * u) * values[axis]).real for lam, axis in keys])

    integral = integrate_vector(
        f,
        edges,
        epsabs=0.5 * controls.tolerance * transform_scale(omega),
        limit=controls.max_intervals,
    )
    integrals: dict[float, dict[Axis, float]] = {lam: {} for lam in lams}
    for (lam, axis), value in zip(keys, integral.value):
        integrals[lam][axis] = float(value)
    edge_values = integrand(np.array([-window, window]))
    edge_magnitude = {axis: float(np.max(np.abs(vals))) for axis, vals in edge_values.items()}
    return _LadderStep(
        integrals,
        integral.error,
        edge_magnitude,
        integral.intervals,
        integral.evaluations,
        integral.converged,
    )


def oracle_transforms(
    scenario: Scenario,
    atom: AtomSpec,
    lams: Sequence[float],
    controls: OracleControls | None = None,
) -> dict[float, dict[Axis, FourierResult]]:
    """Oracle values at several frequencies of equal magnitude sharing one integrand pass.

    Every ladder level is integrated adaptively; its error estimate, floating-point rounding
    included, is carried through the extrapolation weights into ``achieved_error``.
    """
    controls = controls or OracleControls()
    require_x_polarization(scenario, atom)
    omega = abs(lams[0])
    if omega == 0.0 or any(abs(lam) != omega for lam in lams):
        raise ValueError("oracle frequencies must share a nonzero magnitude")

    window = controls.window or default_window(scenario, omega)
    eps0 = controls.epsilon0 or default_epsilon0(scenario, omega)
    epsilons = tuple(eps0 * 2.0**-k for k in range(controls.n_epsilons))
    scale = transform_scale(omega)
    z0 = mirror_distance(scenario)

    terms = 0
    beta = scenario.effective_beta
    if not is_accelerated(scenario) and not math.isinf(beta):
        policy = ImageSumPolicy.truncate_at_tolerance(
            0.025 * controls.tolerance * scale * omega, controls.max_image_terms
        )
        terms = resolve_image_terms(policy, beta, z0, eps0, window, 1.0)
    image_bound = 4.0 * image_tail_bound(terms, beta if terms else math.inf, z0, eps0, window)
    image_bound /= omega

    def run(epsilon: float) -> _LadderStep:
        return _integrate_once(scenario, lams, epsilon, window, controls, terms)

    if controls.workers > 1:
        with ThreadPoolExecutor(max_workers=controls.workers) as pool:
            ladder = list(pool.map(run, epsilons))
    else:
        ladder = [run(eps) for eps in epsilons]
    logger.debug(
        "oracle %s |lam|=%g: window=%g eps=%s images=%d intervals=%s evaluations=%d",
        scenario.kind,
        omega,
        window,
        epsilons,
        terms,
        [step.intervals for step in ladder],
        sum(step.evaluations for step in ladder),
    )
    if not all(step.converged for step in ladder):
        logger.debug("oracle %s: adaptive quadrature stopped before its target", scenario.kind)

    results: dict[float, dict[Axis, FourierResult]] = {}
    for lam in lams:
        per_axis: dict[Axis, FourierResult] = {}
        for axis in scenario_axes(scenario):
            extrapolated = richardson([step.integrals[lam][axis] for step in ladder])
            quadrature_error = extrapolated.propagated([step.error for step in ladder])
            window_bound = 4.0 * max(step.edge_magnitude[axis] for step in ladder) / omega
            weight = atom.dipole_weight(axis)
            diagnostics = QuadratureDiagnostics(
                epsilons=epsilons,
                window=window,
                intervals=ladder[-1].intervals,
                evaluations=sum(step.evaluations for step in ladder),
                image_terms=terms,
                extrapolation_residual=weight * extrapolated.residual,
                quadrature_error=weight * quadrature_error,
                window_bound=weight * window_bound,
                image_bound=weight * image_bound,
                observed_order=extrapolated.observed_order,
            )
            total = extrapolated.residual + quadrature_error + window_bound + image_bound
            relative = total / scale
            if relative > controls.tolerance:
                raise OracleConvergenceError(
                    f"oracle error {relative:.3g} (relative) exceeds tolerance "
                    f"{controls.tolerance:.3g} for {scenario.kind} at lambda={lam:g}, "
                    f"axis {axis.value}",
                    diagnostics=diagnostics,
                )
            value = weight * extrapolated.estimate.real
            # a negative rate within the error bar is a zero
            if -diagnostics.achieved_error <= value < 0.0:
                value = 0.0
            per_axis[axis] = FourierResult(value, Method.ORACLE, lam, axis, diagnostics)
        results[lam] = per_axis
    return results


def fourier_oracle(
    scenario: Scenario,
    atom: AtomSpec,
    lam: float,
    controls: OracleControls | None = None,
) -> dict[Axis, FourierResult]:
    """Per-axis rate weight_i * int e^{i lam u} G_ii(u - i eps) du, extrapolated to eps -> 0."""
    return oracle_transforms(scenario, atom, (lam,), controls)[lam]
