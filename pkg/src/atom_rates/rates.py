"""Einstein coefficients and the vacuum-fluctuation / radiation-reaction energy rates."""

from __future__ import annotations

import math
from dataclasses import dataclass

from atom_rates.domain import (
    AtomSpec,
    Axis,
    Scenario,
    StaticMirrorThermal,
    planck_occupation,
    unruh_beta,
)
from atom_rates.spectral import (
    FourierResult,
    Method,
    OracleControls,
    Sign,
    f_accelerated,
    f_static,
    fourier_closed_form,
    oracle_transforms,
)

# f_x = f_y = -f_z = 1 at the mirror surface
_SURFACE_BOUNDARY = (1.0, 1.0, -1.0)


@dataclass(frozen=True)
class SpectralRates:
    """Emission/excitation spectra at +/- omega0 and the Einstein coefficients they define."""

    g_plus: float
    g_minus: float
    a_down: float
    a_up: float
    method: Method = Method.CLOSED_FORM
    achieved_error: float = 0.0
    emission: dict[Axis, FourierResult] | None = None
    excitation: dict[Axis, FourierResult] | None = None

    @classmethod
    def from_spectra(
        cls,
        g_plus: float,
        g_minus: float,
        method: Method = Method.CLOSED_FORM,
        achieved_error: float = 0.0,
        emission: dict[Axis, FourierResult] | None = None,
        excitation: dict[Axis, FourierResult] | None = None,
    ) -> SpectralRates:
        return cls(g_plus, g_minus, g_plus, g_minus, method, achieved_error, emission, excitation)

    @property
    def decay_rate(self) -> float:
        return self.a_up + self.a_down

    @property
    def emission_error(self) -> float:
        return _sum_error(self.emission) if self.emission else 0.0

    @property
    def excitation_error(self) -> float:
        return _sum_error(self.excitation) if self.excitation else 0.0


@dataclass(frozen=True)
class EnergyRates:
    vf_excited: float
    vf_ground: float
    rr_any_state: float
    total_excited: float
    total_ground: float


def _sum_axes(results: dict[Axis, FourierResult]) -> float:
    return sum(result.value for result in results.values())


def spectral_rates(
    scenario: Scenario,
    atom: AtomSpec,
    method: Method = Method.CLOSED_FORM,
    controls: OracleControls | None = None,
) -> SpectralRates:
    """g+ and g- summed over polarization axes; the oracle evaluates both in one pass."""
    if method == Method.CLOSED_FORM:
        emission = fourier_closed_form(scenario, atom, Sign.EMISSION)
        excitation = fourier_closed_form(scenario, atom, Sign.EXCITATION)
        error = 0.0
    else:
        lam = atom.omega0
        spectra = oracle_transforms(scenario, atom, (lam, -lam), controls)
        emission, excitation = spectra[lam], spectra[-lam]
        error = max(_sum_error(emission), _sum_error(excitation))
    return SpectralRates.from_spectra(
        _sum_axes(emission), _sum_axes(excitation), method, error, emission, excitation
    )


def _sum_error(results: dict[Axis, FourierResult]) -> float:
    return sum(result.achieved_error for result in results.values())


def energy_rates(sr: SpectralRates, omega0: float) -> EnergyRates:
    """Vacuum-fluctuation and radiation-reaction contributions to d<H_A>/dtau.

    Totals are formed as vf + rr so the decomposition holds exactly in floating point.
    """
    half = 0.5 * omega0
    symmetric = half * (sr.g_plus + sr.g_minus)
    antisymmetric = half * (sr.g_plus - sr.g_minus)
    vf_excited = -symmetric
    vf_ground = symmetric
    rr = -antisymmetric
    return EnergyRates(
        vf_excited=vf_excited,
        vf_ground=vf_ground,
        rr_any_state=rr,
        total_excited=vf_excited + rr,
        total_ground=vf_ground + rr,
    )


@dataclass(frozen=True)
class PolarizationReport:
    """Total rate with the mirror relative to the same bath without it."""

    ratio: float
    boundary: tuple[float, float, float]
    alpha: tuple[float, float, float]
    surface_limit: bool


def polarization_report(
    scenario: StaticMirrorThermal, atom: AtomSpec, surface_limit: bool = False
) -> PolarizationReport:
    """sum_i alpha_i (1 - f_i); the thermal factor cancels in the ratio.

    With ``surface_limit`` the exact z0 -> 0 values f_x = f_y = -f_z = 1 are used.
    """
    if surface_limit:
        boundary = _SURFACE_BOUNDARY
    else:
        bf = f_static(atom.omega0, scenario.z0)
        boundary = (bf.f_x, bf.f_y, bf.f_z)
    ratio = sum(alpha * (1.0 - f) for alpha, f in zip(atom.alpha, boundary))
    return PolarizationReport(ratio, boundary, atom.alpha, surface_limit)


@dataclass(frozen=True)
class EquivalenceReport:
    """x-polarized emission of an accelerated atom against an atom at rest in the Unruh bath."""

    omega0: float
    z0: float
    a: float
    thermal_beta: float
    accelerated_factor: float
    thermal_factor: float
    difference: float
    accelerated_emission: float
    thermal_emission: float

    def equivalent(self, tolerance: float = 1e-12) -> bool:
        return abs(self.difference) <= tolerance


def equivalence_check(omega0: float, z0: float, a: float) -> EquivalenceReport:
    """Compare (1 + a^2/omega0^2 - f_x(a)) with (1 - f_x) at beta = 2 pi / a.

    ``z0 = inf`` compares the boundary-free cases, where the difference is exactly (a/omega0)^2.
    """
    beta = unruh_beta(a)
    if not z0 > 0:
        raise ValueError(f"z0 must be positive, got {z0}")
    f_acc = f_accelerated(omega0, z0, a).f_x
    f_rest = f_static(omega0, z0).f_x
    kinematic = (a / omega0) ** 2
    accelerated_factor = 1.0 + kinematic - f_acc
    thermal_factor = 1.0 - f_rest
    planck = 1.0 + planck_occupation(beta, omega0)
    return EquivalenceReport(
        omega0=omega0,
        z0=z0,
        a=a,
        thermal_beta=beta,
        accelerated_factor=accelerated_factor,
        thermal_factor=thermal_factor,
        difference=kinematic - f_acc + f_rest,
        accelerated_emission=accelerated_factor * planck,
        thermal_emission=thermal_factor * planck,
    )


def detailed_balance_ratio(sr: SpectralRates) -> float:
    """a_up / a_down, or nan when nothing decays."""
    return sr.a_up / sr.a_down if sr.a_down else math.nan
