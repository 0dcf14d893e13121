"""Tests for atom_rates.rates."""

import math

import pytest

from atom_rates.domain import (
    AcceleratedMirror,
    AtomSpec,
    Axis,
    StaticFreeSpace,
    StaticMirrorThermal,
)
from atom_rates.rates import (
    SpectralRates,
    detailed_balance_ratio,
    energy_rates,
    equivalence_check,
    polarization_report,
    spectral_rates,
)
from atom_rates.spectral import Method


def test_free_space_vacuum(isotropic_atom):
    sr = spectral_rates(StaticFreeSpace(), isotropic_atom)
    assert sr.g_plus == pytest.approx(1.0)
    assert sr.g_minus == 0.0
    assert sr.a_down == sr.g_plus
    assert sr.a_up == sr.g_minus
    assert sr.method == Method.CLOSED_FORM
    assert sr.achieved_error == 0.0


def test_accelerated_mirror(x_atom):
    sr = spectral_rates(AcceleratedMirror(a=1.0, z0=1.0), x_atom)
    planck = 1.0 / math.expm1(2 * math.pi)
    assert sr.g_plus == pytest.approx(2.056888 * (1.0 + planck), abs=1e-5)
    assert sr.g_minus == pytest.approx(2.056888 * planck, abs=1e-6)
    assert sr.decay_rate == pytest.approx(sr.g_plus + sr.g_minus)


def test_oracle_free_space(x_atom):
    sr = spectral_rates(StaticFreeSpace(), x_atom, Method.ORACLE)
    assert sr.method == Method.ORACLE
    assert sr.g_plus == pytest.approx(1.0, rel=1e-6)
    assert sr.achieved_error == max(sr.emission_error, sr.excitation_error)
    assert list(sr.emission) == [Axis.X, Axis.Y, Axis.Z]


def test_closed_form_errors_are_zero(isotropic_atom):
    sr = spectral_rates(StaticMirrorThermal(z0=1.0, beta=1.0), isotropic_atom)
    assert sr.emission_error == 0.0
    assert sr.excitation_error == 0.0


def test_decomposition_is_exact(isotropic_atom):
    sr = spectral_rates(StaticMirrorThermal(z0=0.6, beta=1.3), isotropic_atom)
    er = energy_rates(sr, 1.0)
    assert er.total_excited == er.vf_excited + er.rr_any_state
    assert er.total_ground == er.vf_ground + er.rr_any_state
    assert er.vf_ground == -er.vf_excited


def test_energy_rate_signs(isotropic_atom):
    sr = spectral_rates(StaticMirrorThermal(z0=0.6, beta=1.3), isotropic_atom)
    er = energy_rates(sr, 1.0)
    assert er.total_excited < 0
    assert er.total_ground > 0
    assert er.rr_any_state < 0


def test_totals_match_spectra():
    sr = SpectralRates.from_spectra(1.5, 0.5)
    er = energy_rates(sr, 2.0)
    assert er.vf_excited == pytest.approx(-2.0)
    assert er.rr_any_state == pytest.approx(-1.0)
    assert er.total_excited == pytest.approx(-2.0 * 1.5)
    assert er.total_ground == pytest.approx(2.0 * 0.5)


def test_ground_state_stable_in_vacuum(isotropic_atom):
    er = energy_rates(spectral_rates(StaticFreeSpace(), isotropic_atom), 1.0)
    assert er.total_ground == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize(
    ("atom", "expected"),
    [
        (AtomSpec.isotropic(1.0), 2.0 / 3.0),
        (AtomSpec.polarized(Axis.Z, 1.0), 2.0),
        (AtomSpec.polarized(Axis.X, 1.0), 0.0),
    ],
)
def test_polarization_surface_limit(atom, expected):
    report = polarization_report(StaticMirrorThermal(z0=1.0), atom, surface_limit=True)
    assert report.ratio == pytest.approx(expected, abs=1e-15)
    assert report.surface_limit


def test_near_surface_approaches_limit():
    atom = AtomSpec.polarized(Axis.Z, 1.0)
    report = polarization_report(StaticMirrorThermal(z0=1e-5), atom)
    assert report.ratio == pytest.approx(2.0, abs=1e-6)


def test_polarization_at_finite_distance(isotropic_atom):
    report = polarization_report(StaticMirrorThermal(z0=1.0), isotropic_atom)
    expected = (2 * (1 - 0.355425) + (1 + 0.653097)) / 3
    assert report.ratio == pytest.approx(expected, abs=1e-6)


def test_equivalence_reference_difference():
    report = equivalence_check(1.0, 1.0, 1.0)
    assert report.difference == pytest.approx(1.412314, abs=2e-6)
    assert report.thermal_beta == pytest.approx(2 * math.pi)
    assert not report.equivalent()


def test_free_space_difference_is_kinematic():
    report = equivalence_check(1.0, math.inf, 0.5)
    assert report.difference == 0.25
    assert report.accelerated_factor - report.thermal_factor == 0.25


def test_emissions_share_thermal_factor():
    report = equivalence_check(1.0, 1.0, 1.0)
    ratio = report.accelerated_emission / report.thermal_emission
    assert ratio == pytest.approx(report.accelerated_factor / report.thermal_factor)


def test_equivalence_invalid_distance():
    with pytest.raises(ValueError, match="z0"):
        equivalence_check(1.0, 0.0, 1.0)


def test_detailed_balance_ln2_ratio(isotropic_atom):
    sr = spectral_rates(StaticMirrorThermal(z0=0.8, beta=math.log(2.0)), isotropic_atom)
    assert detailed_balance_ratio(sr) == pytest.approx(0.5)


def test_boltzmann_factor(x_atom):
    sr = spectral_rates(AcceleratedMirror(a=1.0, z0=1.0), x_atom)
    assert detailed_balance_ratio(sr) == pytest.approx(math.exp(-2 * math.pi))


def test_no_decay_is_nan():
    assert math.isnan(detailed_balance_ratio(SpectralRates.from_spectra(0.0, 0.0)))
