"""Tests for atom_rates.spectral."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from atom_rates.domain import (
    AcceleratedFreeSpace,
    AcceleratedMirror,
    AtomSpec,
    Axis,
    StaticFreeSpace,
    StaticMirrorThermal,
)
from atom_rates.spectral import (
    ACCEL_SERIES_THRESHOLD,
    STATIC_SERIES_THRESHOLD,
    BoundaryVariant,
    Method,
    OracleControls,
    OracleConvergenceError,
    Sign,
    UnsupportedPolarizationError,
    acceleration_correction,
    accelerated_transverse,
    boundary_normal,
    boundary_transverse,
    default_epsilon0,
    default_window,
    f_accelerated,
    f_static,
    fourier_closed_form,
    fourier_oracle,
    oracle_transforms,
    use_acceleration_series,
)
from tests.helpers import rel_diff


class TestStaticBoundaryFunctions:
    def test_reference_values(self):
        bf = f_static(1.0, 1.0)
        assert bf.f_x == pytest.approx(0.355425, abs=1e-6)
        assert bf.f_y == bf.f_x
        assert bf.f_z == pytest.approx(-0.653097, abs=1e-6)
        assert bf.variant == BoundaryVariant.STATIC

    def test_surface_limit(self):
        bf = f_static(1.0, 5e-5)
        assert bf.f_x == pytest.approx(1.0, abs=1e-6)
        assert bf.f_z == pytest.approx(-1.0, abs=1e-6)

    def test_far_from_mirror(self):
        bf = f_static(1.0, 500.0)
        assert abs(bf.f_x) < 1e-2
        assert abs(bf.f_z) < 1e-2

    def test_infinite_distance(self):
        bf = f_static(1.0, math.inf)
        assert (bf.f_x, bf.f_y, bf.f_z) == (0.0, 0.0, 0.0)

    def test_depends_on_product(self):
        assert f_static(2.0, 0.5).f_x == f_static(1.0, 1.0).f_x

    def test_series_matches_direct_at_threshold(self):
        x = STATIC_SERIES_THRESHOLD
        for fn in (boundary_transverse, boundary_normal, acceleration_correction):
            assert rel_diff(fn(x, series=True), fn(x, series=False)) < 1e-10

    def test_axis_lookup(self):
        bf = f_static(1.0, 1.0)
        assert bf.of(Axis.Z) == bf.f_z


class TestAcceleratedBoundaryFunction:
    def test_reference_value(self):
        bf = f_accelerated(1.0, 1.0, 1.0)
        assert bf.f_x == pytest.approx(-0.0569, abs=1e-4)
        assert bf.f_x == pytest.approx(-0.056888, abs=2e-6)
        assert bf.f_y is None
        assert bf.variant == BoundaryVariant.ACCELERATED

    def test_zero_acceleration_is_static(self):
        assert f_accelerated(1.0, 1.0, 0.0).f_x == f_static(1.0, 1.0).f_x

    @pytest.mark.parametrize("omega0", [0.5, 1.0, 3.0])
    @pytest.mark.parametrize("z0", [0.1, 1.0, 5.0])
    def test_continuity_in_acceleration(self, omega0, z0):
        diff = f_accelerated(omega0, z0, 1e-4).f_x - f_static(omega0, z0).f_x
        assert abs(diff) <= 1e-4

    def test_series_branch_selection(self):
        assert use_acceleration_series(1.0, 0.5, 1e-4)
        assert not use_acceleration_series(1.0, 1.0, 1.0)

    def test_series_matches_direct_at_threshold(self):
        a = ACCEL_SERIES_THRESHOLD
        for z0 in (0.5, 1.0):
            x = 2.0 * z0
            series = boundary_transverse(x) + (a * z0) ** 2 * acceleration_correction(x)
            assert rel_diff(series, accelerated_transverse(1.0, z0, a)) < 1e-10

    def test_decays_far_from_mirror(self):
        values = [abs(f_accelerated(1.0, z0, 1.0).f_x) for z0 in (10.0, 100.0, 1000.0)]
        assert values[-1] < 1e-2
        assert f_accelerated(1.0, math.inf, 1.0).f_x == 0.0

    def test_negative_acceleration_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            f_accelerated(1.0, 1.0, -1.0)


class TestClosedForm:
    def test_free_space(self, isotropic_atom):
        emission = fourier_closed_form(StaticFreeSpace(), isotropic_atom, Sign.EMISSION)
        excitation = fourier_closed_form(StaticFreeSpace(), isotropic_atom, Sign.EXCITATION)
        assert sum(r.value for r in emission.values()) == pytest.approx(1.0)
        assert all(r.value == 0.0 for r in excitation.values())

    def test_zero_temperature_mirror_has_no_excitation(self, isotropic_atom):
        sc = StaticMirrorThermal(z0=1.0)
        excitation = fourier_closed_form(sc, isotropic_atom, Sign.EXCITATION)
        assert all(r.value == 0.0 for r in excitation.values())

    def test_ln2_temperature_halves_excitation(self, isotropic_atom):
        sc = StaticMirrorThermal(z0=0.8, beta=math.log(2.0))
        emission = fourier_closed_form(sc, isotropic_atom, Sign.EMISSION)
        excitation = fourier_closed_form(sc, isotropic_atom, Sign.EXCITATION)
        for axis in Axis:
            assert excitation[axis].value / emission[axis].value == pytest.approx(0.5)

    def test_per_axis_mirror_factors(self):
        atom = AtomSpec.polarized(Axis.Z, 1.0, gamma0=2.0)
        result = fourier_closed_form(StaticMirrorThermal(z0=1.0), atom, Sign.EMISSION)
        assert result[Axis.Z].value == pytest.approx(2.0 * (1.0 + 0.653097), abs=1e-5)
        assert result[Axis.X].value == 0.0
        assert result[Axis.Z].method == Method.CLOSED_FORM
        assert result[Axis.Z].lam == 1.0

    def test_accelerated_emission(self, x_atom):
        result = fourier_closed_form(AcceleratedMirror(a=1.0, z0=1.0), x_atom, Sign.EMISSION)
        planck = 1.0 + 1.0 / math.expm1(2 * math.pi)
        assert list(result) == [Axis.X]
        assert result[Axis.X].value == pytest.approx(2.0569 * planck, abs=1e-4)
        assert planck == pytest.approx(1.00187, abs=1e-5)

    def test_accelerated_free_space(self, x_atom):
        result = fourier_closed_form(AcceleratedFreeSpace(a=2.0), x_atom, Sign.EXCITATION)
        expected = (1.0 + 4.0) / math.expm1(math.pi)
        assert result[Axis.X].value == pytest.approx(expected)

    def test_accelerated_requires_x_polarization(self, isotropic_atom):
        with pytest.raises(UnsupportedPolarizationError, match="alpha"):
            fourier_closed_form(AcceleratedMirror(a=1.0, z0=1.0), isotropic_atom, Sign.EMISSION)


def _assert_within_reported_error(scenario, atom, controls=None):
    spectra = oracle_transforms(scenario, atom, (1.0, -1.0), controls)
    for lam, sign in ((1.0, Sign.EMISSION), (-1.0, Sign.EXCITATION)):
        for axis, closed in fourier_closed_form(scenario, atom, sign).items():
            oracle = spectra[lam][axis]
            assert oracle.value >= -1e-12 * atom.gamma0
            allowed = max(1e-6 * abs(closed.value), oracle.achieved_error)
            assert abs(oracle.value - closed.value) <= allowed
    return spectra


class TestOracle:
    def test_free_space_emission(self, x_atom):
        result = fourier_oracle(StaticFreeSpace(), x_atom, 1.0)[Axis.X]
        assert result.value == pytest.approx(1.0, rel=1e-6)
        assert result.method == Method.ORACLE
        assert result.diagnostics is not None
        assert result.achieved_error < 1e-6

    def test_free_space_excitation_vanishes(self, x_atom):
        result = fourier_oracle(StaticFreeSpace(), x_atom, -1.0)[Axis.X]
        assert 0.0 <= result.value <= result.achieved_error
        assert result.achieved_error < 1e-6

    def test_error_budget_is_itemized(self, x_atom):
        result = fourier_oracle(StaticMirrorThermal(z0=1.0), x_atom, 1.0)[Axis.X]
        diag = result.diagnostics
        assert diag.quadrature_error > 0.0
        assert diag.achieved_error == (
            diag.extrapolation_residual
            + diag.quadrature_error
            + diag.window_bound
            + diag.image_bound
        )
        assert len(diag.epsilons) == OracleControls().n_epsilons
        assert diag.evaluations > diag.intervals

    def test_thermal_mirror_matches_closed_form(self, isotropic_atom):
        sc = StaticMirrorThermal(z0=0.7, beta=2.0)
        spectra = _assert_within_reported_error(sc, isotropic_atom)
        assert spectra[1.0][Axis.Z].diagnostics.image_terms > 0

    def test_accelerated_matches_closed_form(self, x_atom):
        _assert_within_reported_error(AcceleratedMirror(a=1.0, z0=1.0), x_atom)

    def test_unreachable_tolerance_raises(self, x_atom):
        controls = OracleControls(tolerance=1e-15)
        with pytest.raises(OracleConvergenceError) as excinfo:
            fourier_oracle(StaticFreeSpace(), x_atom, 1.0, controls)
        assert len(excinfo.value.diagnostics.epsilons) == controls.n_epsilons

    def test_frequencies_must_share_magnitude(self, x_atom):
        with pytest.raises(ValueError, match="magnitude"):
            oracle_transforms(StaticFreeSpace(), x_atom, (1.0, -2.0))

    def test_window_rules(self):
        assert default_window(StaticFreeSpace(), 1.0) == 200.0
        assert default_window(StaticMirrorThermal(z0=1.0, beta=2.0), 1.0) == 44.0
        expected = (20.0 + 2.0 * math.asinh(1.0)) / 1.0
        assert default_window(AcceleratedMirror(a=1.0, z0=1.0), 1.0) == pytest.approx(expected)

    def test_ladder_start(self):
        assert default_epsilon0(StaticFreeSpace(), 1.0) == 0.25
        assert default_epsilon0(StaticMirrorThermal(z0=0.2), 2.0) == 0.125
        assert default_epsilon0(StaticMirrorThermal(z0=1.0, beta=0.3), 1.0) == 0.15
        assert default_epsilon0(AcceleratedMirror(a=20.0, z0=1.0), 1.0) == pytest.approx(
            math.pi / 20.0
        )

    def test_unknown_control_rejected(self):
        with pytest.raises(ValidationError):
            OracleControls(order=20)


@pytest.mark.parametrize(
    "scenario",
    [
        StaticFreeSpace(),
        StaticMirrorThermal(z0=5.0),
        AcceleratedMirror(a=0.3804, z0=2.132),
        AcceleratedMirror(a=0.1, z0=0.2),
    ],
    ids=["free-space", "far-mirror", "accelerated-far", "accelerated-slow-near"],
)
def test_oracle_error_covers_closed_form(scenario, x_atom):
    _assert_within_reported_error(scenario, x_atom)


def test_long_ladder_error_still_covers_closed_form(x_atom):
    controls = OracleControls(n_epsilons=8, tolerance=1e-3)
    _assert_within_reported_error(AcceleratedMirror(a=0.1, z0=0.2), x_atom, controls)


def _random_rows(count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(count):
        z0, beta = float(rng.uniform(0.2, 5.0)), float(rng.uniform(0.5, 10.0))
        rows.append(StaticMirrorThermal(z0=z0, beta=beta))
    for _ in range(count):
        z0, a = float(rng.uniform(0.2, 5.0)), float(rng.uniform(0.1, 3.0))
        rows.append(AcceleratedMirror(z0=z0, a=a))
    return rows


@pytest.mark.parametrize("scenario", _random_rows(3, seed=19), ids=lambda sc: repr(sc))
def test_random_rows_agree_within_reported_error(scenario):
    atom = AtomSpec.polarized(Axis.X, 1.0)
    if isinstance(scenario, StaticMirrorThermal):
        atom = AtomSpec.isotropic(1.0)
    _assert_within_reported_error(scenario, atom)


@pytest.mark.parametrize(
    ("a", "z0"),
    [
        (float(a), float(z0))
        for a, z0 in np.random.default_rng(31).uniform((1.0, 0.2), (3.0, 5.0), size=(3, 2))
    ],
)
def test_accelerated_oracle_detailed_balance(a, z0, x_atom):
    spectra = oracle_transforms(AcceleratedMirror(a=a, z0=z0), x_atom, (1.0, -1.0))
    emission, excitation = spectra[1.0][Axis.X], spectra[-1.0][Axis.X]
    boltzmann = math.exp(-2.0 * math.pi / a)
    gap = abs(excitation.value - boltzmann * emission.value)
    allowed = max(
        1e-6 * excitation.value,
        excitation.achieved_error + boltzmann * emission.achieved_error,
    )
    assert emission.value > 0.0
    assert gap <= allowed
