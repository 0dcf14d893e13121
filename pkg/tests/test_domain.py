"""Tests for atom_rates.domain."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from atom_rates.domain import (
    AcceleratedFreeSpace,
    AcceleratedMirror,
    AtomSpec,
    Axis,
    DomainError,
    InitialState,
    StaticFreeSpace,
    StaticMirrorThermal,
    effective_beta,
    is_accelerated,
    mirror_distance,
    parse_scenario,
    planck_occupation,
    scenario_parameters,
    trajectory_point,
    unruh_beta,
)


class TestAtomSpec:
    def test_isotropic_default(self):
        atom = AtomSpec(omega0=2.0)
        assert atom.alpha == pytest.approx((1 / 3, 1 / 3, 1 / 3))
        assert atom.gamma0 == 1.0

    def test_polarized(self):
        atom = AtomSpec.polarized("z", 1.0, gamma0=0.5)
        assert atom.alpha == (0.0, 0.0, 1.0)
        assert atom.alpha_of(Axis.Z) == 1.0
        assert atom.gamma0 == 0.5

    def test_alpha_must_sum_to_one(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            AtomSpec(omega0=1.0, alpha=(0.5, 0.5, 0.5))

    def test_alpha_component_range(self):
        with pytest.raises(ValidationError, match="must lie in"):
            AtomSpec(omega0=1.0, alpha=(1.5, -0.5, 0.0))

    def test_omega0_positive(self):
        with pytest.raises(ValidationError):
            AtomSpec(omega0=0.0)

    def test_dipole_weight(self):
        atom = AtomSpec.polarized(Axis.X, 2.0, gamma0=3.0)
        assert atom.dipole_weight(Axis.X) == pytest.approx(3.0 * 3 * math.pi / 8.0)
        assert atom.dipole_weight(Axis.Y) == 0.0


class TestScenarios:
    def test_parse_discriminated_union(self):
        sc = parse_scenario({"kind": "static_mirror_thermal", "z0": 1.0, "beta": 2.0})
        assert isinstance(sc, StaticMirrorThermal)
        assert sc.effective_beta == 2.0

    def test_accelerated_rejects_zero_acceleration(self):
        with pytest.raises(ValidationError):
            AcceleratedMirror(a=0.0, z0=1.0)

    def test_static_rejects_nonpositive_distance(self):
        with pytest.raises(ValidationError):
            StaticMirrorThermal(z0=-1.0)

    def test_effective_beta(self):
        assert effective_beta(StaticFreeSpace()) == math.inf
        assert effective_beta(AcceleratedMirror(a=2 * math.pi, z0=1.0)) == pytest.approx(1.0)

    def test_mirror_distance_and_parameters(self):
        assert mirror_distance(AcceleratedFreeSpace(a=1.0)) == math.inf
        assert scenario_parameters(AcceleratedMirror(a=0.5, z0=2.0)) == {
            "z0": 2.0,
            "beta": math.inf,
            "a": 0.5,
        }

    def test_is_accelerated(self):
        assert is_accelerated(AcceleratedFreeSpace(a=1.0))
        assert not is_accelerated(StaticMirrorThermal(z0=1.0))


class TestUnruhBeta:
    def test_two_pi(self):
        assert unruh_beta(2 * math.pi) == pytest.approx(1.0)

    def test_unit_acceleration(self):
        assert unruh_beta(1.0) == pytest.approx(6.28319, rel=1e-6)

    @pytest.mark.parametrize("a", [0.0, -1.0])
    def test_nonpositive_rejected(self, a):
        with pytest.raises(DomainError, match="positive"):
            unruh_beta(a)


class TestPlanckOccupation:
    def test_zero_temperature(self):
        assert planck_occupation(math.inf, 1.0) == 0.0

    def test_ln2_gives_one(self):
        assert planck_occupation(math.log(2.0), 1.0) == pytest.approx(1.0)

    def test_no_overflow(self):
        assert planck_occupation(50.0, 1.0) == pytest.approx(math.exp(-50.0), rel=1e-12)
        assert planck_occupation(1000.0, 1.0) == 0.0


class TestTrajectory:
    def test_static(self):
        point = trajectory_point(StaticMirrorThermal(z0=1.0, beta=1.0), 5.0)
        np.testing.assert_allclose(point, [5.0, 0.0, 0.0, 1.0])

    def test_accelerated_origin(self):
        point = trajectory_point(AcceleratedMirror(a=1.0, z0=1.0), 0.0)
        np.testing.assert_allclose(point, [0.0, 1.0, 0.0, 1.0])

    def test_accelerated_values(self):
        point = trajectory_point(AcceleratedMirror(a=2.0, z0=0.5), 1.0)
        np.testing.assert_allclose(
            point, [math.sinh(2.0) / 2, math.cosh(2.0) / 2, 0.0, 0.5], rtol=1e-14
        )
        assert point[0] == pytest.approx(1.81343, abs=1e-5)

    def test_free_space_sits_at_origin_plane(self):
        point = trajectory_point(StaticFreeSpace(), 2.0)
        np.testing.assert_allclose(point, [2.0, 0.0, 0.0, 0.0])

    def test_complex_proper_time(self):
        point = trajectory_point(AcceleratedMirror(a=1.0, z0=1.0), complex(0.5, -0.1))
        assert point.dtype == complex
        assert point[0] == pytest.approx(np.sinh(complex(0.5, -0.1)))

    def test_proper_time_normalization(self):
        sc = AcceleratedMirror(a=1.7, z0=0.4)
        h = 1e-5
        for tau in (-1.0, 0.0, 0.8):
            d = (trajectory_point(sc, tau + h) - trajectory_point(sc, tau - h)) / (2 * h)
            assert d[0] ** 2 - d[1] ** 2 == pytest.approx(1.0, rel=1e-8)


class TestInitialState:
    def test_energies(self):
        assert InitialState.excited().energy(2.0) == 1.0
        assert InitialState.ground().energy(2.0) == -1.0
        assert InitialState.mixed(0.25).energy(2.0) == pytest.approx(-0.5)

    def test_mixed_requires_fraction(self):
        with pytest.raises(ValidationError, match="excited_fraction"):
            InitialState(kind="mixed")

    def test_fraction_range(self):
        with pytest.raises(ValidationError):
            InitialState.mixed(1.5)
