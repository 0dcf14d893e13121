"""Tests for atom_rates.quadrature."""

import math

import numpy as np
import pytest

from atom_rates.quadrature import (
    GRADING,
    graded_breakpoints,
    integrate_vector,
    observed_order,
    richardson,
)


class TestGradedBreakpoints:
    def test_covers_interval(self):
        edges = graded_breakpoints(-3.0, 3.0, [0.0], 0.1, 1.0)
        assert edges[0] == -3.0
        assert edges[-1] == 3.0
        assert np.all(np.diff(edges) > 0)

    def test_poles_are_edges(self):
        edges = graded_breakpoints(-3.0, 3.0, [-1.0, 0.0, 1.0], 0.05, 1.0)
        for pole in (-1.0, 0.0, 1.0):
            assert np.any(edges == pole)

    def test_panels_near_pole_are_a_quarter_regulator(self):
        eps = 0.01
        edges = graded_breakpoints(0.0, 2.0, [0.0], eps, 1.0)
        widths = np.diff(edges)
        near = edges[:-1] < eps
        assert GRADING == 0.25
        assert np.all(widths[near] <= eps / 4 + 1e-15)
        assert widths.max() <= 1.0 + 1e-15

    def test_h_max_caps_width(self):
        edges = graded_breakpoints(0.0, 10.0, [], 0.1, 0.5)
        assert np.diff(edges).max() <= 0.5 + 1e-12
        assert len(edges) == 21


def test_integrate_vector_smooth_components():
    edges = graded_breakpoints(0.0, math.pi, [], 0.1, 0.5)
    result = integrate_vector(
        lambda u: np.array([math.sin(u), u * u]), edges, epsabs=1e-10, limit=200
    )
    exact = np.array([2.0, math.pi**3 / 3.0])
    assert result.value == pytest.approx(exact, rel=1e-13)
    assert np.max(np.abs(result.value - exact)) <= result.error
    assert result.converged
    assert result.intervals >= len(edges) - 1
    assert result.evaluations > 0


def test_integrate_vector_error_includes_rounding():
    eps, half = 0.01, 1.0
    edges = graded_breakpoints(-half, half, [0.0], eps, 0.25)
    result = integrate_vector(
        lambda u: np.array([1.0 / (u * u + eps * eps) ** 2]), edges, epsabs=1e-3, limit=500
    )
    exact = half / (eps**2 * (half**2 + eps**2)) + math.atan(half / eps) / eps**3
    assert result.value[0] == pytest.approx(exact, rel=1e-10)
    # 50 machine epsilons per unit of integrated |f| is the floor of the estimate
    assert result.error >= 0.99 * 50 * np.finfo(float).eps * exact


class TestRichardson:
    def test_exact_for_first_order_error(self):
        values = [1.0 + 0.3 * h for h in (0.1, 0.05, 0.025)]
        result = richardson(values)
        assert result.estimate == pytest.approx(1.0, abs=1e-14)
        assert result.observed_order == pytest.approx(1.0)

    def test_detects_second_order(self):
        values = [2.0 + 0.7 * h**2 + 0.1 * h**3 for h in (0.2, 0.1, 0.05, 0.025)]
        result = richardson(values)
        assert result.orders[0] == 2
        assert result.estimate == pytest.approx(2.0, abs=1e-12)

    def test_analytic_ladder(self):
        # exp(-lam*eps) * G is what the regulated transform looks like
        values = [3.0 * math.exp(-eps) for eps in (0.1, 0.05, 0.025, 0.0125, 0.00625)]
        result = richardson(values)
        assert result.estimate.real == pytest.approx(3.0, rel=1e-9)
        assert result.residual < 1e-6

    def test_complex_values(self):
        values = [complex(1.0 + h, -2.0 + 3 * h) for h in (0.1, 0.05, 0.025)]
        assert richardson(values).estimate == pytest.approx(complex(1.0, -2.0))

    def test_needs_two_values(self):
        with pytest.raises(ValueError, match="at least two"):
            richardson([1.0])


def test_richardson_coefficients_reproduce_estimate():
    values = [1.0 + 0.3 * h + 0.2 * h * h for h in (0.1, 0.05, 0.025)]
    result = richardson(values)
    assert list(result.coefficients) == pytest.approx([1.0 / 3.0, -2.0, 8.0 / 3.0])
    assert math.fsum(result.coefficients) == pytest.approx(1.0)
    assert sum(c * v for c, v in zip(result.coefficients, values)) == pytest.approx(
        result.estimate.real, abs=1e-14
    )


def test_propagated_error_weights_finest_levels():
    values = [math.exp(-eps) for eps in (0.2, 0.1, 0.05, 0.025, 0.0125)]
    result = richardson(values)
    errors = [1e-12, 1e-12, 1e-12, 1e-12, 1e-9]
    assert result.propagated(errors) >= 1e-9
    assert result.propagated([1e-10] * 5) == pytest.approx(
        1e-10 * sum(abs(c) for c in result.coefficients)
    )
    with pytest.raises(ValueError, match="one error per"):
        result.propagated([1e-10])


def test_observed_order_undefined():
    assert observed_order([1.0, 1.0, 1.0]) is None
    assert observed_order([1.0, 2.0]) is None
