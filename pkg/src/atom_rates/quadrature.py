"""Adaptive quadrature on a pole-graded mesh and Richardson extrapolation."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

# Initial panels near a pole are at most this fraction of max(distance to it, epsilon).
GRADING = 0.25


def graded_breakpoints(
    lo: float,
    hi: float,
    poles: Sequence[float],
    epsilon: float,
    h_max: float,
) -> np.ndarray:
    """Panel edges on [lo, hi] that shrink geometrically toward each pole.

    A pole at real position p with imaginary offset epsilon forces panels no wider than
    GRADING * max(|u - p|, epsilon); every pole inside the interval is itself an edge.
    """
    anchors = sorted(p for p in poles if lo < p < hi)
    edges = [lo]
    u = lo
    while u < hi:
        distance = min((abs(u - p) for p in poles), default=math.inf)
        nxt = u + min(h_max, GRADING * max(distance, epsilon))
        for p in anchors:
            if u < p < nxt:
                nxt = p
                break
        u = min(nxt, hi)
        edges.append(u)
    return np.asarray(edges)


@dataclass(frozen=True)
class Integral:
    value: np.ndarray
    # Gauss-Kronrod estimate plus the floating-point rounding estimate, max over components.
    error: float
    evaluations: int
    intervals: int
    converged: bool


def integrate_vector(
    f: Callable[[float], np.ndarray],
    edges: np.ndarray,
    *,
    epsabs: float,
    limit: int,
) -> Integral:
    """Integrate a vector-valued f over [edges[0], edges[-1]] starting from the given panels."""
    value, error, info = quad_vec(
        f,
        float(edges[0]),
        float(edges[-1]),
        epsabs=epsabs,
        epsrel=0.0,
        norm="max",
        limit=limit,
        points=edges[1:-1],
        full_output=True,
    )
    return Integral(
        value=np.asarray(value),
        error=float(error),
        evaluations=int(info.neval),
        intervals=len(info.intervals),
        converged=bool(info.success),
    )


@dataclass(frozen=True)
class Extrapolation:
    estimate: complex
    residual: float
    orders: tuple[int, ...]
    observed_order: float | None
    # estimate == sum(c * v for c, v in zip(coefficients, values))
    coefficients: tuple[float, ...]

    def propagated(self, errors: Sequence[float]) -> float:
        """Bound on the estimate's error carried over from independent per-value errors."""
        if len(errors) != len(self.coefficients):
            raise ValueError("need one error per extrapolated value")
        return math.fsum(abs(c) * e for c, e in zip(self.coefficients, errors))


def observed_order(values: Sequence[complex], ratio: float = 2.0) -> float | None:
    """Leading error order estimated from the three coarsest values of a geometric ladder."""
    if len(values) < 3:
        return None
    d1 = abs(values[0] - values[1])
    d2 = abs(values[1] - values[2])
    if d1 == 0.0 or d2 == 0.0:
        return None
    return math.log(d1 / d2) / math.log(ratio)


def richardson(values: Sequence[complex], ratio: float = 2.0) -> Extrapolation:
    """Extrapolate a ladder of values computed at h, h/ratio, h/ratio^2, ... to h -> 0.

    Assumes an error expansion in consecutive integer powers starting from the observed
    leading order (falls back to 1 when the order cannot be read off the data).
    """
    if len(values) < 2:
        raise ValueError("richardson extrapolation needs at least two values")
    p_obs = observed_order(values, ratio)
    first = 1
    if p_obs is not None and math.isfinite(p_obs):
        nearest = round(p_obs)
        if 1 <= nearest <= 4 and abs(p_obs - nearest) < 0.3:
            first = nearest

    column = [complex(v) for v in values]
    weights = list(np.eye(len(values)))
    previous_best = column[-1]
    orders = []
    for level in range(len(values) - 1):
        p = first + level
        factor = ratio**p
        previous_best = column[-1]
        column = [
            (factor * column[i + 1] - column[i]) / (factor - 1.0) for i in range(len(column) - 1)
        ]
        weights = [
            (factor * weights[i + 1] - weights[i]) / (factor - 1.0)
            for i in range(len(weights) - 1)
        ]
        orders.append(p)
    estimate = column[0]
    return Extrapolation(
        estimate=estimate,
        residual=abs(estimate - previous_best),
        orders=tuple(orders),
        observed_order=p_obs,
        coefficients=tuple(float(c) for c in weights[0]),
    )
