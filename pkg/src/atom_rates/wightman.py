"""Electric-field two-point functions along stationary trajectories near a perfect mirror.

All correlators carry an explicit regulator: the lag is continued to u - i*epsilon in every
factor that contains it (numerators and sinh arguments included). Only diagonal components
are produced; off-diagonal ones vanish for every geometry handled here.

Two independent routes are provided:

- closed forms in the lag (``correlator_static_thermal``, ``correlator_accel_mirror_xx`` and
  their vectorized kernels used by the quadrature oracle);
- ``correlator_from_potential``, which differentiates the four-potential two-point function
  numerically and serves as the oracle for the closed forms.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from atom_rates.domain import (
    Axis,
    DomainError,
    NumericalError,
    Scenario,
    is_accelerated,
    mirror_distance,
    trajectory_point,
)

logger = logging.getLogger(__name__)

_INV_PI2 = 1.0 / math.pi**2
# lags x images evaluated per block of the thermal sum
_IMAGE_BLOCK_ELEMENTS = 1 << 16


class ImageSumTruncationError(NumericalError):
    """The image sum cannot reach the requested tolerance within the term cap."""

    def __init__(self, message: str, *, achieved_bound: float, terms: int) -> None:
        super().__init__(message)
        self.achieved_bound = achieved_bound
        self.terms = terms


class FiniteDifferenceError(NumericalError):
    """Finite differencing of the potential failed (singular separation or no convergence)."""

    def __init__(self, message: str, *, steps: list[float]) -> None:
        super().__init__(message)
        self.steps = steps


@dataclass(frozen=True)
class CorrelatorSample:
    """Diagonal of G_ij(u - i*epsilon)."""

    u: complex
    epsilon: float
    xx: complex
    yy: complex
    zz: complex
    image_terms: int = 0
    tail_bound: float | None = None

    def component(self, axis: Axis | str) -> complex:
        return (self.xx, self.yy, self.zz)[Axis(axis).index]

    @property
    def tensor(self) -> np.ndarray:
        return np.diag(np.array([self.xx, self.yy, self.zz], dtype=complex))


class ImageSumMode(str, Enum):
    TRUNCATE_AT_TOLERANCE = "tolerance"
    FIXED_TERMS = "fixed"


class ImageSumPolicy(BaseModel):
    """How many thermal images k = -K..K to keep.

    ``tol`` is relative to the magnitude of the correlator being summed.
    """

    model_config = ConfigDict(frozen=True)

    mode: ImageSumMode = ImageSumMode.TRUNCATE_AT_TOLERANCE
    tol: float = Field(default=1e-12, gt=0)
    terms: int = Field(default=1, ge=1)
    max_terms: int = Field(default=10**6, ge=1)
    tail_bound_reported: bool = True

    @classmethod
    def truncate_at_tolerance(cls, tol: float, max_terms: int = 10**6) -> ImageSumPolicy:
        return cls(mode=ImageSumMode.TRUNCATE_AT_TOLERANCE, tol=tol, max_terms=max_terms)

    @classmethod
    def fixed_terms(cls, terms: int) -> ImageSumPolicy:
        return cls(mode=ImageSumMode.FIXED_TERMS, terms=terms)


DEFAULT_IMAGE_POLICY = ImageSumPolicy()


# -- image-sum bookkeeping ---------------------------------------------------


def image_tail_bound(
    terms: int, beta: float, z0: float, epsilon: float, u_abs: float = 0.0
) -> float:
    """Upper bound on |sum over |k| > terms| for any diagonal component.

    Each omitted image is bounded by 2/y^4 + (u^2 + 4 z0^2)/y^6 with y = |k|beta - epsilon,
    and the sum over both signs of k by the integral from ``terms`` to infinity.
    """
    if math.isinf(beta):
        return 0.0
    t = terms * beta - epsilon
    if t <= 0:
        return math.inf
    if math.isinf(z0):
        integral = 1.0 / (3.0 * t**3)
    else:
        integral = 2.0 / (3.0 * t**3) + (u_abs**2 + 4.0 * z0**2) / (5.0 * t**5)
    return 2.0 * _INV_PI2 * integral / beta


def terms_for_bound(
    target: float,
    beta: float,
    z0: float,
    epsilon: float,
    u_abs: float = 0.0,
    max_terms: int = 10**6,
) -> int:
    """Smallest image count whose tail bound is at most ``target``."""
    if math.isinf(beta):
        return 0

    def bound(k: int) -> float:
        return image_tail_bound(k, beta, z0, epsilon, u_abs)

    capped = bound(max_terms)
    if capped > target:
        raise ImageSumTruncationError(
            f"image sum needs more than {max_terms} terms for bound {target:.3g}",
            achieved_bound=capped,
            terms=max_terms,
        )
    hi = 1
    while bound(hi) > target:
        hi = min(2 * hi, max_terms)
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def resolve_image_terms(
    policy: ImageSumPolicy,
    beta: float,
    z0: float,
    epsilon: float,
    u_abs: float,
    scale: float,
) -> int:
    """Image count demanded by ``policy`` for a correlator of magnitude ``scale``."""
    if math.isinf(beta):
        return 0
    if policy.mode == ImageSumMode.FIXED_TERMS:
        return policy.terms
    return terms_for_bound(policy.tol * scale, beta, z0, epsilon, u_abs, policy.max_terms)


# -- closed-form kernels -----------------------------------------------------


def _mirror_term(w2: np.ndarray, z0: float, parity: float) -> np.ndarray:
    """-(parity*w^2 + 4 z0^2) / (w^2 - 4 z0^2)^3; parity +1 transverse, -1 normal."""
    four_z2 = 4.0 * z0 * z0
    d = w2 - four_z2
    return -(parity * w2 + four_z2) / (d * d * d)


def _static_terms(w: np.ndarray, z0: float) -> tuple[np.ndarray, np.ndarray]:
    w2 = w * w
    free = 1.0 / (w2 * w2)
    if math.isinf(z0):
        return free, free
    return free + _mirror_term(w2, z0, 1.0), free + _mirror_term(w2, z0, -1.0)


def static_image_terms(
    u: complex, z0: float, beta: float, epsilon: float, orders: list[int]
) -> list[tuple[complex, complex]]:
    """Individual image contributions (transverse, normal) for the listed k."""
    out = []
    for k in orders:
        shift = 0.0 if k == 0 else 1j * k * beta
        t, n = _static_terms(np.asarray(u + shift - 1j * epsilon, dtype=complex), z0)
        out.append((complex(t) * _INV_PI2, complex(n) * _INV_PI2))
    return out


def static_thermal_components(
    u: np.ndarray | complex,
    z0: float,
    beta: float,
    epsilon: float,
    terms: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Transverse (xx = yy) and normal (zz) components on an array of lags.

    ``z0 = inf`` drops the mirror; ``beta = inf`` keeps only k = 0.
    """
    w0 = np.asarray(u, dtype=complex) - 1j * epsilon
    transverse, normal = _static_terms(w0, z0)
    if math.isinf(beta) or terms <= 0:
        return transverse * _INV_PI2, normal * _INV_PI2
    block = max(64, _IMAGE_BLOCK_ELEMENTS // max(w0.size, 1))
    for start in range(1, terms + 1, block):
        orders = np.arange(start, min(start + block, terms + 1), dtype=float)
        shift = 1j * beta * orders
        for sign in (1.0, -1.0):
            t, n = _static_terms(w0[..., None] + sign * shift, z0)
            transverse = transverse + t.sum(axis=-1)
            normal = normal + n.sum(axis=-1)
    return transverse * _INV_PI2, normal * _INV_PI2


def accel_mirror_xx(
    u: np.ndarray | complex, a: float, z0: float, epsilon: float
) -> np.ndarray:
    """x-polarized correlator along the accelerated trajectory; ``z0 = inf`` drops the mirror."""
    w = np.asarray(u, dtype=complex) - 1j * epsilon
    with np.errstate(over="ignore", invalid="ignore"):
        s = np.sinh(0.5 * a * w)
        s2 = s * s
        value = 1.0 / (s2 * s2)
        if not math.isinf(z0):
            b2 = (a * z0) ** 2
            d = b2 - s2
            value = value + (b2 + s2) / (d * d * d)
    return a**4 / (16.0 * math.pi**2) * value


def real_poles(scenario: Scenario) -> tuple[float, ...]:
    """Real parts of the correlator singularities closest to the real lag axis."""
    z0 = mirror_distance(scenario)
    if math.isinf(z0):
        return (0.0,)
    if is_accelerated(scenario):
        q = 2.0 * math.asinh(scenario.a * z0) / scenario.a
        return (-q, 0.0, q)
    return (-2.0 * z0, 0.0, 2.0 * z0)


def _check_regulator(epsilon: float) -> None:
    if not epsilon > 0:
        raise DomainError(f"regulator epsilon must be positive, got {epsilon}")


def correlator_static_thermal(
    z0: float,
    beta: float,
    u: complex,
    epsilon: float,
    policy: ImageSumPolicy | None = None,
) -> CorrelatorSample:
    """Thermal correlator of an atom at rest a distance ``z0`` from the mirror."""
    if not z0 > 0:
        raise DomainError(f"z0 must be positive, got {z0}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    _check_regulator(epsilon)
    policy = policy or DEFAULT_IMAGE_POLICY
    u_abs = abs(u)

    terms = 0
    if not math.isinf(beta):
        xx0, zz0 = static_thermal_components(u, z0, beta, epsilon, 0)
        scale = max(abs(complex(xx0)), abs(complex(zz0)))
        terms = resolve_image_terms(policy, beta, z0, epsilon, u_abs, scale)
    xx, zz = static_thermal_components(u, z0, beta, epsilon, terms)

    if policy.mode == ImageSumMode.TRUNCATE_AT_TOLERANCE and terms:
        final_scale = max(abs(complex(xx)), abs(complex(zz)))
        if image_tail_bound(terms, beta, z0, epsilon, u_abs) > policy.tol * final_scale:
            terms = resolve_image_terms(policy, beta, z0, epsilon, u_abs, final_scale)
            xx, zz = static_thermal_components(u, z0, beta, epsilon, terms)

    bound = image_tail_bound(terms, beta, z0, epsilon, u_abs)
    logger.debug("static correlator u=%s eps=%g: %d images, tail %.3g", u, epsilon, terms, bound)
    return CorrelatorSample(
        u=u,
        epsilon=epsilon,
        xx=complex(xx),
        yy=complex(xx),
        zz=complex(zz),
        image_terms=terms,
        tail_bound=bound if policy.tail_bound_reported else None,
    )


def correlator_accel_mirror_xx(a: float, z0: float, u: complex, epsilon: float) -> complex:
    """x-polarized correlator of an atom accelerated parallel to the mirror."""
    if not a > 0:
        raise DomainError(f"acceleration must be positive, got {a}")
    if not z0 > 0:
        raise DomainError(f"z0 must be positive, got {z0}")
    _check_regulator(epsilon)
    return complex(accel_mirror_xx(u, a, z0, epsilon))


def correlator_xx_from_points(
    x: np.ndarray, x_prime: np.ndarray, epsilon: float = 0.0
) -> complex:
    """x-polarized correlator written in spacetime separations.

    Points may be complex; ``epsilon`` is subtracted from the time separation.
    """
    x = np.asarray(x, dtype=complex)
    xp = np.asarray(x_prime, dtype=complex)
    dt = x[0] - xp[0] - 1j * epsilon
    dx, dy = x[1] - xp[1], x[2] - xp[2]
    z_minus, z_plus = x[3] - xp[3], x[3] + xp[3]
    common = dt * dt + dy * dy - dx * dx
    sigma_minus = dt * dt - dx * dx - dy * dy - z_minus * z_minus
    sigma_plus = dt * dt - dx * dx - dy * dy - z_plus * z_plus
    value = (common + z_minus * z_minus) / sigma_minus**3
    value -= (common + z_plus * z_plus) / sigma_plus**3
    return complex(value * _INV_PI2)


# -- four-potential oracle ---------------------------------------------------

_ETA = np.diag([1.0, -1.0, -1.0, -1.0])
_NORMAL = np.array([0.0, 0.0, 0.0, 1.0])
# sixth-order central first derivative
_STENCIL = ((-3, -1 / 60), (-2, 3 / 20), (-1, -3 / 4), (1, 3 / 4), (2, -3 / 20), (3, 1 / 60))
_FD_RTOL = 1e-7
_FD_MAX_HALVINGS = 12


def _image_orders(terms: int) -> np.ndarray:
    orders = [0]
    for k in range(1, terms + 1):
        orders.extend((k, -k))
    return np.array(orders, dtype=float)


def four_potential(
    mu: int,
    nu: int,
    x: np.ndarray,
    x_prime: np.ndarray,
    beta: float = math.inf,
    epsilon: float = 0.0,
    terms: int = 0,
    mirror: bool = True,
) -> np.ndarray:
    """<A^mu(x) A^nu(x')> in Feynman gauge with thermal images and the mirror image.

    Vectorized over leading axes of ``x`` and ``x_prime`` (last axis is (t, x, y, z)).
    """
    x = np.asarray(x, dtype=complex)
    xp = np.asarray(x_prime, dtype=complex)
    free_coeff = _ETA[mu, nu]
    image_coeff = _ETA[mu, nu] + 2.0 * _NORMAL[mu] * _NORMAL[nu]
    shape = np.broadcast_shapes(x.shape, xp.shape)[:-1]
    if free_coeff == 0.0 and (image_coeff == 0.0 or not mirror):
        return np.zeros(shape, dtype=complex)

    dt = x[..., 0] - xp[..., 0] - 1j * epsilon
    transverse2 = (x[..., 1] - xp[..., 1]) ** 2 + (x[..., 2] - xp[..., 2]) ** 2
    if math.isinf(beta):
        shifted = dt[..., None]
    else:
        shifted = dt[..., None] + 1j * beta * _image_orders(terms)
    s2 = shifted * shifted - transverse2[..., None]
    total = free_coeff / (s2 - ((x[..., 3] - xp[..., 3]) ** 2)[..., None])
    if mirror:
        total = total - image_coeff / (s2 - ((x[..., 3] + xp[..., 3]) ** 2)[..., None])
    return total.sum(axis=-1) / (4.0 * math.pi**2)


def _mixed_partial(
    potential: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: np.ndarray,
    xp: np.ndarray,
    first: int,
    second: int,
    h: float,
) -> complex:
    """d/dx^first d/dx'^second of ``potential`` with a product of sixth-order stencils."""
    n = len(_STENCIL)
    points = np.repeat(x[None, :], n * n, axis=0)
    primed = np.repeat(xp[None, :], n * n, axis=0)
    weights = np.empty(n * n)
    for i, (m, cm) in enumerate(_STENCIL):
        for j, (l, cl) in enumerate(_STENCIL):
            row = i * n + j
            points[row, first] += m * h
            primed[row, second] += l * h
            weights[row] = cm * cl
    return complex(np.dot(weights, potential(points, primed)) / (h * h))


def _field_component(
    axis: int,
    other: int,
    x: np.ndarray,
    xp: np.ndarray,
    h: float,
    beta: float,
    epsilon: float,
    terms: int,
    mirror: bool,
) -> complex:
    def spatial(p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return four_potential(axis + 1, other + 1, p, q, beta, epsilon, terms, mirror)

    def temporal(p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return four_potential(0, 0, p, q, beta, epsilon, terms, mirror)

    return _mixed_partial(spatial, x, xp, 0, 0, h) + _mixed_partial(
        temporal, x, xp, axis + 1, other + 1, h
    )


def _separation_scale(x: np.ndarray, xp: np.ndarray, epsilon: float, mirror: bool) -> float:
    dt = x[0] - xp[0] - 1j * epsilon
    scales = []
    z_separations = [x[3] - xp[3]]
    if mirror:
        z_separations.append(x[3] + xp[3])
    for dz in z_separations:
        spatial = np.array([x[1] - xp[1], x[2] - xp[2], dz])
        sigma2 = dt * dt - np.sum(spatial * spatial)
        r = math.sqrt(float(np.sum(np.abs(spatial) ** 2)))
        denominator = abs(dt) + r
        scales.append(abs(sigma2) / denominator if denominator > 0 else 0.0)
    return min(scales)


def _differentiate(
    component: tuple[int, int],
    x: np.ndarray,
    xp: np.ndarray,
    scale: float,
    beta: float,
    epsilon: float,
    terms: int,
    mirror: bool,
) -> complex:
    steps: list[float] = []
    tiny = 1e-12 * max(1.0, float(np.max(np.abs(np.concatenate([x, xp])))))
    h = 1e-2 * scale
    previous: complex | None = None
    for _ in range(_FD_MAX_HALVINGS):
        if not h > tiny or not math.isfinite(h):
            break
        estimate = _field_component(*component, x, xp, h, beta, epsilon, terms, mirror)
        steps.append(h)
        if previous is not None and abs(estimate - previous) <= _FD_RTOL * abs(estimate):
            logger.debug("finite difference converged at h=%g after %d steps", h, len(steps))
            return (64.0 * estimate - previous) / 63.0
        previous = estimate
        h *= 0.5
    raise FiniteDifferenceError(
        f"finite differencing did not converge for component {component}", steps=steps
    )


def correlator_from_potential(
    beta: float,
    x: np.ndarray,
    x_prime: np.ndarray,
    component: tuple[Axis | str, Axis | str] = (Axis.X, Axis.X),
    *,
    epsilon: float = 0.0,
    mirror: bool = True,
    policy: ImageSumPolicy | None = None,
) -> complex:
    """<E_i(x) E_j(x')> from numerical derivatives of the four-potential correlator.

    E_i E_j = d0 d0' <A_i A_j> + di dj' <A_0 A_0>. The mirror sits at z = 0; both points must
    lie in z > 0 when ``mirror`` is set. Points may be complex (continued proper time).
    """
    x = np.asarray(x, dtype=complex)
    xp = np.asarray(x_prime, dtype=complex)
    if mirror and not (x[3].real > 0 and xp[3].real > 0):
        raise DomainError("both points must lie off the mirror (z > 0)")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    i, j = (Axis(c).index for c in component)
    policy = policy or DEFAULT_IMAGE_POLICY

    scale = _separation_scale(x, xp, epsilon, mirror)
    if not scale > 0 or not math.isfinite(scale):
        raise FiniteDifferenceError("points are at a singular separation", steps=[])

    terms = 0
    if not math.isinf(beta):
        leading = _differentiate((i, j), x, xp, scale, math.inf, epsilon, 0, mirror)
        z_ref = float(x[3].real) if mirror else math.inf
        u_abs = abs((x[0] - xp[0]).real)
        terms = resolve_image_terms(policy, beta, z_ref, epsilon, u_abs, abs(leading))
        logger.debug("potential oracle keeps %d thermal images", terms)
    return _differentiate((i, j), x, xp, scale, beta, epsilon, terms, mirror)


def correlator_along_trajectory(
    scenario: Scenario,
    tau: float,
    tau_prime: float,
    epsilon: float,
    component: tuple[Axis | str, Axis | str] = (Axis.X, Axis.X),
    policy: ImageSumPolicy | None = None,
) -> complex:
    """Potential oracle evaluated on the scenario trajectory at tau - i*epsilon and tau'.

    Accelerated scenarios see the vacuum field; their thermality comes from the trajectory.
    """
    _check_regulator(epsilon)
    x = trajectory_point(scenario, complex(tau, -epsilon))
    xp = trajectory_point(scenario, complex(tau_prime, 0.0))
    beta = math.inf if is_accelerated(scenario) else scenario.effective_beta
    mirror = not math.isinf(mirror_distance(scenario))
    return correlator_from_potential(
        beta, x, xp, component, epsilon=0.0, mirror=mirror, policy=policy
    )
