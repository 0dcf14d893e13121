"""Physical value types shared by every module.

Natural units throughout (hbar = c = k_B = 1). The mirror is the plane z = 0 and every
scenario keeps the atom at the transverse origin, so results depend on the distance ``z0``
only. ``beta = inf`` is the zero-temperature sentinel.
"""

from __future__ import annotations

import cmath
import math
from enum import Enum
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

ALPHA_SUM_TOLERANCE = 1e-12

# Above this exponent 1/(e^x - 1) equals e^-x to double precision.
_PLANCK_ASYMPTOTIC = 40.0


class DomainError(ValueError):
    """A physical parameter lies outside its domain."""


class NumericalError(Exception):
    """Base class for numerical failures (truncation, differencing, convergence)."""


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def index(self) -> int:
        return "xyz".index(self.value)


AXES: tuple[Axis, Axis, Axis] = (Axis.X, Axis.Y, Axis.Z)


class AtomSpec(BaseModel):
    """Two-level atom: transition frequency, vacuum decay rate, relative polarizabilities."""

    model_config = ConfigDict(frozen=True)

    omega0: float = Field(gt=0, allow_inf_nan=False)
    gamma0: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    alpha: tuple[float, float, float] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        for component in value:
            if not 0.0 <= component <= 1.0:
                raise ValueError(f"each alpha component must lie in [0, 1], got {component}")
        if abs(sum(value) - 1.0) > ALPHA_SUM_TOLERANCE:
            raise ValueError(f"alpha components must sum to 1, got {sum(value)!r}")
        return value

    @classmethod
    def isotropic(cls, omega0: float, gamma0: float = 1.0) -> AtomSpec:
        return cls(omega0=omega0, gamma0=gamma0)

    @classmethod
    def polarized(cls, axis: Axis | str, omega0: float, gamma0: float = 1.0) -> AtomSpec:
        """Atom whose dipole points along a single axis."""
        alpha = [0.0, 0.0, 0.0]
        alpha[Axis(axis).index] = 1.0
        return cls(omega0=omega0, gamma0=gamma0, alpha=tuple(alpha))

    def alpha_of(self, axis: Axis | str) -> float:
        return self.alpha[Axis(axis).index]

    def dipole_weight(self, axis: Axis | str) -> float:
        """Squared dipole element e^2 |<+|r_i|->|^2, i.e. gamma0 * alpha_i * 3pi / omega0^3."""
        return self.gamma0 * self.alpha_of(axis) * 3.0 * math.pi / self.omega0**3


# -- scenarios ---------------------------------------------------------------


class StaticFreeSpace(BaseModel):
    """Atom at rest without a boundary, optionally in a thermal bath."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["static_free_space"] = "static_free_space"
    beta: float = Field(default=math.inf, gt=0)

    @property
    def effective_beta(self) -> float:
        return self.beta


class StaticMirrorThermal(BaseModel):
    """Atom at rest a distance ``z0`` from the mirror, in a bath at inverse temperature ``beta``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["static_mirror_thermal"] = "static_mirror_thermal"
    z0: float = Field(gt=0, allow_inf_nan=False)
    beta: float = Field(default=math.inf, gt=0)

    @property
    def effective_beta(self) -> float:
        return self.beta


class AcceleratedMirror(BaseModel):
    """Atom uniformly accelerated parallel to the mirror at distance ``z0``.

    ``a = 0`` is rejected; the inertial limit is ``StaticMirrorThermal(z0, beta=inf)``.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["accelerated_mirror"] = "accelerated_mirror"
    a: float = Field(gt=0, allow_inf_nan=False)
    z0: float = Field(gt=0, allow_inf_nan=False)

    @property
    def effective_beta(self) -> float:
        return unruh_beta(self.a)


class AcceleratedFreeSpace(BaseModel):
    """Uniformly accelerated atom without a boundary."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["accelerated_free_space"] = "accelerated_free_space"
    a: float = Field(gt=0, allow_inf_nan=False)

    @property
    def effective_beta(self) -> float:
        return unruh_beta(self.a)


Scenario = Annotated[
    Union[StaticFreeSpace, StaticMirrorThermal, AcceleratedMirror, AcceleratedFreeSpace],
    Field(discriminator="kind"),
]

ACCELERATED_KINDS = ("accelerated_mirror", "accelerated_free_space")

_scenario_adapter: TypeAdapter[Scenario] = TypeAdapter(Scenario)


def parse_scenario(data: dict[str, object]) -> Scenario:
    """Validate a plain mapping (``{"kind": ..., ...}``) into a scenario value."""
    return _scenario_adapter.validate_python(data)


def is_accelerated(scenario: Scenario) -> bool:
    return scenario.kind in ACCELERATED_KINDS


def mirror_distance(scenario: Scenario) -> float:
    """Distance to the mirror; ``inf`` when the scenario has no boundary."""
    return getattr(scenario, "z0", math.inf)


def scenario_parameters(scenario: Scenario) -> dict[str, float]:
    """Flat parameter tuple used in tables and error messages."""
    return {
        "z0": mirror_distance(scenario),
        "beta": getattr(scenario, "beta", math.inf),
        "a": getattr(scenario, "a", 0.0),
    }


# -- initial states ----------------------------------------------------------


class StateKind(str, Enum):
    EXCITED = "excited"
    GROUND = "ground"
    MIXED = "mixed"


class InitialState(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: StateKind = StateKind.EXCITED
    excited_fraction: float | None = Field(default=None, ge=0, le=1)

    @model_validator(mode="after")
    def _check_fraction(self) -> InitialState:
        if self.kind == StateKind.MIXED and self.excited_fraction is None:
            raise ValueError("a mixed initial state needs excited_fraction")
        if self.kind == StateKind.EXCITED and self.excited_fraction not in (None, 1.0):
            raise ValueError("excited initial state has excited_fraction 1")
        if self.kind == StateKind.GROUND and self.excited_fraction not in (None, 0.0):
            raise ValueError("ground initial state has excited_fraction 0")
        return self

    @classmethod
    def excited(cls) -> InitialState:
        return cls(kind=StateKind.EXCITED)

    @classmethod
    def ground(cls) -> InitialState:
        return cls(kind=StateKind.GROUND)

    @classmethod
    def mixed(cls, excited_fraction: float) -> InitialState:
        return cls(kind=StateKind.MIXED, excited_fraction=excited_fraction)

    @property
    def fraction(self) -> float:
        if self.kind == StateKind.EXCITED:
            return 1.0
        if self.kind == StateKind.GROUND:
            return 0.0
        return float(self.excited_fraction)  # type: ignore[arg-type]

    def energy(self, omega0: float) -> float:
        """Mean atomic energy <H_A(0)> = omega0 * (excited_fraction - 1/2)."""
        return omega0 * (self.fraction - 0.5)


# -- operations --------------------------------------------------------------


def unruh_beta(a: float) -> float:
    """Inverse Unruh temperature 2*pi/a of a uniformly accelerated observer."""
    if not a > 0:
        raise DomainError(f"acceleration must be positive, got {a}")
    return 2.0 * math.pi / a


def effective_beta(scenario: Scenario) -> float:
    return scenario.effective_beta


def planck_occupation(beta: float, omega: float) -> float:
    """Bose-Einstein occupation 1/(e^{beta*omega} - 1); exactly 0 at beta = inf."""
    if math.isinf(beta):
        return 0.0
    x = beta * omega
    if not x > 0:
        raise DomainError(f"beta*omega must be positive, got {x}")
    if x > _PLANCK_ASYMPTOTIC:
        return math.exp(-x) / (1.0 - math.exp(-x))
    return 1.0 / math.expm1(x)


def trajectory_point(scenario: Scenario, tau: complex) -> np.ndarray:
    """Spacetime point (t, x, y, z) of the atom at proper time ``tau``.

    ``tau`` may be complex; the regulated correlators are evaluated at tau - i*epsilon.
    """
    z0 = mirror_distance(scenario)
    z = 0.0 if math.isinf(z0) else z0
    if is_accelerated(scenario):
        a = scenario.a
        point = [cmath.sinh(a * tau) / a, cmath.cosh(a * tau) / a, 0.0, z]
    else:
        point = [tau, 0.0, 0.0, z]
    dtype = complex if isinstance(tau, complex) else float
    if dtype is float:
        point = [p.real if isinstance(p, complex) else p for p in point]
    return np.array(point, dtype=dtype)
