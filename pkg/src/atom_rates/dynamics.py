"""Relaxation of the mean atomic energy: closed-form rate-equation solution, an RK4 check
and a stochastic ensemble of independent two-state jump processes."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from atom_rates.domain import DomainError, InitialState
from atom_rates.rates import SpectralRates

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RelaxationCurve:
    times: np.ndarray
    energy: np.ndarray
    equilibrium_energy: float
    decay_rate: float
    omega0: float

    def excited_fraction(self) -> np.ndarray:
        return self.energy / self.omega0 + 0.5


@dataclass(frozen=True)
class EnsembleState:
    n1: int
    n2: int
    seed: int
    t: float

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    def energy(self, omega0: float) -> float:
        """Ensemble-mean single-atom energy."""
        return 0.5 * omega0 * (self.n2 - self.n1) / self.n


@dataclass(frozen=True)
class EnsembleTrajectory:
    states: tuple[EnsembleState, ...]
    times: np.ndarray
    energy: np.ndarray
    standard_error: np.ndarray
    seed: int
    workers: int
    n_atoms: int


def equilibrium_excited_fraction(sr: SpectralRates) -> float:
    """Stationary excited population A_up / (A_up + A_down); nan when nothing moves."""
    total = sr.decay_rate
    return sr.a_up / total if total > 0 else math.nan


def _as_times(times: np.ndarray | list[float]) -> np.ndarray:
    grid = np.asarray(times, dtype=float)
    if grid.ndim != 1 or np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise DomainError("times must be a non-decreasing grid of non-negative proper times")
    return grid


def analytic_relaxation(
    sr: SpectralRates,
    omega0: float,
    initial: InitialState,
    times: np.ndarray | list[float],
) -> RelaxationCurve:
    """<H_A(tau)> = h_eq + (h0 - h_eq) exp(-(A_up + A_down) tau)."""
    grid = _as_times(times)
    h0 = initial.energy(omega0)
    rate = sr.decay_rate
    if rate == 0.0:
        return RelaxationCurve(grid, np.full_like(grid, h0), h0, 0.0, omega0)
    equilibrium = -0.5 * omega0 + omega0 * sr.a_up / rate
    # h0*e^{-S t} + h_eq*(1 - e^{-S t}) equals h0 exactly at t = 0
    decay = np.exp(-rate * grid)
    energy = h0 * decay + equilibrium * -np.expm1(-rate * grid)
    return RelaxationCurve(grid, energy, equilibrium, rate, omega0)


def ode_rhs(sr: SpectralRates, omega0: float, h: float | np.ndarray) -> float | np.ndarray:
    """d<H_A>/dtau = (omega0/2)(g- - g+) - (g- + g+) <H_A>."""
    return 0.5 * omega0 * (sr.g_minus - sr.g_plus) - (sr.g_minus + sr.g_plus) * h


def integrate_relaxation(
    sr: SpectralRates,
    omega0: float,
    initial: InitialState,
    t_end: float,
    dt: float,
) -> RelaxationCurve:
    """Fixed-step fourth-order Runge-Kutta integration of ``ode_rhs``."""
    if not (t_end >= 0 and dt > 0):
        raise DomainError("t_end must be non-negative and dt positive")
    steps = max(1, math.ceil(t_end / dt))
    dt = t_end / steps
    energy = np.empty(steps + 1)
    h = initial.energy(omega0)
    energy[0] = h
    for i in range(steps):
        k1 = ode_rhs(sr, omega0, h)
        k2 = ode_rhs(sr, omega0, h + 0.5 * dt * k1)
        k3 = ode_rhs(sr, omega0, h + 0.5 * dt * k2)
        k4 = ode_rhs(sr, omega0, h + dt * k3)
        h = h + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        energy[i + 1] = h
    rate = sr.decay_rate
    equilibrium = -0.5 * omega0 + omega0 * sr.a_up / rate if rate > 0 else energy[0]
    return RelaxationCurve(np.linspace(0.0, t_end, steps + 1), energy, equilibrium, rate, omega0)


def _waiting_times(rng: np.random.Generator, rates: np.ndarray) -> np.ndarray:
    draws = rng.standard_exponential(rates.size)
    safe = np.where(rates > 0, rates, 1.0)
    return np.where(rates > 0, draws / safe, np.inf)


def _simulate_chunk(
    n_atoms: int,
    n_excited: int,
    a_down: float,
    a_up: float,
    grid: np.ndarray,
    seed: np.random.SeedSequence,
) -> np.ndarray:
    """Excited counts on ``grid`` for one block of independent atoms."""
    rng = np.random.default_rng(seed)
    excited = np.zeros(n_atoms, dtype=bool)
    excited[:n_excited] = True
    next_jump = _waiting_times(rng, np.where(excited, a_down, a_up))
    counts = np.empty(grid.size, dtype=np.int64)
    for i, t in enumerate(grid):
        while True:
            due = np.flatnonzero(next_jump <= t)
            if due.size == 0:
                break
            excited[due] = ~excited[due]
            rates = np.where(excited[due], a_down, a_up)
            next_jump[due] += _waiting_times(rng, rates)
        counts[i] = np.count_nonzero(excited)
    return counts


def monte_carlo_relaxation(
    sr: SpectralRates,
    omega0: float,
    n_atoms: int,
    initial: InitialState,
    times: np.ndarray | list[float],
    seed: int,
    workers: int = 1,
) -> EnsembleTrajectory:
    """Independent two-state jump processes with exact exponential waiting times.

    The ensemble is split into ``workers`` blocks, each with its own stream spawned from
    ``seed``; results are reproducible for a fixed (seed, workers) pair.
    """
    if n_atoms < 1:
        raise DomainError(f"ensemble size must be at least 1, got {n_atoms}")
    if workers < 1:
        raise DomainError(f"workers must be at least 1, got {workers}")
    if not (math.isfinite(sr.a_down) and math.isfinite(sr.a_up)):
        raise DomainError("Einstein coefficients must be finite")
    grid = _as_times(times)
    total_excited = round(initial.fraction * n_atoms)
    sizes = [len(block) for block in np.array_split(np.arange(n_atoms), workers)]
    streams = np.random.SeedSequence(seed).spawn(workers)

    tasks = []
    start = 0
    for size, stream in zip(sizes, streams):
        excited_here = min(max(total_excited - start, 0), size)
        tasks.append((size, excited_here, sr.a_down, sr.a_up, grid, stream))
        start += size
    logger.debug("monte carlo: %d atoms in %d blocks, seed %d", n_atoms, workers, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda task: _simulate_chunk(*task), tasks))
    else:
        blocks = [_simulate_chunk(*task) for task in tasks]
    n2 = np.sum(blocks, axis=0)
    n1 = n_atoms - n2

    energy = 0.5 * omega0 * (n2 - n1) / n_atoms
    p = n2 / n_atoms
    standard_error = omega0 * np.sqrt(p * (1.0 - p) / n_atoms)
    states = tuple(
        EnsembleState(int(a), int(b), seed, float(t)) for a, b, t in zip(n1, n2, grid)
    )
    return EnsembleTrajectory(states, grid, energy, standard_error, seed, workers, n_atoms)
